//! Radix stacking: `x = a_1 + a_2 r_1 + a_3 r_1 r_2 + ...`.
//!
//! Unpacking peels one layer at a time. With `h = (delta / r_1) * PS(x)`, which
//! approximates `a_1 / r_1`, the next residual is `x / r_1 - h` and `a_1` is
//! recovered from `h` with additions only. The last layer is the final residual
//! and needs no ModP.

use crate::error::{Error, Result};
use crate::fitting::{fit_modp_with, DeltaChoice, ModPlan};
use crate::hesim::SlotCiphertext;
use crate::packing::{check_layer, common_len};
use crate::psev::{eval_fitted, mul_by_int_additively, mul_by_pow2_additively, schedule_for};

/// Largest packed value is kept below `2^24` so slots hold it exactly.
pub const MAX_PACKED_BITS: u32 = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct BitStackLayout {
    radices: Vec<u64>,
    /// One plan per layer except the last: modulus `r_i` over `[0, r_i * .. * r_d - 1]`.
    plans: Vec<ModPlan>,
}

impl BitStackLayout {
    /// Layers of `l_i` bits each.
    pub fn from_bit_widths(bit_widths: &[u32]) -> Result<Self> {
        if bit_widths.contains(&0) {
            return Err(Error::InvalidParameter("bit widths must be positive".into()));
        }
        let total: u32 = bit_widths.iter().sum();
        if total > MAX_PACKED_BITS {
            return Err(Error::InvalidParameter(format!(
                "{total} packed bits exceed the {MAX_PACKED_BITS}-bit limit"
            )));
        }
        Self::from_radices(bit_widths.iter().map(|&l| 1u64 << l).collect())
    }

    /// Layers with arbitrary radices `r_i >= 2`.
    pub fn from_radices(radices: Vec<u64>) -> Result<Self> {
        if radices.is_empty() {
            return Err(Error::InvalidParameter("a bit stack needs at least one layer".into()));
        }
        if radices.iter().any(|&r| r < 2) {
            return Err(Error::InvalidParameter("radices must be >= 2".into()));
        }
        let mut product: u64 = 1;
        for &r in &radices {
            product = product.saturating_mul(r);
        }
        if product > 1 << MAX_PACKED_BITS {
            return Err(Error::InvalidParameter(format!(
                "packed range {product} exceeds 2^{MAX_PACKED_BITS}"
            )));
        }
        Ok(Self {
            radices,
            plans: Vec::new(),
        })
    }

    pub fn radices(&self) -> &[u64] {
        &self.radices
    }

    /// `log2` of each radix when all are powers of two.
    pub fn bit_widths(&self) -> Option<Vec<u32>> {
        self.radices
            .iter()
            .map(|r| r.is_power_of_two().then(|| r.trailing_zeros()))
            .collect()
    }

    pub fn layers(&self) -> usize {
        self.radices.len()
    }

    pub fn plans(&self) -> &[ModPlan] {
        &self.plans
    }

    /// `(modulus, upper)` that layer `i`'s plan must cover.
    pub fn plan_target(&self, layer: usize) -> (u64, u64) {
        let upper: u64 = self.radices[layer..].iter().product::<u64>() - 1;
        (self.radices[layer], upper)
    }

    /// Fits every layer plan with the same degree.
    pub fn fit_plans(mut self, degree: usize, delta: DeltaChoice) -> Result<Self> {
        self.plans = (0..self.layers() - 1)
            .map(|i| {
                let (p, upper) = self.plan_target(i);
                fit_modp_with(p, upper, degree, delta)
            })
            .collect::<Result<_>>()?;
        Ok(self)
    }

    /// Attaches precomputed plans, checking each against its layer.
    pub fn with_plans(mut self, plans: Vec<ModPlan>) -> Result<Self> {
        if plans.len() != self.layers() - 1 {
            return Err(Error::MissingPlan(format!(
                "bit stack with {} layers needs {} plans, got {}",
                self.layers(),
                self.layers() - 1,
                plans.len()
            )));
        }
        for (i, plan) in plans.iter().enumerate() {
            let (p, upper) = self.plan_target(i);
            if plan.p() != p || plan.upper() < upper {
                return Err(Error::MissingPlan(format!(
                    "layer {i} needs ModP(x, {p}) over [0, {upper}], plan is ModP(x, {}) over [0, {}]",
                    plan.p(),
                    plan.upper()
                )));
            }
        }
        self.plans = plans;
        Ok(self)
    }
}

/// Element-wise radix stacking.
pub fn bitstack_pack(values: &[Vec<i64>], layout: &BitStackLayout) -> Result<Vec<u64>> {
    if values.len() != layout.layers() {
        return Err(Error::Shape(format!(
            "layout has {} layers, got {} vectors",
            layout.layers(),
            values.len()
        )));
    }
    let len = common_len(values)?;
    for (i, (v, &r)) in values.iter().zip(&layout.radices).enumerate() {
        check_layer(i, v, r)?;
    }
    Ok((0..len)
        .map(|j| {
            values
                .iter()
                .zip(&layout.radices)
                .rev()
                .fold(0u64, |acc, (v, &r)| acc * r + v[j] as u64)
        })
        .collect())
}

/// Plaintext inverse of [`bitstack_pack`].
pub fn bitstack_unpack_plain(packed: &[u64], layout: &BitStackLayout) -> Vec<Vec<u64>> {
    let mut layers = vec![Vec::with_capacity(packed.len()); layout.layers()];
    for &x in packed {
        let mut rest = x;
        for (layer, &r) in layers.iter_mut().zip(&layout.radices) {
            layer.push(rest % r);
            rest /= r;
        }
    }
    layers
}

fn mul_radix(e: &SlotCiphertext, radix: u64) -> Result<SlotCiphertext> {
    if radix.is_power_of_two() {
        mul_by_pow2_additively(e, radix.trailing_zeros())
    } else {
        mul_by_int_additively(e, radix)
    }
}

/// Sequentially extracts every layer from a packed ciphertext.
pub fn bitstack_unpack(ct: &SlotCiphertext, layout: &BitStackLayout) -> Result<Vec<SlotCiphertext>> {
    let d = layout.layers();
    if layout.plans.len() != d - 1 {
        return Err(Error::MissingPlan(format!(
            "bit stack with {d} layers needs {} plans, has {}",
            d - 1,
            layout.plans.len()
        )));
    }
    let mut out = Vec::with_capacity(d);
    let mut residual = ct.clone();
    for (plan, &radix) in layout.plans.iter().zip(&layout.radices) {
        let inv = 1.0 / radix as f64;
        let sched = schedule_for(plan.fit());
        // delta and 1/radix share one scalar multiplication.
        let low_scaled = eval_fitted(plan.fit(), &residual, inv, &sched)?;
        out.push(mul_radix(&low_scaled, radix)?);
        residual = residual.mul_const(inv)?.sub(&low_scaled)?;
    }
    out.push(residual);
    Ok(out)
}
