//! CRT stacking: `x = (sum a_i b_i) mod P` with `b_i = 1 (mod P_i)` and
//! `b_i = 0 (mod P_j)` for `j != i`. Every layer is recovered from the same
//! input as `ModP(x, P_i)`, so layers share no error.

use crate::error::{Error, Result};
use crate::fitting::{fit_modp_with, DeltaChoice, ModPlan};
use crate::hesim::SlotCiphertext;
use crate::packing::{check_layer, common_len};
use crate::psev::{eval_fitted, schedule_for};

/// Upper limit on `P` so packed values stay exact in double precision.
pub const MAX_PRODUCT: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq)]
pub struct CrtBasis {
    moduli: Vec<u64>,
    product: u64,
    cofactors: Vec<u64>,
    inverses: Vec<u64>,
    recombinants: Vec<u64>,
    plans: Vec<ModPlan>,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `a^-1 mod m` by the extended Euclidean algorithm; `a` and `m` must be coprime.
fn mod_inverse(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    old_s.rem_euclid(m as i128) as u64
}

impl CrtBasis {
    pub fn new(moduli: Vec<u64>) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::InvalidParameter("a CRT basis needs at least one modulus".into()));
        }
        if moduli.iter().any(|&m| m < 2) {
            return Err(Error::InvalidParameter("CRT moduli must be >= 2".into()));
        }
        for i in 0..moduli.len() {
            for j in i + 1..moduli.len() {
                if gcd(moduli[i], moduli[j]) != 1 {
                    return Err(Error::InvalidParameter(format!(
                        "moduli {} and {} are not coprime",
                        moduli[i], moduli[j]
                    )));
                }
            }
        }
        let mut product: u64 = 1;
        for &m in &moduli {
            product = product.saturating_mul(m);
        }
        if product > MAX_PRODUCT {
            return Err(Error::InvalidParameter(format!(
                "modulus product {product} exceeds 2^24"
            )));
        }
        let cofactors: Vec<u64> = moduli.iter().map(|&m| product / m).collect();
        let inverses: Vec<u64> = cofactors
            .iter()
            .zip(&moduli)
            .map(|(&c, &m)| mod_inverse(c % m, m))
            .collect();
        let recombinants = cofactors
            .iter()
            .zip(&inverses)
            .map(|(&c, &inv)| (c as u128 * inv as u128 % product as u128) as u64)
            .collect();
        Ok(Self {
            moduli,
            product,
            cofactors,
            inverses,
            recombinants,
            plans: Vec::new(),
        })
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn product(&self) -> u64 {
        self.product
    }

    /// `P'_i = P / P_i`.
    pub fn cofactors(&self) -> &[u64] {
        &self.cofactors
    }

    /// `m_i = (P'_i)^-1 mod P_i`.
    pub fn inverses(&self) -> &[u64] {
        &self.inverses
    }

    /// `b_i = P'_i m_i mod P`.
    pub fn recombinants(&self) -> &[u64] {
        &self.recombinants
    }

    pub fn layers(&self) -> usize {
        self.moduli.len()
    }

    pub fn plans(&self) -> &[ModPlan] {
        &self.plans
    }

    /// Fits `ModP(x, P_i)` over `[0, P - 1]` for every layer.
    pub fn fit_plans(mut self, degree: usize, delta: DeltaChoice) -> Result<Self> {
        let upper = self.product - 1;
        self.plans = self
            .moduli
            .iter()
            .map(|&m| fit_modp_with(m, upper, degree, delta))
            .collect::<Result<_>>()?;
        Ok(self)
    }

    pub fn with_plans(mut self, plans: Vec<ModPlan>) -> Result<Self> {
        if plans.len() != self.layers() {
            return Err(Error::MissingPlan(format!(
                "CRT basis with {} moduli needs {} plans, got {}",
                self.layers(),
                self.layers(),
                plans.len()
            )));
        }
        for (i, (plan, &m)) in plans.iter().zip(&self.moduli).enumerate() {
            if plan.p() != m || plan.upper() < self.product - 1 {
                return Err(Error::MissingPlan(format!(
                    "layer {i} needs ModP(x, {m}) over [0, {}], plan is ModP(x, {}) over [0, {}]",
                    self.product - 1,
                    plan.p(),
                    plan.upper()
                )));
            }
        }
        self.plans = plans;
        Ok(self)
    }
}

/// Element-wise CRT recombination into `[0, P)`.
pub fn crt_pack(values: &[Vec<i64>], basis: &CrtBasis) -> Result<Vec<u64>> {
    if values.len() != basis.layers() {
        return Err(Error::Shape(format!(
            "basis has {} moduli, got {} vectors",
            basis.layers(),
            values.len()
        )));
    }
    let len = common_len(values)?;
    for (i, (v, &m)) in values.iter().zip(&basis.moduli).enumerate() {
        check_layer(i, v, m)?;
    }
    let p = basis.product as u128;
    Ok((0..len)
        .map(|j| {
            let sum: u128 = values
                .iter()
                .zip(&basis.recombinants)
                .map(|(v, &b)| v[j] as u128 * b as u128)
                .sum();
            (sum % p) as u64
        })
        .collect())
}

/// Recovers every layer with its own ModP plan, optionally on separate threads.
pub fn crt_unpack(ct: &SlotCiphertext, basis: &CrtBasis, parallel: bool) -> Result<Vec<SlotCiphertext>> {
    if basis.plans.len() != basis.layers() {
        return Err(Error::MissingPlan(format!(
            "CRT basis with {} moduli has {} plans",
            basis.layers(),
            basis.plans.len()
        )));
    }
    let layer = |plan: &ModPlan| {
        let sched = schedule_for(plan.fit());
        eval_fitted(plan.fit(), ct, 1.0, &sched)
    };
    if parallel && basis.layers() > 1 {
        std::thread::scope(|s| {
            let handles: Vec<_> = basis.plans.iter().map(|p| s.spawn(move || layer(p))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("CRT layer thread panicked"))
                .collect()
        })
    } else {
        basis.plans.iter().map(layer).collect()
    }
}
