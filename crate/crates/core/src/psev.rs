//! Paterson–Stockmeyer evaluation of Chebyshev series.
//!
//! The evaluator is generic over [`ArithmeticElement`], so the same code runs on
//! plain `f64` values and on simulated ciphertexts.
//!
//! With baby steps `T_1..T_k` and giant steps `T_k, T_2k, .., T_{k 2^{m-1}}`, a
//! series `f` of degree exactly `k(2^m - 1)` is split as
//!
//! ```text
//! f = q T_{k 2^{m-1}} + r,    r - L T_{k(2^{m-1}-1)} = c q + s,
//! f = (T_{k 2^{m-1}} + c) q + s~,    s~ = s + L T_{k(2^{m-1}-1)}
//! ```
//!
//! and `q`, `s~` (both of degree exactly `k(2^{m-1} - 1)`) are evaluated
//! recursively. `L` is a power of two chosen so the leading coefficient of `s~`
//! dominates; with `L = 1` for every node this is the textbook recursion. Shorter
//! inputs are padded with a multiple of `T_{k(2^m - 1)}`, which is evaluated
//! alongside and subtracted at the end.

use crate::cheb::ChebSeries;
use crate::error::{Error, Result};
use crate::fitting::FittedPlan;
use crate::hesim::SlotCiphertext;

/// Operations the evaluator needs from a backend.
pub trait ArithmeticElement: Clone {
    fn add(&self, other: &Self) -> Result<Self>;
    fn sub(&self, other: &Self) -> Result<Self>;
    fn mul(&self, other: &Self) -> Result<Self>;
    fn mul_const(&self, c: f64) -> Result<Self>;
    fn add_const(&self, c: f64) -> Self;
    /// An element encoding the constant `c`, compatible with `self`.
    fn constant_like(&self, c: f64) -> Self;
    /// Remaining multiplicative level, for backends that track one.
    fn level(&self) -> Option<usize> {
        None
    }
}

impl ArithmeticElement for f64 {
    fn add(&self, other: &Self) -> Result<Self> {
        Ok(self + other)
    }
    fn sub(&self, other: &Self) -> Result<Self> {
        Ok(self - other)
    }
    fn mul(&self, other: &Self) -> Result<Self> {
        Ok(self * other)
    }
    fn mul_const(&self, c: f64) -> Result<Self> {
        Ok(self * c)
    }
    fn add_const(&self, c: f64) -> Self {
        self + c
    }
    fn constant_like(&self, c: f64) -> Self {
        c
    }
}

impl ArithmeticElement for SlotCiphertext {
    fn add(&self, other: &Self) -> Result<Self> {
        SlotCiphertext::add(self, other)
    }
    fn sub(&self, other: &Self) -> Result<Self> {
        SlotCiphertext::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Result<Self> {
        SlotCiphertext::mul(self, other)
    }
    fn mul_const(&self, c: f64) -> Result<Self> {
        SlotCiphertext::mul_const(self, c)
    }
    fn add_const(&self, c: f64) -> Self {
        SlotCiphertext::add_const(self, c)
    }
    fn constant_like(&self, c: f64) -> Self {
        SlotCiphertext::constant_like(self, c)
    }
    fn level(&self) -> Option<usize> {
        Some(SlotCiphertext::level(self))
    }
}

fn ceil_log2(k: usize) -> usize {
    (usize::BITS - (k.max(1) - 1).leading_zeros()) as usize
}

/// Baby-step/giant-step parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsSchedule {
    pub k: usize,
    pub m: usize,
    /// Multiplier applied to the result with a single scalar multiplication
    /// (1.0 means no multiplication).
    pub folded_scale: f64,
}

fn minimal_m(k: usize, degree: usize) -> usize {
    let mut m = 1;
    while k * ((1 << m) - 1) < degree {
        m += 1;
    }
    m
}

impl PsSchedule {
    /// `k = round(sqrt(D/2))` (at least 1) and the smallest `m` with `k(2^m - 1) >= D`.
    pub fn plan(degree: usize) -> Self {
        let k = ((degree as f64 / 2.0).sqrt().round() as usize).max(1);
        Self {
            k,
            m: minimal_m(k, degree),
            folded_scale: 1.0,
        }
    }

    /// Like [`PsSchedule::plan`] but searches `k` within a factor `sqrt 2` of
    /// `sqrt(D/2)` for the lowest multiplicative depth; ties go to the `k`
    /// closest to `sqrt(D/2)`.
    pub fn plan_min_depth(degree: usize) -> Self {
        let target = (degree as f64 / 2.0).sqrt();
        let lo = ((target / std::f64::consts::SQRT_2).floor() as usize).max(1);
        let hi = ((target * std::f64::consts::SQRT_2).ceil() as usize).max(lo);
        let mut best: Option<(usize, f64, Self)> = None;
        for k in lo..=hi {
            let s = Self {
                k,
                m: minimal_m(k, degree),
                folded_scale: 1.0,
            };
            let key = (s.depth(), (k as f64 - target).abs());
            let better = match &best {
                None => true,
                Some((d, dist, _)) => key.0 < *d || (key.0 == *d && key.1 < *dist),
            };
            if better {
                best = Some((key.0, key.1, s));
            }
        }
        best.expect("non-empty candidate range").2
    }

    pub fn with_folded_scale(mut self, scale: f64) -> Self {
        self.folded_scale = scale;
        self
    }

    /// Largest degree the recursion handles, `k(2^m - 1)`.
    pub fn capacity(&self) -> usize {
        self.k * ((1 << self.m) - 1)
    }

    /// Levels consumed from the mapped input `u` for a series of degree >= 1.
    pub fn depth(&self) -> usize {
        ceil_log2(self.k) + self.m + usize::from(self.folded_scale != 1.0)
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.m == 0 || self.m > 20 {
            return Err(Error::InvalidParameter(format!(
                "invalid schedule k = {}, m = {}",
                self.k, self.m
            )));
        }
        Ok(())
    }
}

/// `T_1..T_k` and `T_k, T_2k, .., T_{k 2^{m-1}}` at one input.
#[derive(Clone, Debug)]
pub struct PowerBasis<E> {
    pub bs: Vec<E>,
    pub gs: Vec<E>,
    /// Levels consumed to build the basis, when the backend tracks levels.
    pub levels_consumed: Option<usize>,
}

fn double<E: ArithmeticElement>(e: &E) -> Result<E> {
    e.add(e)
}

/// Builds the power basis with `T_{a+b} = 2 T_a T_b - T_{a-b}` for the baby
/// steps and `T_{2n} = 2 T_n^2 - 1` for the giant steps.
pub fn compute_power_basis<E: ArithmeticElement>(u: &E, sched: &PsSchedule) -> Result<PowerBasis<E>> {
    sched.validate()?;
    let k = sched.k;
    let mut bs: Vec<E> = Vec::with_capacity(k);
    bs.push(u.clone());
    for i in 2..=k {
        let t = if i.is_power_of_two() {
            let h = &bs[i / 2 - 1];
            double(&h.mul(h)?)?.add_const(-1.0)
        } else {
            // a: highest power of two below i, so i - a < a.
            let a = 1 << (usize::BITS - 1 - i.leading_zeros());
            let b = i - a;
            double(&bs[a - 1].mul(&bs[b - 1])?)?.sub(&bs[a - b - 1])?
        };
        bs.push(t);
    }
    let mut gs = Vec::with_capacity(sched.m);
    gs.push(bs[k - 1].clone());
    for j in 1..sched.m {
        let prev: &E = &gs[j - 1];
        gs.push(double(&prev.mul(prev)?)?.add_const(-1.0));
    }
    let start = u.level();
    let end = bs.iter().chain(gs.iter()).filter_map(|e| e.level()).min();
    let levels_consumed = match (start, end) {
        (Some(s), Some(e)) => Some(s - e),
        _ => None,
    };
    Ok(PowerBasis {
        bs,
        gs,
        levels_consumed,
    })
}

/// Either a known constant or a backend element.
#[derive(Clone)]
enum Val<E> {
    Const(f64),
    Elem(E),
}

impl<E: ArithmeticElement> Val<E> {
    fn add(self, other: Val<E>) -> Result<Val<E>> {
        Ok(match (self, other) {
            (Val::Const(a), Val::Const(b)) => Val::Const(a + b),
            (Val::Const(a), Val::Elem(e)) | (Val::Elem(e), Val::Const(a)) => Val::Elem(e.add_const(a)),
            (Val::Elem(a), Val::Elem(b)) => Val::Elem(a.add(&b)?),
        })
    }

    fn sub_elem(self, other: &E) -> Result<Val<E>> {
        Ok(match self {
            Val::Const(a) => Val::Elem(other.constant_like(a).sub(other)?),
            Val::Elem(e) => Val::Elem(e.sub(other)?),
        })
    }

    fn mul(self, other: Val<E>) -> Result<Val<E>> {
        Ok(match (self, other) {
            (Val::Const(a), Val::Const(b)) => Val::Const(a * b),
            (Val::Const(a), Val::Elem(e)) | (Val::Elem(e), Val::Const(a)) => Val::Elem(e.mul_const(a)?),
            (Val::Elem(a), Val::Elem(b)) => Val::Elem(a.mul(&b)?),
        })
    }

    fn into_elem(self, like: &E) -> E {
        match self {
            Val::Const(c) => like.constant_like(c),
            Val::Elem(e) => e,
        }
    }
}

fn l1(c: &[f64]) -> f64 {
    c.iter().map(|v| v.abs()).sum()
}

/// Smallest power of two `>= x`, and at least 1.
fn pow2_at_least(x: f64) -> f64 {
    if x <= 1.0 {
        1.0
    } else {
        2f64.powi(x.log2().ceil() as i32)
    }
}

/// Divides `f` by `T_d`: returns `(q, r)` with `f = q T_d + r`, `len(r) = d`.
fn divide_by_t(f: &[f64], d: usize) -> (Vec<f64>, Vec<f64>) {
    let n = f.len() - 1;
    debug_assert!(n >= d);
    let mut rem = f.to_vec();
    let mut q = vec![0.0; n - d + 1];
    for i in (d..=n).rev() {
        let j = i - d;
        let top = rem[i];
        if j == 0 || d == 0 {
            q[j] = top;
            rem[i] = 0.0;
        } else {
            // T_j T_d = (T_{d+j} + T_{|d-j|}) / 2
            q[j] = 2.0 * top;
            rem[i] = 0.0;
            rem[d.abs_diff(j)] -= top;
        }
    }
    rem.truncate(d);
    (q, rem)
}

/// Divides `f` by `g` in the Chebyshev basis: `f = c g + s`, `len(s) = len(g) - 1`.
fn divide(f: &[f64], g: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = f.len() - 1;
    let dg = g.len() - 1;
    debug_assert!(n >= dg);
    let lead = g[dg];
    let mut rem = f.to_vec();
    let mut c = vec![0.0; n - dg + 1];
    for a in (0..=n - dg).rev() {
        // Coefficient of T_{a+dg} in T_a * g.
        let top_factor = if a == 0 || dg == 0 { lead } else { lead / 2.0 };
        let ca = rem[a + dg] / top_factor;
        c[a] = ca;
        for (b, &gb) in g.iter().enumerate() {
            if gb == 0.0 {
                continue;
            }
            let half = ca * gb / 2.0;
            rem[a + b] -= half;
            rem[a.abs_diff(b)] -= half;
        }
        rem[a + dg] = 0.0;
    }
    rem.truncate(dg);
    (c, rem)
}

struct Evaluator<'a, E> {
    basis: &'a PowerBasis<E>,
    k: usize,
}

impl<E: ArithmeticElement> Evaluator<'_, E> {
    /// `sum c_i T_i` with `deg <= k`, straight from the baby steps.
    fn leaf(&self, coeffs: &[f64]) -> Result<Val<E>> {
        debug_assert!(coeffs.len() <= self.k + 1);
        let mut acc: Option<E> = None;
        for (i, &c) in coeffs.iter().enumerate().skip(1) {
            let term = self.basis.bs[i - 1].mul_const(c)?;
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
        Ok(match acc {
            None => Val::Const(coeffs[0]),
            Some(a) => Val::Elem(a.add_const(coeffs[0])),
        })
    }

    /// Evaluates `f` with `deg f == k(2^j - 1)`.
    fn recurse(&self, f: &[f64], j: usize) -> Result<Val<E>> {
        if j == 1 {
            return self.leaf(f);
        }
        let k = self.k;
        let giant = k << (j - 1);
        let pad = k * ((1 << (j - 1)) - 1);
        let (q, mut r) = divide_by_t(f, giant);
        // Any multiple of T_pad works here; a leading coefficient that dominates
        // the rest of s~ keeps the next division well conditioned.
        let (_, s0) = divide(&r, &q);
        let lead = pow2_at_least(2.0 * l1(&s0));
        r[pad] -= lead;
        let (c, mut s) = divide(&r, &q);
        s.push(lead);
        let qv = self.recurse(&q, j - 1)?;
        let sv = self.recurse(&s, j - 1)?;
        let cv = self.leaf(&c)?;
        let factor = cv.add(Val::Elem(self.basis.gs[j - 1].clone()))?;
        factor.mul(qv)?.add(sv)
    }

    /// `T_{k(2^j - 1)}` via `T_{k(2^j-1)} = 2 T_{k 2^{j-1}} T_{k(2^{j-1}-1)} - T_k`.
    fn pad_term(&self, j: usize) -> Result<E> {
        let tk = &self.basis.bs[self.k - 1];
        let mut acc = tk.clone();
        for i in 2..=j {
            acc = double(&self.basis.gs[i - 1].mul(&acc)?)?.sub(tk)?;
        }
        Ok(acc)
    }
}

/// Evaluates `sum c_i T_i(u)` for `u` already mapped into `[-1, 1]`, then
/// multiplies by `sched.folded_scale` (one scalar multiplication when it is not 1).
pub fn eval_ps<E: ArithmeticElement>(series: &ChebSeries, u: &E, sched: &PsSchedule) -> Result<E> {
    sched.validate()?;
    let coeffs = series.coeffs();
    let degree = series.degree();
    if degree == 0 {
        return Ok(u.constant_like(coeffs[0] * sched.folded_scale));
    }
    let capacity = sched.capacity();
    if degree > capacity {
        return Err(Error::DegreeOverflow { degree, capacity });
    }
    let basis = compute_power_basis(u, sched)?;
    let ev = Evaluator {
        basis: &basis,
        k: sched.k,
    };
    let value = if sched.m == 1 {
        ev.leaf(coeffs)?
    } else {
        // Pad to degree exactly k(2^m - 1) with a leading coefficient 2^e that
        // dominates the others; 2^e T_{k(2^m-1)} is removed again with doublings.
        let lead = pow2_at_least(2.0 * l1(coeffs));
        let mut padded = coeffs.to_vec();
        padded.resize(capacity + 1, 0.0);
        let sign = if padded[capacity] >= 0.0 { 1.0 } else { -1.0 };
        padded[capacity] += sign * lead;
        let v = ev.recurse(&padded, sched.m)?;
        let t = mul_by_pow2_additively(&ev.pad_term(sched.m)?, lead.log2() as u32)?;
        if sign > 0.0 {
            v.sub_elem(&t)?
        } else {
            v.add(Val::Elem(t))?
        }
    };
    let out = value.into_elem(u);
    if sched.folded_scale != 1.0 {
        out.mul_const(sched.folded_scale)
    } else {
        Ok(out)
    }
}

/// Maps `x` from `[0, B]` into `[-1, 1]` (one scalar multiplication).
pub fn map_input<E: ArithmeticElement>(x: &E, upper: f64) -> Result<E> {
    Ok(x.mul_const(2.0 / upper)?.add_const(-1.0))
}

/// `extra_scale * delta * sum beta_i T_i(2x/B - 1)` for a fitted plan; `delta`
/// and `extra_scale` are fused into the single trailing scalar multiplication.
pub fn eval_fitted<E: ArithmeticElement>(plan: &FittedPlan, x: &E, extra_scale: f64, sched: &PsSchedule) -> Result<E> {
    let u = map_input(x, plan.upper() as f64)?;
    let sched = sched.with_folded_scale(plan.delta() * extra_scale);
    eval_ps(plan.series(), &u, &sched)
}

/// Depth-minimizing schedule for a plan's degree.
pub fn schedule_for(plan: &FittedPlan) -> PsSchedule {
    PsSchedule::plan_min_depth(plan.degree())
}

/// Levels one [`eval_fitted`] call consumes: the input map, the recursion and
/// the trailing scale.
pub fn fitted_depth(plan: &FittedPlan, sched: &PsSchedule, extra_scale: f64) -> usize {
    let scale = usize::from(plan.delta() * extra_scale != 1.0);
    if plan.degree() == 0 {
        return 0;
    }
    1 + sched.with_folded_scale(1.0).depth() + scale
}

/// `e * 2^l` with `l` doublings; no multiplicative level is consumed.
pub fn mul_by_pow2_additively<E: ArithmeticElement>(e: &E, l: u32) -> Result<E> {
    if l > 24 {
        return Err(Error::AdditionGuard(l));
    }
    let mut acc = e.clone();
    for _ in 0..l {
        acc = double(&acc)?;
    }
    Ok(acc)
}

/// `e * factor` by double-and-add; no multiplicative level is consumed.
pub fn mul_by_int_additively<E: ArithmeticElement>(e: &E, factor: u64) -> Result<E> {
    if factor == 0 {
        return Ok(e.constant_like(0.0));
    }
    if factor > 1 << 24 {
        return Err(Error::AdditionGuard(64 - factor.leading_zeros()));
    }
    let mut result: Option<E> = None;
    let mut power = e.clone();
    let mut f = factor;
    loop {
        if f & 1 == 1 {
            result = Some(match result {
                None => power.clone(),
                Some(r) => r.add(&power)?,
            });
        }
        f >>= 1;
        if f == 0 {
            break;
        }
        power = double(&power)?;
    }
    Ok(result.expect("factor > 0"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheb::cheb_t;
    use crate::hesim::{SimParams, Simulator};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_series(rng: &mut ChaCha8Rng, degree: usize) -> ChebSeries {
        let coeffs = (0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect();
        ChebSeries::new(coeffs, 2.0).unwrap()
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(
            PsSchedule::plan(210),
            PsSchedule {
                k: 10,
                m: 5,
                folded_scale: 1.0
            }
        );
        assert_eq!(
            PsSchedule::plan(1),
            PsSchedule {
                k: 1,
                m: 1,
                folded_scale: 1.0
            }
        );
        assert_eq!(
            PsSchedule::plan(45),
            PsSchedule {
                k: 5,
                m: 4,
                folded_scale: 1.0
            }
        );
        for d in 1..600 {
            let s = PsSchedule::plan(d);
            assert!(s.capacity() >= d);
            let t = PsSchedule::plan_min_depth(d);
            assert!(t.capacity() >= d);
            assert!(t.depth() <= s.depth(), "degree {d}");
        }
    }

    #[test]
    fn min_depth_schedules() {
        assert_eq!(PsSchedule::plan_min_depth(210).k, 8);
        assert_eq!(PsSchedule::plan_min_depth(210).depth(), 8);
        assert_eq!(PsSchedule::plan_min_depth(90).depth(), 7);
    }

    #[test]
    fn power_basis_plaintext() {
        let sched = PsSchedule {
            k: 3,
            m: 2,
            folded_scale: 1.0,
        };
        let basis = compute_power_basis(&0.5, &sched).unwrap();
        let want = [0.5, -0.5, -1.0];
        for (b, w) in basis.bs.iter().zip(want) {
            assert!((b - w).abs() < 1e-15);
        }
        assert_eq!(basis.gs[0], basis.bs[2]);
        assert!((basis.gs[1] - cheb_t(6, 0.5).unwrap()).abs() < 1e-14);
        assert_eq!(basis.levels_consumed, None);
    }

    #[test]
    fn power_basis_on_simulator() {
        let sim = Simulator::new(SimParams::with_slots(64)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let us: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ct = sim.encrypt_real(&us).unwrap();
        let sched = PsSchedule {
            k: 10,
            m: 5,
            folded_scale: 1.0,
        };
        let basis = compute_power_basis(&ct, &sched).unwrap();
        for (i, b) in basis.bs.iter().enumerate() {
            for (slot, &u) in b.decrypt_real().iter().zip(&us) {
                assert!((slot - cheb_t(i + 1, u).unwrap()).abs() <= 1e-9);
            }
        }
        for (j, g) in basis.gs.iter().enumerate() {
            for (slot, &u) in g.decrypt_real().iter().zip(&us) {
                assert!((slot - cheb_t(10 << j, u).unwrap()).abs() <= 1e-9);
            }
        }
        // T_10 at depth 4, T_160 at depth 8.
        assert_eq!(basis.levels_consumed, Some(8));
    }

    #[test]
    fn division_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f: Vec<f64> = (0..=20).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..=6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (q, r) = divide_by_t(&f, 8);
        let (c, s) = divide(&f, &g);
        for t in 0..50 {
            let u = -1.0 + t as f64 / 25.0;
            let ev = |p: &[f64]| crate::cheb::clenshaw_unit(p, u);
            let lhs = ev(&f);
            assert!((ev(&q) * cheb_t(8, u).unwrap() + ev(&r) - lhs).abs() < 1e-10);
            assert!((ev(&c) * ev(&g) + ev(&s) - lhs).abs() < 1e-9);
        }
    }

    #[test]
    fn matches_clenshaw_small_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_series(&mut rng, 7);
        let sched = PsSchedule::plan(7);
        for _ in 0..50 {
            let u = rng.random_range(-1.0..=1.0);
            let got = eval_ps(&s, &u, &sched).unwrap();
            assert!((got - s.eval_unit(u).unwrap()).abs() <= 1e-10);
        }
    }

    #[test]
    fn constant_series_costs_nothing() {
        let sim = Simulator::new(SimParams::with_slots(8)).unwrap();
        let ct = sim.encrypt_real(&[0.3; 8]).unwrap();
        let s = ChebSeries::new(vec![0.25], 1.0).unwrap();
        let out = eval_ps(&s, &ct, &PsSchedule::plan(1)).unwrap();
        assert_eq!(out.level(), 25);
        assert!(out.decrypt_real().iter().all(|&v| v == 0.25));
        assert_eq!(sim.counts().mults(), 0);
    }

    #[test]
    fn degree_210_depth_on_simulator() {
        let sim = Simulator::new(SimParams::with_slots(16)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = random_series(&mut rng, 210);
        let us: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ct = sim.encrypt_real(&us).unwrap();
        for sched in [PsSchedule::plan(210), PsSchedule::plan_min_depth(210)] {
            let out = eval_ps(&s, &ct, &sched).unwrap();
            let consumed = 25 - out.level();
            assert_eq!(consumed, sched.depth());
            assert!(consumed <= 11);
            for (v, &u) in out.decrypt_real().iter().zip(&us) {
                assert!((v - s.eval_unit(u).unwrap()).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn levels_independent_of_slot_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = random_series(&mut rng, 90);
        let sched = PsSchedule::plan_min_depth(90);
        let mut levels = vec![];
        for trial in 0..3 {
            let sim = Simulator::new(SimParams::with_slots(8)).unwrap();
            let v: Vec<f64> = (0..8).map(|i| ((i * (trial + 1)) as f64 / 9.0).sin()).collect();
            let ct = sim.encrypt_real(&v).unwrap();
            levels.push(eval_ps(&s, &ct, &sched).unwrap().level());
        }
        assert!(levels.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn folded_scale_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = random_series(&mut rng, 40);
        let base = PsSchedule::plan(40);
        for _ in 0..20 {
            let u = rng.random_range(-1.0..=1.0);
            let one = eval_ps(&s, &u, &base).unwrap();
            let scaled = eval_ps(&s, &u, &base.with_folded_scale(25.0)).unwrap();
            assert!((scaled - 25.0 * one).abs() <= 1e-9);
        }
    }

    #[test]
    fn degree_overflow() {
        let s = ChebSeries::new(vec![0.1; 50], 1.0).unwrap();
        let sched = PsSchedule {
            k: 2,
            m: 3,
            folded_scale: 1.0,
        };
        assert!(matches!(eval_ps(&s, &0.2, &sched), Err(Error::DegreeOverflow { .. })));
    }

    #[test]
    fn level_exhaustion_propagates() {
        let params = SimParams {
            n: 4,
            max_level: 5,
            ..SimParams::default()
        };
        let sim = Simulator::new(params).unwrap();
        let ct = sim.encrypt_real(&[0.1; 4]).unwrap();
        let s = ChebSeries::new(vec![0.1; 100], 1.0).unwrap();
        let res = eval_ps(&s, &ct, &PsSchedule::plan(99));
        assert!(matches!(res, Err(Error::LevelExhausted { .. })));
    }

    #[test]
    fn additive_scaling() {
        let sim = Simulator::new(SimParams::with_slots(4)).unwrap();
        let ct = sim.encrypt_real(&[3.0, 1.0, 0.0, -2.0]).unwrap();
        let out = mul_by_pow2_additively(&ct, 2).unwrap();
        assert_eq!(out.decrypt_real(), vec![12.0, 4.0, 0.0, -8.0]);
        assert_eq!(out.level(), ct.level());
        assert_eq!(mul_by_pow2_additively(&ct, 0).unwrap().decrypt(), ct.decrypt());
        assert_eq!(mul_by_pow2_additively(&ct, 10).unwrap().level(), ct.level());
        assert!(matches!(mul_by_pow2_additively(&ct, 25), Err(Error::AdditionGuard(25))));
        let hundred = mul_by_int_additively(&ct, 100).unwrap();
        assert_eq!(hundred.decrypt_real(), vec![300.0, 100.0, 0.0, -200.0]);
        assert_eq!(hundred.level(), ct.level());
        assert_eq!(mul_by_int_additively(&7.0, 13).unwrap(), 91.0);
    }
}
