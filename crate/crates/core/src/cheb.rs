//! First-kind Chebyshev polynomials on `[0, B]`.
//!
//! Inputs are mapped into `[-1, 1]` with `u = 2x/B - 1`. Values that land within
//! [`UNIT_SLACK`] of the unit interval are clamped, since mapped endpoints pick up
//! rounding error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for `|u| > 1` before [`cheb_t`] reports a domain error.
pub const UNIT_SLACK: f64 = 1e-12;

/// Tolerance for `x` outside `[0, B]` in [`map_to_unit`].
pub const SOURCE_SLACK: f64 = 1e-9;

/// `T_n(u)` by the three-term recurrence `T_n = 2u T_{n-1} - T_{n-2}`.
pub fn cheb_t(n: usize, u: f64) -> Result<f64> {
    let u = clamp_unit(u)?;
    Ok(cheb_t_unchecked(n, u))
}

pub(crate) fn cheb_t_unchecked(n: usize, u: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => u,
        _ => {
            let (mut prev, mut cur) = (1.0, u);
            for _ in 1..n {
                let next = 2.0 * u * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// All of `T_0(u) ..= T_degree(u)`.
pub fn cheb_t_all(degree: usize, u: f64) -> Result<Vec<f64>> {
    let u = clamp_unit(u)?;
    let mut out = Vec::with_capacity(degree + 1);
    out.push(1.0);
    if degree >= 1 {
        out.push(u);
    }
    for i in 2..=degree {
        out.push(2.0 * u * out[i - 1] - out[i - 2]);
    }
    Ok(out)
}

fn clamp_unit(u: f64) -> Result<f64> {
    if !u.is_finite() || u.abs() > 1.0 + UNIT_SLACK {
        return Err(Error::Domain {
            value: u,
            lower: -1.0,
            upper: 1.0,
        });
    }
    Ok(u.clamp(-1.0, 1.0))
}

/// Affine map `[0, B] -> [-1, 1]`, `x -> 2x/B - 1`.
pub fn map_to_unit(x: f64, upper: f64) -> Result<f64> {
    if !(upper > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "domain upper bound must be positive, got {upper}"
        )));
    }
    if !x.is_finite() || x < -SOURCE_SLACK || x > upper + SOURCE_SLACK {
        return Err(Error::Domain {
            value: x,
            lower: 0.0,
            upper,
        });
    }
    Ok((2.0 * x / upper - 1.0).clamp(-1.0, 1.0))
}

/// A first-kind Chebyshev expansion `sum c_i T_i(2x/B - 1)` over `[0, B]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebSeries {
    coeffs: Vec<f64>,
    domain_upper: f64,
}

impl ChebSeries {
    pub fn new(coeffs: Vec<f64>, domain_upper: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter(
                "a Chebyshev series needs at least one coefficient".into(),
            ));
        }
        if !(domain_upper > 0.0) || !domain_upper.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "domain upper bound must be positive, got {domain_upper}"
            )));
        }
        Ok(Self { coeffs, domain_upper })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn domain_upper(&self) -> f64 {
        self.domain_upper
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Same expansion with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            domain_upper: self.domain_upper,
        }
    }

    /// Evaluates at `x` in the source domain `[0, B]` with the Clenshaw recurrence.
    pub fn eval_clenshaw(&self, x: f64) -> Result<f64> {
        let u = map_to_unit(x, self.domain_upper)?;
        Ok(clenshaw_unit(&self.coeffs, u))
    }

    /// Evaluates at an already-mapped point `u` in `[-1, 1]`.
    pub fn eval_unit(&self, u: f64) -> Result<f64> {
        let u = clamp_unit(u)?;
        Ok(clenshaw_unit(&self.coeffs, u))
    }
}

/// Clenshaw backward recurrence for `sum c_i T_i(u)`.
pub(crate) fn clenshaw_unit(coeffs: &[f64], u: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * u * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + u * b1 - b2
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trig(n: usize, u: f64) -> f64 {
        (n as f64 * u.acos()).cos()
    }

    #[test]
    fn low_order_values() {
        assert_eq!(cheb_t(0, 0.3).unwrap(), 1.0);
        assert_eq!(cheb_t(1, 0.3).unwrap(), 0.3);
        assert!((cheb_t(5, 0.7).unwrap() - trig(5, 0.7)).abs() <= 1e-12);
    }

    #[test]
    fn domain_checks() {
        assert!(cheb_t(3, 1.0 + 1e-13).is_ok());
        assert!(matches!(cheb_t(3, 1.0 + 1e-9), Err(Error::Domain { .. })));
        assert!(matches!(cheb_t(3, f64::NAN), Err(Error::Domain { .. })));
        assert!(map_to_unit(-1e-3, 29.0).is_err());
        assert!(map_to_unit(29.0 + 1e-3, 29.0).is_err());
        assert!(map_to_unit(1.0, 0.0).is_err());
    }

    #[test]
    fn endpoints_map() {
        assert_eq!(map_to_unit(0.0, 29.0).unwrap(), -1.0);
        assert_eq!(map_to_unit(29.0, 29.0).unwrap(), 1.0);
        assert_eq!(map_to_unit(14.5, 29.0).unwrap(), 0.0);
    }

    #[test]
    fn recurrence_matches_trig_on_grid() {
        let mut worst: f64 = 0.0;
        for n in 0..=64 {
            for j in 0..=2000 {
                let u = -1.0 + j as f64 * 1e-3;
                worst = worst.max((cheb_t(n, u).unwrap() - trig(n, u)).abs());
            }
        }
        assert!(worst <= 1e-10, "worst deviation {worst:e}");
    }

    #[test]
    fn product_identity() {
        for m in 0..=20 {
            for n in 0..=20 {
                for j in (0..=2000).step_by(7) {
                    let u = -1.0 + j as f64 * 1e-3;
                    let lhs = 2.0 * cheb_t(m, u).unwrap() * cheb_t(n, u).unwrap();
                    let rhs = cheb_t(m + n, u).unwrap() + cheb_t(m.abs_diff(n), u).unwrap();
                    assert!((lhs - rhs).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn cheb_t_all_agrees() {
        let all = cheb_t_all(30, -0.41).unwrap();
        for (n, v) in all.iter().enumerate() {
            assert!((v - cheb_t(n, -0.41).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn clenshaw_trivial_series() {
        let s = ChebSeries::new(vec![5.0], 3.0).unwrap();
        assert_eq!(s.eval_clenshaw(1.7).unwrap(), 5.0);
        let s = ChebSeries::new(vec![0.0, 1.0], 2.0).unwrap();
        assert_eq!(s.eval_clenshaw(2.0).unwrap(), 1.0);
        assert!(ChebSeries::new(vec![], 1.0).is_err());
        assert!(ChebSeries::new(vec![1.0], -1.0).is_err());
    }

    fn term_sum(coeffs: &[f64], u: f64) -> f64 {
        coeffs.iter().enumerate().map(|(i, c)| c * cheb_t(i, u).unwrap()).sum()
    }

    #[test]
    fn clenshaw_matches_term_by_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let coeffs: Vec<f64> = (0..=20).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = ChebSeries::new(coeffs.clone(), 29.0).unwrap();
        for _ in 0..100 {
            let x = rng.random_range(0.0..=29.0);
            let u = map_to_unit(x, 29.0).unwrap();
            assert!((s.eval_clenshaw(x).unwrap() - term_sum(&coeffs, u)).abs() <= 1e-11);
        }
    }

    #[test]
    fn clenshaw_high_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let coeffs: Vec<f64> = (0..=512).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = ChebSeries::new(coeffs.clone(), 1.0).unwrap();
        for _ in 0..50 {
            let u = rng.random_range(-1.0..=1.0);
            assert!((s.eval_unit(u).unwrap() - term_sum(&coeffs, u)).abs() <= 1e-11);
        }
    }
}
