//! Integer-point Chebyshev fits.
//!
//! A target is only pinned at the integers `0..=B`; with `D > B` the collocation
//! system is underdetermined and we take its minimum-norm solution. Coefficients
//! are then divided by a scaling factor `delta` so every `|beta_i| < 1`, and the
//! approximation is `delta * sum beta_i T_i(2x/B - 1)`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cheb::{cheb_t_all, map_to_unit, ChebSeries};
use crate::error::{Error, Result};

/// Gram-matrix condition numbers above this are treated as rank deficient.
pub const MAX_GRAM_CONDITION: f64 = 1e14;

/// Headroom used when `delta` is picked automatically.
pub const DEFAULT_HEADROOM: f64 = 0.5;

/// Integer sample points of a step function over `[0, upper]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepSpec {
    samples: Vec<(u64, f64)>,
    upper: u64,
    degree: usize,
}

impl StepSpec {
    pub fn new(samples: Vec<(u64, f64)>, upper: u64, degree: usize) -> Result<Self> {
        if upper == 0 {
            return Err(Error::InvalidParameter("interval upper bound must be > 0".into()));
        }
        if samples.is_empty() {
            return Err(Error::InvalidParameter("a step fit needs samples".into()));
        }
        let mut xs: Vec<u64> = samples.iter().map(|s| s.0).collect();
        xs.sort_unstable();
        if xs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("sample abscissae must be distinct".into()));
        }
        if let Some(&x) = xs.iter().find(|&&x| x > upper) {
            return Err(Error::Domain {
                value: x as f64,
                lower: 0.0,
                upper: upper as f64,
            });
        }
        if degree + 1 < samples.len() {
            return Err(Error::InvalidParameter(format!(
                "degree {degree} is too small for {} samples",
                samples.len()
            )));
        }
        Ok(Self { samples, upper, degree })
    }

    /// Samples `(i, i mod p)` for every integer `i` in `[0, upper]`.
    pub fn modp(p: u64, upper: u64, degree: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidParameter(format!("modulus must be >= 2, got {p}")));
        }
        let samples = (0..=upper).map(|i| (i, (i % p) as f64)).collect();
        Self::new(samples, upper, degree)
    }

    /// Samples of `f` at every integer in `[0, upper]`.
    pub fn from_fn(upper: u64, degree: usize, f: impl Fn(u64) -> f64) -> Result<Self> {
        Self::new((0..=upper).map(|i| (i, f(i))).collect(), upper, degree)
    }

    pub fn samples(&self) -> &[(u64, f64)] {
        &self.samples
    }

    pub fn upper(&self) -> u64 {
        self.upper
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
}

/// Collocation system: `A[j][i] = T_i(2 x_j / B - 1)`, `y[j] = y_j`.
pub fn build_system(spec: &StepSpec) -> (DMatrix<f64>, DVector<f64>) {
    let rows = spec.samples.len();
    let cols = spec.degree + 1;
    let mut a = DMatrix::zeros(rows, cols);
    let mut y = DVector::zeros(rows);
    for (j, &(x, target)) in spec.samples.iter().enumerate() {
        // x was range-checked by StepSpec::new.
        let u = map_to_unit(x as f64, spec.upper as f64).expect("sample inside interval");
        let ts = cheb_t_all(spec.degree, u).expect("mapped point inside [-1, 1]");
        for (i, t) in ts.into_iter().enumerate() {
            a[(j, i)] = t;
        }
        y[j] = target;
    }
    (a, y)
}

/// Minimum-norm solution of the full-row-rank system `A x = y`,
/// computed as `A^T (A A^T)^{-1} y` with a Cholesky factorization of the Gram matrix.
pub fn solve_min_norm(a: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    if a.nrows() != y.len() {
        return Err(Error::Shape(format!(
            "matrix has {} rows but right-hand side has {} entries",
            a.nrows(),
            y.len()
        )));
    }
    if a.nrows() > a.ncols() {
        return Err(Error::RankDeficient {
            condition: f64::INFINITY,
        });
    }
    let gram = a * a.transpose();
    let chol = gram.cholesky().ok_or(Error::RankDeficient {
        condition: f64::INFINITY,
    })?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), d| {
        (lo.min(d.abs()), hi.max(d.abs()))
    });
    // cond(G) >= (max l_ii / min l_ii)^2 for G = L L^T.
    let condition = (hi / lo).powi(2);
    if !condition.is_finite() || condition > MAX_GRAM_CONDITION {
        return Err(Error::RankDeficient { condition });
    }
    let z = chol.solve(y);
    Ok(a.transpose() * z)
}

/// Smallest power of ten `delta` with `max |alpha_i| / delta <= headroom`.
pub fn suggest_delta(alpha: &[f64], headroom: f64) -> Result<f64> {
    if alpha.is_empty() {
        return Err(Error::InvalidParameter("empty coefficient vector".into()));
    }
    if !(headroom > 0.0 && headroom < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "headroom must be in (0, 1), got {headroom}"
        )));
    }
    let max = alpha.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
    let mut exp = 0_i32;
    while max / 10f64.powi(exp) > headroom {
        exp += 1;
    }
    Ok(10f64.powi(exp))
}

/// A scaled Chebyshev fit over `[0, B]`: `delta * sum beta_i T_i(2x/B - 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FittedPlan {
    upper: u64,
    delta: f64,
    residual: f64,
    series: ChebSeries,
}

impl FittedPlan {
    pub fn upper(&self) -> u64 {
        self.upper
    }

    pub fn degree(&self) -> usize {
        self.series.degree()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Max integer-point deviation recorded when the plan was fitted.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// The scaled coefficients `beta`.
    pub fn series(&self) -> &ChebSeries {
        &self.series
    }

    /// `delta * sum beta_i T_i(2x/B - 1)` in plaintext.
    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.delta * self.series.eval_clenshaw(x)?)
    }
}

fn fit_alpha(spec: &StepSpec) -> Result<Vec<f64>> {
    let (a, y) = build_system(spec);
    Ok(solve_min_norm(&a, &y)?.iter().copied().collect())
}

fn finish(spec: &StepSpec, alpha: Vec<f64>, delta: f64) -> Result<FittedPlan> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let beta: Vec<f64> = alpha.iter().map(|a| a / delta).collect();
    let series = ChebSeries::new(beta, spec.upper as f64)?;
    let max_beta = series.max_abs_coeff();
    if max_beta >= 1.0 {
        return Err(Error::DeltaTooSmall { max_beta, delta });
    }
    let mut residual: f64 = 0.0;
    for &(x, y) in &spec.samples {
        residual = residual.max((delta * series.eval_clenshaw(x as f64)? - y).abs());
    }
    Ok(FittedPlan {
        upper: spec.upper,
        delta,
        residual,
        series,
    })
}

/// Fits arbitrary integer-point targets.
pub fn fit_step(spec: &StepSpec, delta: f64) -> Result<FittedPlan> {
    let alpha = fit_alpha(spec)?;
    finish(spec, alpha, delta)
}

/// How to pick the scaling factor of a fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DeltaChoice {
    Fixed(f64),
    /// Smallest power of ten leaving `max |beta| <= headroom`.
    Suggest {
        headroom: f64,
    },
    /// 1000 for degree-35 fits on `[0, 29]`, 100 otherwise; falls back to
    /// [`DeltaChoice::Suggest`] when 100 leaves a coefficient at or above 1.
    Default,
}

fn default_delta(upper: u64, degree: usize) -> f64 {
    if upper == 29 && degree == 35 {
        1000.0
    } else {
        100.0
    }
}

/// Fits a step spec with a [`DeltaChoice`].
pub fn fit_step_with(spec: &StepSpec, choice: DeltaChoice) -> Result<FittedPlan> {
    let alpha = fit_alpha(spec)?;
    match choice {
        DeltaChoice::Fixed(delta) => finish(spec, alpha, delta),
        DeltaChoice::Suggest { headroom } => {
            let delta = suggest_delta(&alpha, headroom)?;
            finish(spec, alpha, delta)
        }
        DeltaChoice::Default => {
            let delta = default_delta(spec.upper, spec.degree);
            match finish(spec, alpha.clone(), delta) {
                Err(Error::DeltaTooSmall { .. }) => {
                    let delta = suggest_delta(&alpha, DEFAULT_HEADROOM)?;
                    finish(spec, alpha, delta)
                }
                other => other,
            }
        }
    }
}

/// A fitted approximation of `x mod p` over the integers of `[0, B]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModPlan {
    p: u64,
    fit: FittedPlan,
}

/// Fits `ModP(x, p)` over `[0, upper]` with a degree-`degree` Chebyshev series.
pub fn fit_modp(p: u64, upper: u64, degree: usize, delta: f64) -> Result<ModPlan> {
    fit_modp_with(p, upper, degree, DeltaChoice::Fixed(delta))
}

pub fn fit_modp_with(p: u64, upper: u64, degree: usize, choice: DeltaChoice) -> Result<ModPlan> {
    if degree as u64 <= upper {
        return Err(Error::InvalidParameter(format!(
            "degree {degree} must exceed the interval bound {upper}"
        )));
    }
    let spec = StepSpec::modp(p, upper, degree)?;
    let fit = fit_step_with(&spec, choice)?;
    Ok(ModPlan { p, fit })
}

impl ModPlan {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn fit(&self) -> &FittedPlan {
        &self.fit
    }

    pub fn upper(&self) -> u64 {
        self.fit.upper
    }

    pub fn degree(&self) -> usize {
        self.fit.degree()
    }

    pub fn delta(&self) -> f64 {
        self.fit.delta
    }

    pub fn residual(&self) -> f64 {
        self.fit.residual
    }

    pub fn series(&self) -> &ChebSeries {
        &self.fit.series
    }

    /// Plaintext mean of `|approx(i) - i mod p|` over the integers of `[0, B]`.
    pub fn mean_integer_error(&self) -> f64 {
        let total: f64 = (0..=self.upper())
            .map(|i| (self.fit.eval(i as f64).unwrap() - (i % self.p) as f64).abs())
            .sum();
        total / (self.upper() + 1) as f64
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PlanFile::from_fit(Some(self.p), &self.fit)).expect("plan serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: PlanFile = serde_json::from_str(s)?;
        let p = file
            .p
            .ok_or_else(|| Error::InvalidParameter("plan file has no modulus \"p\"".into()))?;
        Ok(Self {
            p,
            fit: file.into_fit()?,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl FittedPlan {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PlanFile::from_fit(None, self)).expect("plan serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<PlanFile>(s)?.into_fit()
    }
}

/// On-disk plan artifact.
#[derive(Serialize, Deserialize)]
struct PlanFile {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    p: Option<u64>,
    #[serde(rename = "B")]
    upper: u64,
    #[serde(rename = "D")]
    degree: usize,
    delta: f64,
    residual: f64,
    coeffs: Vec<f64>,
}

impl PlanFile {
    fn from_fit(p: Option<u64>, fit: &FittedPlan) -> Self {
        Self {
            p,
            upper: fit.upper,
            degree: fit.degree(),
            delta: fit.delta,
            residual: fit.residual,
            coeffs: fit.series.coeffs().to_vec(),
        }
    }

    fn into_fit(self) -> Result<FittedPlan> {
        if self.coeffs.len() != self.degree + 1 {
            return Err(Error::Shape(format!(
                "plan declares degree {} but carries {} coefficients",
                self.degree,
                self.coeffs.len()
            )));
        }
        if !(self.delta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        Ok(FittedPlan {
            upper: self.upper,
            delta: self.delta,
            residual: self.residual,
            series: ChebSeries::new(self.coeffs, self.upper as f64)?,
        })
    }
}
