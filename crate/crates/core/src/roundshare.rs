//! Homomorphic rounding and conversion of additive secret shares.
//!
//! `Floor(x, p) = (x - ModP(x, p)) / p`, and Ceil/Round add an indicator on the
//! remainder. The indicator is a step function fitted at the integer points
//! `0..p`, since the remainder is (approximately) integral.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::{fit_modp_with, fit_step_with, DeltaChoice, FittedPlan, ModPlan, StepSpec};
use crate::hesim::SlotCiphertext;
use crate::psev::{eval_fitted, mul_by_int_additively, schedule_for, ArithmeticElement};

/// Degree of the comparison step fit over `[0, p - 1]`.
pub fn comparison_degree(p: u64) -> usize {
    3 * (p.max(2) as usize - 1)
}

/// Fits the indicator `r > threshold` on the integers `0..p`.
pub fn fit_comparison(p: u64, threshold: f64) -> Result<FittedPlan> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!(
            "comparison modulus must be >= 2, got {p}"
        )));
    }
    let spec = StepSpec::from_fn(p - 1, comparison_degree(p), |r| f64::from(r as f64 > threshold))?;
    fit_step_with(&spec, DeltaChoice::Default)
}

/// Worst deviation of a step fit from its integer targets over inputs within
/// `eps` of each integer.
pub fn comparison_tolerance_error(step: &FittedPlan, threshold: f64, eps: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for r in 0..=step.upper() {
        let want = f64::from(r as f64 > threshold);
        for x in [r as f64 - eps, r as f64, r as f64 + eps] {
            let x = x.clamp(0.0, step.upper() as f64);
            worst = worst.max((step.eval(x)? - want).abs());
        }
    }
    Ok(worst)
}

/// ModP plan plus the two comparison fits Ceil and Round need.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundingPlans {
    modp: ModPlan,
    ceil_step: FittedPlan,
    round_step: FittedPlan,
}

impl RoundingPlans {
    pub fn fit(p: u64, upper: u64, degree: usize, delta: DeltaChoice) -> Result<Self> {
        let modp = fit_modp_with(p, upper, degree, delta)?;
        Self::from_modp(modp)
    }

    pub fn from_modp(modp: ModPlan) -> Result<Self> {
        let p = modp.p();
        Ok(Self {
            ceil_step: fit_comparison(p, ceil_threshold())?,
            round_step: fit_comparison(p, round_threshold(p))?,
            modp,
        })
    }

    pub fn p(&self) -> u64 {
        self.modp.p()
    }

    pub fn modp(&self) -> &ModPlan {
        &self.modp
    }

    pub fn ceil_step(&self) -> &FittedPlan {
        &self.ceil_step
    }

    pub fn round_step(&self) -> &FittedPlan {
        &self.round_step
    }
}

pub fn ceil_threshold() -> f64 {
    0.5
}

/// `p/2 - 0.25`, so a remainder of exactly `p/2` rounds up.
pub fn round_threshold(p: u64) -> f64 {
    p as f64 / 2.0 - 0.25
}

/// `(remainder, floor)` sharing one ModP evaluation.
fn remainder_and_floor<E: ArithmeticElement>(x: &E, plan: &ModPlan) -> Result<(E, E)> {
    let p = plan.p();
    let inv = 1.0 / p as f64;
    let sched = schedule_for(plan.fit());
    let rem_over_p = eval_fitted(plan.fit(), x, inv, &sched)?;
    let floor = x.mul_const(inv)?.sub(&rem_over_p)?;
    let rem = mul_by_int_additively(&rem_over_p, p)?;
    Ok((rem, floor))
}

/// Slot-wise `floor(x / p)`.
pub fn floor_he<E: ArithmeticElement>(x: &E, plan: &ModPlan) -> Result<E> {
    Ok(remainder_and_floor(x, plan)?.1)
}

/// Approximately 1 where the integer in `r` exceeds the step's threshold.
pub fn comp_step<E: ArithmeticElement>(r: &E, step: &FittedPlan) -> Result<E> {
    let sched = schedule_for(step);
    eval_fitted(step, r, 1.0, &sched)
}

/// Slot-wise `ceil(x / p)`.
pub fn ceil_he<E: ArithmeticElement>(x: &E, plans: &RoundingPlans) -> Result<E> {
    let (rem, floor) = remainder_and_floor(x, &plans.modp)?;
    floor.add(&comp_step(&rem, &plans.ceil_step)?)
}

/// Slot-wise round-half-up of `x / p`.
pub fn round_he<E: ArithmeticElement>(x: &E, plans: &RoundingPlans) -> Result<E> {
    let (rem, floor) = remainder_and_floor(x, &plans.modp)?;
    floor.add(&comp_step(&rem, &plans.round_step)?)
}

/// Additive shares `x = sum s_i mod p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShareSet {
    p: u64,
    shares: Vec<Vec<i64>>,
}

impl ShareSet {
    pub fn new(p: u64, shares: Vec<Vec<i64>>) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidParameter(format!("share modulus must be >= 2, got {p}")));
        }
        if shares.is_empty() {
            return Err(Error::InvalidParameter("a share set needs at least one party".into()));
        }
        crate::packing::common_len(&shares)?;
        for (i, s) in shares.iter().enumerate() {
            crate::packing::check_layer(i, s, p)?;
        }
        Ok(Self { p, shares })
    }

    /// Uniform shares of uniform secrets.
    pub fn random(p: u64, parties: usize, len: usize, rng: &mut impl Rng) -> Result<Self> {
        let shares = (0..parties)
            .map(|_| (0..len).map(|_| rng.random_range(0..p as i64)).collect())
            .collect();
        Self::new(p, shares)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn parties(&self) -> usize {
        self.shares.len()
    }

    pub fn shares(&self) -> &[Vec<i64>] {
        &self.shares
    }

    pub fn secret(&self) -> Vec<i64> {
        let len = self.shares[0].len();
        (0..len)
            .map(|j| self.shares.iter().map(|s| s[j]).sum::<i64>().rem_euclid(self.p as i64))
            .collect()
    }

    /// One ciphertext per party.
    pub fn encrypt(&self, sim: &std::sync::Arc<crate::hesim::Simulator>) -> Result<Vec<SlotCiphertext>> {
        self.shares
            .iter()
            .map(|s| sim.encrypt_real(&s.iter().map(|&v| v as f64).collect::<Vec<_>>()))
            .collect()
    }
}

/// `32 ceil(2 (B + 1) / 32)` with `B = parties (p - 1)`: twice the input range,
/// rounded up to a multiple of 32.
pub fn share_plan_degree(parties: usize, p: u64) -> usize {
    let range = parties * (p as usize - 1) + 1;
    (2 * range).div_ceil(32) * 32
}

/// Fits the direct-reconstruction plan over `[0, parties (p - 1)]`.
pub fn fit_share_plan(parties: usize, p: u64, degree: usize) -> Result<ModPlan> {
    fit_modp_with(p, parties as u64 * (p - 1), degree, DeltaChoice::Default)
}

fn sum_all<E: ArithmeticElement>(items: &[E]) -> Result<E> {
    let (first, rest) = items
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("nothing to sum".into()))?;
    rest.iter().try_fold(first.clone(), |acc, e| acc.add(e))
}

fn mod_sum<E: ArithmeticElement>(items: &[E], max_sum: u64, plan: &ModPlan) -> Result<E> {
    if max_sum > plan.upper() {
        return Err(Error::IntervalOverflow {
            needed: max_sum,
            upper: plan.upper(),
        });
    }
    let sum = sum_all(items)?;
    let sched = schedule_for(plan.fit());
    eval_fitted(plan.fit(), &sum, 1.0, &sched)
}

/// `ModP(sum s_i, p)` in one step.
pub fn shares_to_ct<E: ArithmeticElement>(shares: &[E], plan: &ModPlan) -> Result<E> {
    mod_sum(shares, shares.len() as u64 * (plan.p() - 1), plan)
}

/// A reconstruction tree. Leaves are parties, taken left to right; every
/// internal node sums its children and reduces with its own plan.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructPlan {
    children: Vec<ReconstructPlan>,
    plan: Option<ModPlan>,
}

#[derive(Serialize, Deserialize)]
struct NodeSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<NodeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    plan_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    degree: Option<usize>,
}

impl ReconstructPlan {
    pub fn leaf() -> Self {
        Self {
            children: Vec::new(),
            plan: None,
        }
    }

    pub fn node(children: Vec<ReconstructPlan>, plan: ModPlan) -> Result<Self> {
        if children.is_empty() {
            return Err(Error::InvalidParameter("an internal node needs children".into()));
        }
        Ok(Self {
            children,
            plan: Some(plan),
        })
    }

    /// A single node over `parties` leaves.
    pub fn direct(parties: usize, p: u64, degree: usize) -> Result<Self> {
        Self::node(vec![Self::leaf(); parties], fit_share_plan(parties, p, degree)?)
    }

    /// A root over one subtree per group size, with every plan at `degree`.
    pub fn split(groups: &[usize], p: u64, degree: usize) -> Result<Self> {
        let children = groups
            .iter()
            .map(|&g| {
                if g == 1 {
                    Ok(Self::leaf())
                } else {
                    Self::direct(g, p, degree)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let root_max = groups.len() as u64 * (p - 1);
        Self::node(children, fit_modp_with(p, root_max, degree, DeltaChoice::Default)?)
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn children(&self) -> &[ReconstructPlan] {
        &self.children
    }

    pub fn plan(&self) -> Option<&ModPlan> {
        self.plan.as_ref()
    }

    pub fn parties(&self) -> usize {
        if self.is_leaf() {
            1
        } else {
            self.children.iter().map(Self::parties).sum()
        }
    }

    /// Number of ModP evaluations.
    pub fn mod_calls(&self) -> usize {
        usize::from(!self.is_leaf()) + self.children.iter().map(Self::mod_calls).sum::<usize>()
    }

    /// Parses nested `{"children": [...], "plan_file": ...}`. Nodes without a
    /// plan file are fitted on demand with their `degree`, or with
    /// [`share_plan_degree`] of their input range.
    pub fn from_json(s: &str, base: &Path, p: u64) -> Result<Self> {
        let spec: NodeSpec = serde_json::from_str(s)?;
        Self::from_spec(spec, base, p)
    }

    pub fn load(path: &Path, p: u64) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")), p)
    }

    fn from_spec(spec: NodeSpec, base: &Path, p: u64) -> Result<Self> {
        if spec.children.is_empty() {
            if spec.plan_file.is_some() {
                return Err(Error::InvalidParameter("a leaf cannot carry a plan".into()));
            }
            return Ok(Self::leaf());
        }
        let children = spec
            .children
            .into_iter()
            .map(|c| Self::from_spec(c, base, p))
            .collect::<Result<Vec<_>>>()?;
        let inputs = children.len();
        let plan = match spec.plan_file {
            Some(f) => ModPlan::load(&base.join(f))?,
            None => {
                let degree = spec.degree.unwrap_or_else(|| share_plan_degree(inputs, p));
                fit_modp_with(p, inputs as u64 * (p - 1), degree, DeltaChoice::Default)?
            }
        };
        if plan.p() != p {
            return Err(Error::MissingPlan(format!(
                "node plan reduces mod {}, expected {p}",
                plan.p()
            )));
        }
        Self::node(children, plan)
    }

    /// Writes every node plan under `dir` and returns the tree JSON referencing them.
    pub fn save(&self, dir: &Path) -> Result<String> {
        let mut counter = 0;
        let spec = self.to_spec(dir, &mut counter)?;
        Ok(serde_json::to_string_pretty(&spec)?)
    }

    fn to_spec(&self, dir: &Path, counter: &mut usize) -> Result<NodeSpec> {
        let plan_file = match &self.plan {
            Some(plan) => {
                let name = format!("node_{counter}.json");
                *counter += 1;
                plan.save(&dir.join(&name))?;
                Some(name)
            }
            None => None,
        };
        Ok(NodeSpec {
            children: self
                .children
                .iter()
                .map(|c| c.to_spec(dir, counter))
                .collect::<Result<_>>()?,
            plan_file,
            degree: None,
        })
    }

    fn eval<E: ArithmeticElement>(&self, shares: &mut std::slice::Iter<'_, E>) -> Result<E> {
        match &self.plan {
            None => shares
                .next()
                .cloned()
                .ok_or_else(|| Error::Shape("fewer shares than tree leaves".into())),
            Some(plan) => {
                let inputs = self
                    .children
                    .iter()
                    .map(|c| c.eval(shares))
                    .collect::<Result<Vec<_>>>()?;
                mod_sum(&inputs, inputs.len() as u64 * (plan.p() - 1), plan)
            }
        }
    }
}

/// Reconstructs through a [`ReconstructPlan`] tree.
pub fn shares_to_ct_tree<E: ArithmeticElement>(shares: &[E], tree: &ReconstructPlan) -> Result<E> {
    if shares.len() != tree.parties() {
        return Err(Error::Shape(format!(
            "tree has {} leaves, got {} shares",
            tree.parties(),
            shares.len()
        )));
    }
    tree.eval(&mut shares.iter())
}
