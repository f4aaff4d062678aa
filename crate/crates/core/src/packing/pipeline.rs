//! Compositions of packing stages.
//!
//! Each stage maps a list of vectors to a shorter list: `concat` joins groups of
//! vectors, `crt` and `bitstack` stack `d` integer vectors into one, and
//! `imgpair` merges two real vectors into one complex vector. Unpacking runs the
//! stages in reverse and uses a [`PackManifest`] recorded at packing time to drop
//! padding.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::{DeltaChoice, ModPlan};
use crate::hesim::SlotCiphertext;
use crate::packing::bitstack::{bitstack_pack, bitstack_unpack, BitStackLayout};
use crate::packing::concat::{vec_pack, vec_unpack, ConcatLayout};
use crate::packing::crt::{crt_pack, crt_unpack, CrtBasis};
use crate::packing::img::{img_pack, img_unpack};

/// Plan degree used when a stacking stage names neither plan files nor a degree:
/// `1.5 (B + 1)` rounded up to a multiple of ten.
pub fn default_plan_degree(upper: u64) -> usize {
    let d = (3 * (upper as usize + 1)).div_ceil(2);
    d.div_ceil(10) * 10
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stage {
    /// Consecutive input vectors are joined, one group per output.
    Concat(ConcatGrouping),
    Crt(CrtBasis),
    BitStack(BitStackLayout),
    ImgPair {
        n1: usize,
        n2: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConcatGrouping {
    /// The same layout repeated over the inputs.
    Cyclic(ConcatLayout),
    /// One explicit layout per output.
    Groups(Vec<ConcatLayout>),
}

impl ConcatGrouping {
    fn layouts_for(&self, inputs: usize) -> Result<Vec<ConcatLayout>> {
        let layouts: Vec<ConcatLayout> = match self {
            Self::Cyclic(l) => {
                let d = l.sizes().len();
                let mut v = vec![l.clone(); inputs / d];
                if !inputs.is_multiple_of(d) {
                    v.push(ConcatLayout::new(l.sizes()[..inputs % d].to_vec())?);
                }
                v
            }
            Self::Groups(g) => g.clone(),
        };
        let used: usize = layouts.iter().map(|l| l.sizes().len()).sum();
        if used != inputs {
            return Err(Error::Shape(format!(
                "concat stage groups {used} vectors but receives {inputs}"
            )));
        }
        Ok(layouts)
    }
}

impl Stage {
    /// Vectors consumed per output, or `None` for concat stages.
    fn arity(&self) -> Option<usize> {
        match self {
            Self::Concat(_) => None,
            Self::Crt(b) => Some(b.layers()),
            Self::BitStack(l) => Some(l.layers()),
            Self::ImgPair { .. } => Some(2),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Concat(_) => "concat",
            Self::Crt(_) => "crt",
            Self::BitStack(_) => "bitstack",
            Self::ImgPair { .. } => "imgpair",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct PackLayout {
    pub stages: Vec<Stage>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum StageSpec {
    Concat {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sizes: Option<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        groups: Option<Vec<Vec<usize>>>,
    },
    Crt {
        moduli: Vec<u64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        plan_files: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        degree: Option<usize>,
    },
    Bitstack {
        bit_widths: Vec<u32>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        plan_files: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        degree: Option<usize>,
    },
    Imgpair {
        n1: usize,
        n2: usize,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutSpec {
    stages: Vec<StageSpec>,
}

fn load_plans(files: &[String], base: &Path) -> Result<Vec<ModPlan>> {
    files.iter().map(|f| ModPlan::load(&base.join(f))).collect()
}

impl PackLayout {
    pub fn new(stages: Vec<Stage>) -> Self {
        Self { stages }
    }

    /// Parses the JSON layout; plan files are resolved against `base`.
    pub fn from_json(s: &str, base: &Path) -> Result<Self> {
        let spec: LayoutSpec = serde_json::from_str(s)?;
        let stages = spec
            .stages
            .into_iter()
            .map(|st| -> Result<Stage> {
                Ok(match st {
                    StageSpec::Concat { sizes, groups } => match (sizes, groups) {
                        (Some(s), None) => Stage::Concat(ConcatGrouping::Cyclic(ConcatLayout::new(s)?)),
                        (None, Some(g)) => Stage::Concat(ConcatGrouping::Groups(
                            g.into_iter().map(ConcatLayout::new).collect::<Result<_>>()?,
                        )),
                        _ => {
                            return Err(Error::InvalidParameter(
                                "concat stage needs exactly one of \"sizes\" or \"groups\"".into(),
                            ))
                        }
                    },
                    StageSpec::Crt {
                        moduli,
                        plan_files,
                        degree,
                    } => {
                        let basis = CrtBasis::new(moduli)?;
                        Stage::Crt(if plan_files.is_empty() {
                            let d = degree.unwrap_or_else(|| default_plan_degree(basis.product() - 1));
                            basis.fit_plans(d, DeltaChoice::Default)?
                        } else {
                            basis.with_plans(load_plans(&plan_files, base)?)?
                        })
                    }
                    StageSpec::Bitstack {
                        bit_widths,
                        plan_files,
                        degree,
                    } => {
                        let layout = BitStackLayout::from_bit_widths(&bit_widths)?;
                        Stage::BitStack(if plan_files.is_empty() {
                            let d = degree.unwrap_or_else(|| default_plan_degree(layout.plan_target(0).1));
                            layout.fit_plans(d, DeltaChoice::Default)?
                        } else {
                            layout.with_plans(load_plans(&plan_files, base)?)?
                        })
                    }
                    StageSpec::Imgpair { n1, n2 } => Stage::ImgPair { n1, n2 },
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { stages })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json(&text, base)
    }
}

/// Input vector lengths seen by each stage during packing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackManifest {
    pub stage_inputs: Vec<Vec<usize>>,
}

impl PackManifest {
    /// Lengths of the original vectors.
    pub fn original_lengths(&self) -> Option<&[usize]> {
        self.stage_inputs.first().map(Vec::as_slice)
    }
}

fn to_integers(layer: usize, v: &[f64]) -> Result<Vec<i64>> {
    v.iter()
        .enumerate()
        .map(|(index, &x)| {
            if (x - x.round()).abs() > 1e-9 || !x.is_finite() {
                Err(Error::Shape(format!(
                    "stacking stage needs integers, element {index} of vector {layer} is {x}"
                )))
            } else {
                Ok(x.round() as i64)
            }
        })
        .collect()
}

/// Groups `vectors` into chunks of `arity`, padding each chunk with zeros to a
/// common length and a full count.
fn chunks(vectors: &[Vec<f64>], arity: usize) -> Vec<Vec<Vec<f64>>> {
    vectors
        .chunks(arity)
        .map(|c| {
            let len = c.iter().map(Vec::len).max().unwrap_or(0);
            let mut out: Vec<Vec<f64>> = c
                .iter()
                .map(|v| {
                    let mut v = v.clone();
                    v.resize(len, 0.0);
                    v
                })
                .collect();
            out.resize(arity, vec![0.0; len]);
            out
        })
        .collect()
}

fn pack_stage(stage: &Stage, vectors: &[Vec<f64>], slots: usize) -> Result<Vec<Vec<f64>>> {
    match stage {
        Stage::Concat(g) => {
            let mut rest = vectors;
            g.layouts_for(vectors.len())?
                .iter()
                .map(|l| {
                    let (head, tail) = rest.split_at(l.sizes().len());
                    rest = tail;
                    let packed = vec_pack(head, l, slots)?;
                    Ok(packed[..l.total()].to_vec())
                })
                .collect()
        }
        Stage::Crt(basis) => chunks(vectors, basis.layers())
            .iter()
            .map(|c| {
                let ints = c
                    .iter()
                    .enumerate()
                    .map(|(i, v)| to_integers(i, v))
                    .collect::<Result<Vec<_>>>()?;
                Ok(crt_pack(&ints, basis)?.into_iter().map(|x| x as f64).collect())
            })
            .collect(),
        Stage::BitStack(layout) => chunks(vectors, layout.layers())
            .iter()
            .map(|c| {
                let ints = c
                    .iter()
                    .enumerate()
                    .map(|(i, v)| to_integers(i, v))
                    .collect::<Result<Vec<_>>>()?;
                Ok(bitstack_pack(&ints, layout)?.into_iter().map(|x| x as f64).collect())
            })
            .collect(),
        Stage::ImgPair { .. } => Err(Error::Shape("imgpair must be the last stage".into())),
    }
}

/// Packs `vectors` through every stage. Returns one slot vector per ciphertext
/// and the manifest needed to unpack.
pub fn pipeline_pack(
    vectors: &[Vec<f64>],
    layout: &PackLayout,
    slots: usize,
) -> Result<(Vec<Vec<Complex64>>, PackManifest)> {
    let mut current = vectors.to_vec();
    let mut manifest = PackManifest {
        stage_inputs: Vec::with_capacity(layout.stages.len()),
    };
    for (i, stage) in layout.stages.iter().enumerate() {
        manifest.stage_inputs.push(current.iter().map(Vec::len).collect());
        if let Stage::ImgPair { n1, n2 } = stage {
            if i + 1 != layout.stages.len() {
                return Err(Error::Shape("imgpair must be the last stage".into()));
            }
            let out = current
                .chunks(2)
                .map(|c| {
                    let b: &[f64] = c.get(1).map_or(&[], Vec::as_slice);
                    if c[0].len() > *n1 || b.len() > *n2 {
                        return Err(Error::Shape(format!(
                            "imgpair expects lengths <= ({n1}, {n2}), got ({}, {})",
                            c[0].len(),
                            b.len()
                        )));
                    }
                    check_slots(c[0].len().max(b.len()), slots)?;
                    Ok(img_pack(&c[0], b))
                })
                .collect::<Result<_>>()?;
            return Ok((out, manifest));
        }
        current = pack_stage(stage, &current, slots)?;
    }
    let out = current
        .into_iter()
        .map(|v| {
            check_slots(v.len(), slots)?;
            Ok(v.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
        })
        .collect::<Result<_>>()?;
    Ok((out, manifest))
}

fn check_slots(len: usize, slots: usize) -> Result<()> {
    if len > slots {
        return Err(Error::Capacity { len, slots });
    }
    Ok(())
}

/// Reverses [`pipeline_pack`] on ciphertexts; returns one ciphertext per original vector.
pub fn pipeline_unpack(
    cts: &[SlotCiphertext],
    layout: &PackLayout,
    manifest: &PackManifest,
    parallel: bool,
) -> Result<Vec<SlotCiphertext>> {
    if manifest.stage_inputs.len() != layout.stages.len() {
        return Err(Error::Shape(format!(
            "manifest covers {} stages, layout has {}",
            manifest.stage_inputs.len(),
            layout.stages.len()
        )));
    }
    let mut current = cts.to_vec();
    for (stage, inputs) in layout.stages.iter().zip(&manifest.stage_inputs).rev() {
        let want_outputs = match stage.arity() {
            Some(a) => inputs.len().div_ceil(a),
            None => match stage {
                Stage::Concat(g) => g.layouts_for(inputs.len())?.len(),
                _ => unreachable!(),
            },
        };
        if current.len() != want_outputs {
            return Err(Error::Shape(format!(
                "{} stage produced {want_outputs} vectors but {} ciphertexts were supplied",
                stage.kind(),
                current.len()
            )));
        }
        let mut next = Vec::with_capacity(inputs.len());
        match stage {
            Stage::Concat(g) => {
                for (ct, l) in current.iter().zip(g.layouts_for(inputs.len())?) {
                    next.extend(vec_unpack(ct, &l)?);
                }
            }
            Stage::Crt(basis) => {
                for ct in &current {
                    next.extend(crt_unpack(ct, basis, parallel)?);
                }
            }
            Stage::BitStack(l) => {
                for ct in &current {
                    next.extend(bitstack_unpack(ct, l)?);
                }
            }
            Stage::ImgPair { n1, n2 } => {
                for ct in &current {
                    let (a, b) = img_unpack(ct, *n1, *n2)?;
                    next.push(a);
                    next.push(b);
                }
            }
        }
        next.truncate(inputs.len());
        current = next;
    }
    Ok(current)
}
