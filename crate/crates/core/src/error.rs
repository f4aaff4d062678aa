use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("value {value} is outside the domain [{lower}, {upper}]")]
    Domain { value: f64, lower: f64, upper: f64 },

    #[error("linear system is rank deficient (condition estimate {condition:.3e})")]
    RankDeficient { condition: f64 },

    #[error("max |beta| = {max_beta:.4} is not below 1; the scaling factor delta = {delta} is too small")]
    DeltaTooSmall { max_beta: f64, delta: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series degree {degree} exceeds schedule capacity {capacity}")]
    DegreeOverflow { degree: usize, capacity: usize },

    #[error("multiplicative level exhausted (needed {needed}, have {available})")]
    LevelExhausted { needed: usize, available: usize },

    #[error("message of length {len} does not fit in {slots} slots")]
    Capacity { len: usize, slots: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("element {index} of layer {layer} is {value}, outside [0, {bound})")]
    OutOfRange {
        layer: usize,
        index: usize,
        value: i64,
        bound: u64,
    },

    #[error("input range [0, {needed}] exceeds plan interval [0, {upper}]")]
    IntervalOverflow { needed: u64, upper: u64 },

    #[error("missing plan: {0}")]
    MissingPlan(String),

    #[error("addition chain guard: exponent {0} exceeds 24")]
    AdditionGuard(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
