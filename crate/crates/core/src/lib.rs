//! Full-range polynomial approximation of `x mod p` on small integers and the
//! CKKS packing schemes built on it.
//!
//! * [`cheb`]: Chebyshev basis and Clenshaw evaluation.
//! * [`fitting`]: minimum-norm integer-point fits with coefficient scaling.
//! * [`psev`]: Paterson–Stockmeyer evaluation over any [`psev::ArithmeticElement`].
//! * [`hesim`]: slot-semantics CKKS simulator with level accounting.
//! * [`packing`]: VecConcat, ImgConcat, BitStack and CRTStack, plus pipelines.
//! * [`roundshare`]: homomorphic floor/ceil/round and secret-share conversion.
//! * [`tables`]: the error and depth tables with their checked bounds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cheb;
pub mod error;
pub mod fitting;
pub mod hesim;
pub mod packing;
pub mod psev;
pub mod roundshare;
pub mod tables;

pub use cheb::ChebSeries;
pub use error::{Error, Result};
pub use fitting::{fit_modp, fit_step, DeltaChoice, FittedPlan, ModPlan, StepSpec};
pub use hesim::{OpCounts, SimParams, Simulator, SlotCiphertext};
pub use num_complex::Complex64;
pub use psev::{eval_ps, ArithmeticElement, PsSchedule};
