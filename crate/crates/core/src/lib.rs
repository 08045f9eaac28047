//! Piecewise-polynomial approximation of bounded functions, evaluated
//! privately between two semi-honest parties.
//!
//! The pipeline quantizes a real function onto an integer grid, partitions
//! the domain by bisection into power-of-two segments with per-segment
//! polynomial fits, converts the coefficients to a fixed-point integer
//! representation, and evaluates the result either entirely inside a
//! garbled circuit or with a hybrid of garbled circuits and Paillier
//! encryption. An analytic cost model mirrors the communication and
//! computation accounting of both protocols.
//!
//! The numeric core is generic over the scalar type (see [`real::Real`]);
//! `f64` aliases for the main types are exported below.

pub mod account;
pub mod circuit;
pub mod encode;
pub mod garble;
pub mod ot;
pub mod paillier;
pub mod partition;
pub mod protocol;
pub mod quantize;
pub mod real;
pub mod transport;
pub(crate) mod util;

pub use encode::{
    amplified_value, compute_bitwidths, encode_plan, quantize_coeffs, reference_eval,
    reference_eval_raw, ApproxPlan, BitWidthPlan,
};
pub use partition::{bisect, FitKind, PartitionTree, Segment};
pub use quantize::{descale_output, quantize_function, FunctionSpec, QuantizedTable};
pub use real::Real;

/// `f64` instantiations of the pipeline types.
pub type FunctionSpec64 = FunctionSpec<f64>;
pub type QuantizedTable64 = QuantizedTable<f64>;
pub type PartitionTree64 = PartitionTree<f64>;
pub type ApproxPlan64 = ApproxPlan<f64>;

/// `f32` instantiations, for callers that fit with single precision.
pub type FunctionSpec32 = FunctionSpec<f32>;
pub type QuantizedTable32 = QuantizedTable<f32>;
pub type PartitionTree32 = PartitionTree<f32>;
pub type ApproxPlan32 = ApproxPlan<f32>;
