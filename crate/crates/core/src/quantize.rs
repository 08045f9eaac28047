//! Mapping of a bounded real function onto the integer grid the secure
//! protocols work with.
//!
//! The input domain `[x_a, x_b)` is sampled at `2^lx` equally spaced points
//! (left edge of each cell) and the output is scaled to `[0, 2^ly)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real::{pow2, Real};

/// Smallest / largest supported bit length for inputs and outputs.
pub const MIN_BITS: u8 = 2;
pub const MAX_BITS: u8 = 24;

#[derive(Debug, Error)]
pub enum QuantizeError {
    #[error("invalid bounds: {0}")]
    InvalidBounds(&'static str),
    #[error("bit length {0} outside supported range {MIN_BITS}..={MAX_BITS}")]
    BitLengthOutOfRange(u8),
    #[error("empty sample table")]
    EmptyTable,
    #[error("f(x)={value} at sample {index} (x={x}) falls outside the codomain [{y_a}, {y_b})")]
    CodomainViolation {
        index: u32,
        x: f64,
        value: f64,
        y_a: f64,
        y_b: f64,
    },
}

#[derive(Clone)]
enum Evaluator<R: Real> {
    Closure(Arc<dyn Fn(R) -> R + Send + Sync>),
    /// Dense samples over `[x_a, x_b)`, uniform spacing, nearest-cell lookup.
    Samples(Arc<[R]>),
}

/// A bounded real function together with the grid parameters.
#[derive(Clone)]
pub struct FunctionSpec<R: Real> {
    evaluator: Evaluator<R>,
    pub x_a: R,
    pub x_b: R,
    pub y_a: R,
    pub y_b: R,
    pub lx: u8,
    pub ly: u8,
}

impl<R: Real> FunctionSpec<R> {
    pub fn new(
        f: impl Fn(R) -> R + Send + Sync + 'static,
        (x_a, x_b): (R, R),
        (y_a, y_b): (R, R),
        lx: u8,
        ly: u8,
    ) -> Result<Self, QuantizeError> {
        Self::build(Evaluator::Closure(Arc::new(f)), (x_a, x_b), (y_a, y_b), lx, ly)
    }

    /// Function given as a dense sample table over `[x_a, x_b)`.
    pub fn from_samples(
        samples: Vec<R>,
        (x_a, x_b): (R, R),
        (y_a, y_b): (R, R),
        lx: u8,
        ly: u8,
    ) -> Result<Self, QuantizeError> {
        if samples.is_empty() {
            return Err(QuantizeError::EmptyTable);
        }
        Self::build(Evaluator::Samples(samples.into()), (x_a, x_b), (y_a, y_b), lx, ly)
    }

    /// The canonical demo function: `sinc(x) = sin(pi x) / (pi x)` on `[0, 10)`.
    ///
    /// The codomain floor is the smallest sampled value; the (exclusive)
    /// ceiling sits one quantization step above the largest sampled value so
    /// the maximum lands on the top code.
    pub fn sinc(lx: u8, ly: u8) -> Result<Self, QuantizeError> {
        check_bits(lx)?;
        check_bits(ly)?;
        let n = 1u32 << lx;
        let x_b = R::from_f64_lossy(10.0);
        let q_x = pow2::<R>(lx) / x_b;
        let mut y_min = R::infinity();
        let mut y_max = R::neg_infinity();
        for i in 0..n {
            let y = sinc_value(R::from_u32(i).unwrap() / q_x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
        let top = R::from_u64((1u64 << ly) - 1).unwrap();
        let y_b = y_max + (y_max - y_min) / top;
        Self::new(sinc_value, (R::zero(), x_b), (y_min, y_b), lx, ly)
    }

    fn build(
        evaluator: Evaluator<R>,
        (x_a, x_b): (R, R),
        (y_a, y_b): (R, R),
        lx: u8,
        ly: u8,
    ) -> Result<Self, QuantizeError> {
        check_bits(lx)?;
        check_bits(ly)?;
        if x_a.partial_cmp(&x_b) != Some(std::cmp::Ordering::Less)
            || !x_a.is_finite()
            || !x_b.is_finite()
        {
            return Err(QuantizeError::InvalidBounds("x_a < x_b required"));
        }
        if y_a.partial_cmp(&y_b) != Some(std::cmp::Ordering::Less)
            || !y_a.is_finite()
            || !y_b.is_finite()
        {
            return Err(QuantizeError::InvalidBounds("y_a < y_b required"));
        }
        Ok(Self { evaluator, x_a, x_b, y_a, y_b, lx, ly })
    }

    /// Input scale `q_x = 2^lx / (x_b - x_a)`.
    pub fn q_x(&self) -> R {
        pow2::<R>(self.lx) / (self.x_b - self.x_a)
    }

    /// Output scale `q_y = 2^ly / (y_b - y_a)`.
    pub fn q_y(&self) -> R {
        pow2::<R>(self.ly) / (self.y_b - self.y_a)
    }

    pub fn eval(&self, x: R) -> R {
        match &self.evaluator {
            Evaluator::Closure(f) => f(x),
            Evaluator::Samples(s) => {
                let rel = (x - self.x_a) / (self.x_b - self.x_a);
                let idx = (rel * R::from_usize(s.len()).unwrap())
                    .floor()
                    .to_usize()
                    .unwrap_or(0)
                    .min(s.len() - 1);
                s[idx]
            }
        }
    }
}

pub fn sinc_value<R: Real>(x: R) -> R {
    if x == R::zero() {
        R::one()
    } else {
        let pi_x = R::from_f64_lossy(std::f64::consts::PI) * x;
        pi_x.sin() / pi_x
    }
}

/// The discretized function: `2^lx` codes, each in `[0, 2^ly)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct QuantizedTable<R: Real> {
    pub lx: u8,
    pub ly: u8,
    #[serde(rename = "xa")]
    pub x_a: R,
    #[serde(rename = "xb")]
    pub x_b: R,
    #[serde(rename = "ya")]
    pub y_a: R,
    #[serde(rename = "yb")]
    pub y_b: R,
    pub values: Vec<u32>,
    /// How many samples rounded to `2^ly` and were clamped to the top code.
    #[serde(skip)]
    pub clamped_top: u32,
}

impl<R: Real> QuantizedTable<R> {
    pub fn q_x(&self) -> R {
        pow2::<R>(self.lx) / (self.x_b - self.x_a)
    }

    pub fn q_y(&self) -> R {
        pow2::<R>(self.ly) / (self.y_b - self.y_a)
    }

    /// Real x coordinate sampled for code `i` (left edge of the cell).
    pub fn sample_x(&self, i: u32) -> R {
        R::from_u32(i).unwrap() / self.q_x() + self.x_a
    }
}

/// Builds the integer table `f̂` from a function spec.
///
/// `values[i] = clamp(round(q_y (f(i/q_x + x_a) - y_a)), 0, 2^ly - 1)`,
/// rounding half away from zero.
pub fn quantize_function<R: Real>(spec: &FunctionSpec<R>) -> Result<QuantizedTable<R>, QuantizeError> {
    let n = 1u32 << spec.lx;
    let q_x = spec.q_x();
    let q_y = spec.q_y();
    let top = (1u32 << spec.ly) - 1;
    let mut values = Vec::with_capacity(n as usize);
    let mut clamped_top = 0;
    for i in 0..n {
        let x = R::from_u32(i).unwrap() / q_x + spec.x_a;
        let y = spec.eval(x);
        if !(y >= spec.y_a && y < spec.y_b) {
            return Err(QuantizeError::CodomainViolation {
                index: i,
                x: x.to_f64().unwrap_or(f64::NAN),
                value: y.to_f64().unwrap_or(f64::NAN),
                y_a: spec.y_a.to_f64().unwrap_or(f64::NAN),
                y_b: spec.y_b.to_f64().unwrap_or(f64::NAN),
            });
        }
        let code = (q_y * (y - spec.y_a)).round_half_away();
        let code = code.to_u32().unwrap_or(top);
        let code = if code > top {
            clamped_top += 1;
            top
        } else {
            code
        };
        values.push(code);
    }
    Ok(QuantizedTable {
        lx: spec.lx,
        ly: spec.ly,
        x_a: spec.x_a,
        x_b: spec.x_b,
        y_a: spec.y_a,
        y_b: spec.y_b,
        values,
        clamped_top,
    })
}

/// Maps an output code back to the real codomain: `ŷ / q_y + y_a`.
pub fn descale_output<R: Real>(yhat: u32, table: &QuantizedTable<R>) -> R {
    debug_assert!(yhat < (1u32 << table.ly));
    R::from_u32(yhat).unwrap() / table.q_y() + table.y_a
}

fn check_bits(bits: u8) -> Result<(), QuantizeError> {
    if (MIN_BITS..=MAX_BITS).contains(&bits) {
        Ok(())
    } else {
        Err(QuantizeError::BitLengthOutOfRange(bits))
    }
}
