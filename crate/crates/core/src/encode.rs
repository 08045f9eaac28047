//! Integer representation of the fitted coefficients.
//!
//! Real coefficients are amplified by per-degree powers of two `k_i` and
//! rounded, so the whole approximation can be evaluated with integer
//! arithmetic; the final division by `k = k_d` is a truncation that drops
//! the `lk` least significant bits of the accumulated sum.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::partition::PartitionTree;
use crate::real::Real;

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("empty partition tree")]
    EmptyTree,
    #[error("rounded coefficient {value} of degree {degree} in leaf {leaf} exceeds its {bits}-bit field")]
    WidthOverflow {
        leaf: usize,
        degree: usize,
        value: i128,
        bits: u32,
    },
}

/// Bit-length bookkeeping for the integer representation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitWidthPlan {
    /// Bits of the widest segment: `lv = log2(max width)`.
    pub lv: u8,
    /// Fractional bits of the top coefficient (`lk = lki[d]`); the final
    /// truncation discards this many bits.
    pub lk: u8,
    /// Per-degree fractional bits `lki[i] = i*lv + ceil(log2(d+1)) - 1`.
    pub lki: Vec<u8>,
    /// Per-degree magnitude bits of the rounded coefficients.
    pub lui: Vec<u8>,
    /// Total parameter payload bits: `lp = lx + sum(lui + lki + 1)`.
    pub lp: u32,
}

impl BitWidthPlan {
    pub fn degree(&self) -> usize {
        self.lki.len() - 1
    }

    /// `k_i = 2^lki[i]`.
    pub fn k_i(&self, i: usize) -> BigInt {
        BigInt::one() << self.lki[i]
    }

    /// `k = 2^lk`.
    pub fn k(&self) -> BigInt {
        BigInt::one() << self.lk
    }

    /// Width in bits of the degree-`i` payload field (sign included).
    pub fn field_width(&self, i: usize) -> u32 {
        self.lui[i] as u32 + self.lki[i] as u32 + 1
    }

    /// (offset, width) of each coefficient field inside the payload,
    /// after the `lx` bits of the left extreme.
    pub fn field_layout(&self, lx: u8) -> Vec<(u32, u32)> {
        let mut offset = lx as u32;
        let mut out = Vec::with_capacity(self.lki.len());
        for i in 0..self.lki.len() {
            let w = self.field_width(i);
            out.push((offset, w));
            offset += w;
        }
        out
    }
}

/// The partition tree together with integer coefficients and bit widths:
/// everything the circuits and protocols consume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ApproxPlan<R: Real> {
    pub tree: PartitionTree<R>,
    #[serde(flatten)]
    pub widths: BitWidthPlan,
    /// Per leaf: `A'_{j,i} = round(k_i * a_{j,i})`, degree 0..=d.
    #[serde(rename = "intCoeffs")]
    pub int_coeffs: Vec<Vec<i128>>,
}

fn ceil_log2(x: u32) -> u8 {
    debug_assert!(x >= 1);
    (32 - (x - 1).leading_zeros()) as u8
}

fn bit_length(v: i128) -> u32 {
    128 - v.unsigned_abs().leading_zeros()
}

/// Exact rounding of `a * 2^frac_bits`; the power-of-two scaling only
/// shifts the float exponent, so no precision is lost before the round.
fn scale_round<R: Real>(a: R, frac_bits: u8) -> i128 {
    let scaled = a.to_f64().expect("finite coefficient") * (frac_bits as f64).exp2();
    let rounded = scaled.round_half_away();
    rounded.to_i128().expect("rounded coefficient fits 128 bits")
}

/// Derives all bit widths from the fitted tree.
///
/// `lui` starts from the magnitude of the real coefficients and is bumped
/// where the rounded integer would not fit, so `quantize_coeffs` can never
/// overflow a field.
pub fn compute_bitwidths<R: Real>(tree: &PartitionTree<R>) -> Result<BitWidthPlan, EncodeError> {
    if tree.leaves.is_empty() {
        return Err(EncodeError::EmptyTree);
    }
    let d = tree.degree as usize;
    let lv = crate::util::log2_exact(tree.max_width());
    let log_terms = ceil_log2(d as u32 + 1);
    let mut lki = Vec::with_capacity(d + 1);
    for i in 0..=d {
        let raw = i as i32 * lv as i32 + log_terms as i32 - 1;
        lki.push(raw.max(0) as u8);
    }
    let mut lui = vec![0u8; d + 1];
    for i in 0..=d {
        let max_mag = tree
            .leaves
            .iter()
            .map(|leaf| leaf.coeffs[i].abs())
            .fold(R::zero(), R::max);
        let mut u = 0u8;
        while crate::real::pow2::<R>(u) < max_mag {
            u += 1;
        }
        // the rounded integer can cross the next power of two; widen until
        // every |A'| fits strictly below 2^(lui + lki)
        let worst_bits = tree
            .leaves
            .iter()
            .map(|leaf| bit_length(scale_round(leaf.coeffs[i], lki[i])))
            .max()
            .unwrap();
        let needed = worst_bits.saturating_sub(lki[i] as u32) as u8;
        lui[i] = u.max(needed);
    }
    let lp = tree.lx as u32
        + (0..=d)
            .map(|i| lui[i] as u32 + lki[i] as u32 + 1)
            .sum::<u32>();
    Ok(BitWidthPlan { lv, lk: lki[d], lki, lui, lp })
}

/// Rounds every leaf's coefficients into their integer fields.
pub fn quantize_coeffs<R: Real>(
    tree: PartitionTree<R>,
    widths: BitWidthPlan,
) -> Result<ApproxPlan<R>, EncodeError> {
    let d = tree.degree as usize;
    let mut int_coeffs = Vec::with_capacity(tree.leaves.len());
    for (j, leaf) in tree.leaves.iter().enumerate() {
        let mut row = Vec::with_capacity(d + 1);
        for i in 0..=d {
            let v = scale_round(leaf.coeffs[i], widths.lki[i]);
            let bits = widths.lui[i] as u32 + widths.lki[i] as u32;
            if bit_length(v) > bits {
                return Err(EncodeError::WidthOverflow { leaf: j, degree: i, value: v, bits });
            }
            row.push(v);
        }
        int_coeffs.push(row);
    }
    Ok(ApproxPlan { tree, widths, int_coeffs })
}

/// Convenience: bit widths plus integer coefficients in one step.
pub fn encode_plan<R: Real>(tree: PartitionTree<R>) -> Result<ApproxPlan<R>, EncodeError> {
    let widths = compute_bitwidths(&tree)?;
    quantize_coeffs(tree, widths)
}

impl<R: Real> ApproxPlan<R> {
    pub fn lx(&self) -> u8 {
        self.tree.lx
    }

    pub fn ly(&self) -> u8 {
        self.tree.ly
    }

    pub fn degree(&self) -> usize {
        self.tree.degree as usize
    }

    pub fn leaf_count(&self) -> usize {
        self.tree.leaves.len()
    }

    /// The leaf's parameter bit string: `ŝ_l` (lx bits) followed by the
    /// coefficient fields, each two's complement, everything little-endian
    /// within its field. Recomputed on demand, never stored.
    pub fn payload_bits(&self, leaf: usize) -> Vec<bool> {
        let lx = self.lx();
        let mut bits = Vec::with_capacity(self.widths.lp as usize);
        let s_l = self.tree.leaves[leaf].s_l;
        for b in 0..lx {
            bits.push((s_l >> b) & 1 == 1);
        }
        for (i, &v) in self.int_coeffs[leaf].iter().enumerate() {
            let w = self.widths.field_width(i);
            for b in 0..w {
                bits.push((v >> b) & 1 == 1);
            }
        }
        debug_assert_eq!(bits.len(), self.widths.lp as usize);
        bits
    }
}

/// Integer polynomial value before the final truncation and clamp:
/// `sum_i 2^(lk - lki[i]) * A'_i * delta^i`, evaluated exactly.
pub fn amplified_value<R: Real>(plan: &ApproxPlan<R>, xhat: u32) -> BigInt {
    let leaf = plan.tree.leaf_of(xhat);
    let delta = BigInt::from(xhat - plan.tree.leaves[leaf].s_l);
    let mut sum = BigInt::zero();
    let mut power = BigInt::one();
    for (i, &coeff) in plan.int_coeffs[leaf].iter().enumerate() {
        let scale = plan.widths.lk - plan.widths.lki[i];
        sum += (BigInt::from(coeff) << scale) * &power;
        power *= &delta;
    }
    sum
}

/// `floor(amplified / k)`: the evaluation result before clamping.
pub fn reference_eval_raw<R: Real>(plan: &ApproxPlan<R>, xhat: u32) -> BigInt {
    amplified_value(plan, xhat).div_floor(&plan.widths.k())
}

/// The quantized-domain reference evaluator: truncated and clamped to the
/// output range `[0, 2^ly)`.
pub fn reference_eval<R: Real>(plan: &ApproxPlan<R>, xhat: u32) -> u32 {
    let top = (1u32 << plan.ly()) - 1;
    let raw = reference_eval_raw(plan, xhat);
    if raw.is_negative() {
        0
    } else {
        raw.to_u32().map_or(top, |v| v.min(top))
    }
}
