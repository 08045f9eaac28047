//! Circuit construction: the interval-detection tree, the XOR-only
//! parameter selection, arithmetic building blocks and the Horner
//! evaluation stage, plus the composed pipelines both protocols garble.
//!
//! The builder folds gates whose inputs are known constants, which is what
//! keeps the emitted gate counts aligned with the analytic formulas (e.g.
//! adding a coefficient whose low bits are zero costs nothing there).

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use super::{Circuit, Gate, GateCount, WireId};
use crate::encode::ApproxPlan;
use crate::partition::PartitionTree;
use crate::real::Real;

/// mask bit index is `(a << 1) | b`
pub const MASK_AND: u8 = 0b1000;
/// `a AND NOT b`, the merged AND+NOT gate of the detection tree
pub const MASK_AND_NOT_B: u8 = 0b0100;
/// `NOT a AND b`
pub const MASK_NOT_A_AND_B: u8 = 0b0010;
pub const MASK_OR: u8 = 0b1110;

/// How a wire vector extends beyond its top bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ext {
    Zero,
    Sign,
}

#[derive(Default)]
pub struct Builder {
    wire_count: u32,
    gates: Vec<Gate>,
    inputs_a: Vec<WireId>,
    inputs_b: Vec<WireId>,
    constants: Vec<(WireId, bool)>,
    const_cache: [Option<WireId>; 2],
    /// Wires whose value is known at build time.
    known: Vec<Option<bool>>,
}

impl Builder {
    pub fn new() -> Self {
        Self::default()
    }

    fn fresh(&mut self) -> WireId {
        let w = self.wire_count;
        self.wire_count += 1;
        self.known.push(None);
        w
    }

    pub fn input_a(&mut self, n: usize) -> Vec<WireId> {
        (0..n)
            .map(|_| {
                let w = self.fresh();
                self.inputs_a.push(w);
                w
            })
            .collect()
    }

    pub fn input_b(&mut self, n: usize) -> Vec<WireId> {
        (0..n)
            .map(|_| {
                let w = self.fresh();
                self.inputs_b.push(w);
                w
            })
            .collect()
    }

    pub fn constant(&mut self, v: bool) -> WireId {
        if let Some(w) = self.const_cache[v as usize] {
            return w;
        }
        let w = self.fresh();
        self.constants.push((w, v));
        self.known[w as usize] = Some(v);
        self.const_cache[v as usize] = Some(w);
        w
    }

    fn value_of(&self, w: WireId) -> Option<bool> {
        self.known[w as usize]
    }

    pub fn not(&mut self, a: WireId) -> WireId {
        if let Some(v) = self.value_of(a) {
            return self.constant(!v);
        }
        let out = self.fresh();
        self.gates.push(Gate::Not { a, out });
        out
    }

    pub fn xor(&mut self, a: WireId, b: WireId) -> WireId {
        match (self.value_of(a), self.value_of(b)) {
            (Some(x), Some(y)) => self.constant(x ^ y),
            (Some(false), None) => b,
            (None, Some(false)) => a,
            (Some(true), None) => self.not(b),
            (None, Some(true)) => self.not(a),
            (None, None) if a == b => self.constant(false),
            (None, None) => {
                let out = self.fresh();
                self.gates.push(Gate::Xor { a, b, out });
                out
            }
        }
    }

    /// Arbitrary two-input gate; constant inputs and repeated wires fold
    /// away so they never cost garbled material.
    pub fn table2(&mut self, mask: u8, a: WireId, b: WireId) -> WireId {
        debug_assert!(mask != super::MASK_XOR, "XOR must be emitted as an XOR gate");
        let bit = |idx: u8| (mask >> idx) & 1 == 1;
        match (self.value_of(a), self.value_of(b)) {
            (Some(va), Some(vb)) => self.constant(bit(((va as u8) << 1) | vb as u8)),
            (Some(va), None) => {
                let o0 = bit((va as u8) << 1);
                let o1 = bit(((va as u8) << 1) | 1);
                self.restrict(b, o0, o1)
            }
            (None, Some(vb)) => {
                let o0 = bit(vb as u8);
                let o1 = bit(0b10 | vb as u8);
                self.restrict(a, o0, o1)
            }
            (None, None) if a == b => {
                let o0 = bit(0b00);
                let o1 = bit(0b11);
                self.restrict(a, o0, o1)
            }
            (None, None) => {
                let out = self.fresh();
                self.gates.push(Gate::Table2 { mask, a, b, out });
                out
            }
        }
    }

    /// Single-variable truth table (outputs for w=0 / w=1).
    fn restrict(&mut self, w: WireId, o0: bool, o1: bool) -> WireId {
        match (o0, o1) {
            (false, false) => self.constant(false),
            (true, true) => self.constant(true),
            (false, true) => w,
            (true, false) => self.not(w),
        }
    }

    pub fn and(&mut self, a: WireId, b: WireId) -> WireId {
        self.table2(MASK_AND, a, b)
    }

    pub fn or(&mut self, a: WireId, b: WireId) -> WireId {
        self.table2(MASK_OR, a, b)
    }

    /// `a AND NOT b`.
    pub fn and_not(&mut self, a: WireId, b: WireId) -> WireId {
        self.table2(MASK_AND_NOT_B, a, b)
    }

    fn bit_of(&mut self, v: &[WireId], ext: Ext, i: usize) -> WireId {
        if i < v.len() {
            v[i]
        } else {
            match ext {
                Ext::Zero => self.constant(false),
                Ext::Sign => *v.last().expect("sign extension of empty vector"),
            }
        }
    }

    /// Ripple-carry addition mod `2^width`. One non-XOR gate per carry, and
    /// carries through constant regions fold away.
    pub fn add(
        &mut self,
        a: &[WireId],
        ext_a: Ext,
        b: &[WireId],
        ext_b: Ext,
        width: usize,
    ) -> Vec<WireId> {
        let mut out = Vec::with_capacity(width);
        let mut carry = self.constant(false);
        for i in 0..width {
            let ai = self.bit_of(a, ext_a, i);
            let bi = self.bit_of(b, ext_b, i);
            let axc = self.xor(ai, carry);
            let s = self.xor(axc, bi);
            out.push(s);
            if i + 1 < width {
                let bxc = self.xor(bi, carry);
                let t = self.and(axc, bxc);
                carry = self.xor(t, carry);
            }
        }
        out
    }

    /// Low `width` bits of `a - b` (ripple borrow via `a + NOT b + 1`); the
    /// sign is discarded.
    pub fn sub_low(&mut self, a: &[WireId], b: &[WireId], width: usize) -> Vec<WireId> {
        debug_assert_eq!(a.len(), b.len());
        let mut out = Vec::with_capacity(width);
        let mut carry = self.constant(true);
        for i in 0..width {
            let nb = self.not(b[i]);
            let axc = self.xor(a[i], carry);
            let s = self.xor(axc, nb);
            out.push(s);
            if i + 1 < width {
                let bxc = self.xor(nb, carry);
                let t = self.and(axc, bxc);
                carry = self.xor(t, carry);
            }
        }
        out
    }

    /// School-book array multiplier mod `2^width`: an AND row per bit of
    /// the (unsigned) `a` operand, accumulated with ripple adders. A signed
    /// `b` is handled by sign-extending each row, which reuses the row's
    /// top AND gate.
    pub fn mul(
        &mut self,
        a: &[WireId],
        b: &[WireId],
        b_signed: bool,
        width: usize,
    ) -> Vec<WireId> {
        let ext = if b_signed { Ext::Sign } else { Ext::Zero };
        let rows = a.len().min(width);
        if rows == 0 || b.is_empty() {
            let zero = self.constant(false);
            return vec![zero; width];
        }
        let row = |builder: &mut Self, i: usize| -> Vec<WireId> {
            b.iter()
                .take(width - i)
                .map(|&bj| builder.and(a[i], bj))
                .collect::<Vec<_>>()
        };
        let mut acc = row(self, 0);
        for i in 1..rows {
            let r = row(self, i);
            let lo: Vec<WireId> = acc[..i.min(acc.len())].to_vec();
            let hi_in: Vec<WireId> = acc[i.min(acc.len())..].to_vec();
            let hi = self.add(&hi_in, ext, &r, ext, width - i);
            acc = lo;
            acc.extend(hi);
        }
        while acc.len() < width {
            let fill = self.bit_of(&acc.clone(), ext, acc.len());
            acc.push(fill);
        }
        acc.truncate(width);
        acc
    }

    pub fn gates_len(&self) -> usize {
        self.gates.len()
    }

    /// Gate-kind tally of gates emitted since `from`.
    pub fn count_since(&self, from: usize) -> GateCount {
        let mut count = GateCount::default();
        for gate in &self.gates[from..] {
            match gate {
                Gate::Xor { .. } => count.xor_count += 1,
                Gate::Not { .. } => count.not_count += 1,
                Gate::Table2 { .. } => count.non_xor_count += 1,
            }
        }
        count
    }

    pub fn finish(self, outputs: Vec<WireId>) -> Circuit {
        let c = Circuit {
            wire_count: self.wire_count,
            inputs_a: self.inputs_a,
            inputs_b: self.inputs_b,
            constants: self.constants,
            outputs,
            gates: self.gates,
        };
        debug_assert!(c.validate().is_ok(), "builder produced invalid circuit");
        c
    }
}

/// One-hot interval detection over the bisection tree.
///
/// Exactly one leaf wire is 1 for every input; the root's children are the
/// top input bit and its free negation, every deeper node costs one merged
/// AND gate, for `2(N-2)` non-XOR gates in total.
pub fn emit_interval_tree(
    b: &mut Builder,
    leaves: &[(u32, u8)],
    lx: u8,
    x: &[WireId],
) -> Vec<WireId> {
    let mut out = vec![0 as WireId; leaves.len()];
    if leaves.len() == 1 {
        out[0] = b.constant(true);
        return out;
    }
    // recursive descent over the implied binary tree; `indicator` is None
    // at the root (always taken)
    #[allow(clippy::too_many_arguments)]
    fn descend(
        b: &mut Builder,
        leaves: &[(u32, u8)],
        range: std::ops::Range<usize>,
        depth: u8,
        indicator: Option<WireId>,
        lx: u8,
        x: &[WireId],
        out: &mut [WireId],
    ) {
        if range.len() == 1 && leaves[range.start].1 == depth {
            out[range.start] =
                indicator.expect("single leaf handled before descent");
            return;
        }
        let bit = x[(lx - 1 - depth) as usize];
        let width = 1u32 << (lx - depth);
        let mid_point = leaves[range.start].0 + width / 2;
        let mid = leaves[range.clone()]
            .iter()
            .position(|&(s, _)| s >= mid_point)
            .expect("bisection splits every internal node")
            + range.start;
        let (left, right) = match indicator {
            None => (b.not(bit), bit),
            Some(ind) => (b.and_not(ind, bit), b.and(ind, bit)),
        };
        descend(b, leaves, range.start..mid, depth + 1, Some(left), lx, x, out);
        descend(b, leaves, mid..range.end, depth + 1, Some(right), lx, x, out);
    }
    descend(b, leaves, 0..leaves.len(), 0, None, lx, x, &mut out);
    out
}

/// XOR-only selection of the active leaf's parameter string: payload bit
/// `b` is the XOR of the leaf wires whose payload has that bit set.
pub fn emit_param_select(
    b: &mut Builder,
    leaf_wires: &[WireId],
    payloads: &[Vec<bool>],
) -> Vec<WireId> {
    let lp = payloads.first().map_or(0, Vec::len);
    let mut out = Vec::with_capacity(lp);
    for col in 0..lp {
        let mut acc: Option<WireId> = None;
        for (leaf, payload) in payloads.iter().enumerate() {
            if payload[col] {
                acc = Some(match acc {
                    None => leaf_wires[leaf],
                    Some(w) => b.xor(w, leaf_wires[leaf]),
                });
            }
        }
        out.push(acc.unwrap_or_else(|| b.constant(false)));
    }
    out
}

/// Horner-evaluation wires: the selected coefficient fields combined with
/// delta through `v_i = A_{d-i} + delta * v_{i-1}`, keeping the scaled
/// coefficients' zero low bits free.
pub struct HornerWires {
    /// The `ly` output bits after discarding the low `lk` bits.
    pub out: Vec<WireId>,
    /// Full final accumulator (still amplified by `k`), for clamping.
    pub full: Vec<WireId>,
}

pub fn emit_horner<R: Real>(
    b: &mut Builder,
    plan: &ApproxPlan<R>,
    payload: &[WireId],
    delta: &[WireId],
) -> HornerWires {
    let w = &plan.widths;
    let d = plan.degree();
    let lv = w.lv as usize;
    let ly = plan.ly() as usize;
    let lk = w.lk as usize;
    debug_assert!(d >= 1);
    let layout = w.field_layout(plan.lx());
    let field = |i: usize| -> &[WireId] {
        let (off, width) = layout[i];
        &payload[off as usize..(off + width) as usize]
    };

    // exact magnitude bound of the stage-i accumulator, to keep widths safe
    // when the nominal (d+i)lv + ly width underestimates
    let mut bound = BigInt::one() << (w.lui[d] as usize + lk);
    let width_for = |bound: &BigInt, nominal: usize| -> usize {
        let exact = (bound - 1u8).bits() as usize + 1;
        exact.max(nominal)
    };

    let w0 = width_for(&bound, d * lv + ly);
    let f_d: Vec<WireId> = field(d).to_vec();
    let mut v: Vec<WireId> = (0..w0).map(|i| b.bit_of(&f_d, Ext::Sign, i)).collect();

    for stage in 1..=d {
        let coeff_degree = d - stage;
        let product_width = v.len() + lv;
        let product = b.mul(delta, &v, true, product_width);

        let shift = (w.lk - w.lki[coeff_degree]) as usize;
        let zero = b.constant(false);
        let mut scaled: Vec<WireId> = vec![zero; shift];
        scaled.extend_from_slice(field(coeff_degree));

        bound = (BigInt::one() << (w.lui[coeff_degree] as usize + lk)) + (bound << lv);
        let width = width_for(&bound, (d + stage) * lv + ly);
        v = b.add(&product, Ext::Sign, &scaled, Ext::Sign, width);
    }

    let out = (lk..lk + ly).map(|i| b.bit_of(&v, Ext::Sign, i)).collect();
    HornerWires { out, full: v }
}

/// Clamps the amplified accumulator to the output range `[0, 2^ly)`:
/// negative values decode to 0, overflows saturate at the top code.
pub fn emit_output_clamp(b: &mut Builder, full: &[WireId], lk: usize, ly: usize) -> Vec<WireId> {
    let width = full.len();
    let sign = full[width - 1];
    let mut overflow: Option<WireId> = None;
    for &bit in full.iter().take(width.saturating_sub(1)).skip(lk + ly) {
        overflow = Some(match overflow {
            None => bit,
            Some(w) => b.or(w, bit),
        });
    }
    let pos_overflow = match overflow {
        None => b.constant(false),
        Some(w) => b.and_not(w, sign),
    };
    let mut out = Vec::with_capacity(ly);
    for i in lk..lk + ly {
        let bit = b.bit_of(full, Ext::Sign, i);
        let saturated = b.or(bit, pos_overflow);
        out.push(b.and_not(saturated, sign));
    }
    out
}

/// Standalone interval-detection circuit; party A inputs the `lx` bits of
/// x̂, outputs are the one-hot leaf wires.
pub fn build_interval_tree<R: Real>(tree: &PartitionTree<R>) -> Circuit {
    let mut b = Builder::new();
    let x = b.input_a(tree.lx as usize);
    let leaves: Vec<(u32, u8)> = tree.leaves.iter().map(|s| (s.s_l, s.depth)).collect();
    let out = emit_interval_tree(&mut b, &leaves, tree.lx, &x);
    b.finish(out)
}

/// Standalone parameter-selection circuit; party A inputs the one-hot leaf
/// wires, outputs are the `lp` payload bits.
pub fn build_param_select<R: Real>(plan: &ApproxPlan<R>) -> Circuit {
    let mut b = Builder::new();
    let leaf_wires = b.input_a(plan.leaf_count());
    let payloads: Vec<Vec<bool>> =
        (0..plan.leaf_count()).map(|j| plan.payload_bits(j)).collect();
    let out = emit_param_select(&mut b, &leaf_wires, &payloads);
    b.finish(out)
}

/// Standalone subtractor: inputs x̂ then ŝ_l (both `lx` bits, party A),
/// output the low `keep` bits of the difference.
pub fn build_subtractor(lx: usize, keep: usize) -> Circuit {
    let mut b = Builder::new();
    let x = b.input_a(lx);
    let s = b.input_a(lx);
    let out = b.sub_low(&x, &s, keep);
    b.finish(out)
}

/// Standalone unsigned adder producing `max(wa, wb) + 1` bits.
pub fn build_adder(wa: usize, wb: usize) -> Circuit {
    let mut b = Builder::new();
    let a = b.input_a(wa);
    let bb = b.input_a(wb);
    let out = b.add(&a, Ext::Zero, &bb, Ext::Zero, wa.max(wb) + 1);
    b.finish(out)
}

/// Standalone unsigned multiplier producing `wa + wb` bits.
pub fn build_multiplier(wa: usize, wb: usize) -> Circuit {
    let mut b = Builder::new();
    let a = b.input_a(wa);
    let bb = b.input_a(wb);
    let out = b.mul(&a, &bb, false, wa + wb);
    b.finish(out)
}

/// Standalone Horner stage: party A inputs the payload bits then the
/// `lv` delta bits; outputs the `ly` result bits.
pub fn build_horner<R: Real>(plan: &ApproxPlan<R>) -> Circuit {
    let mut b = Builder::new();
    let payload = b.input_a(plan.widths.lp as usize);
    let delta = b.input_a(plan.widths.lv as usize);
    let h = emit_horner(&mut b, plan, &payload, &delta);
    b.finish(h.out)
}

/// Non-XOR gate tally per pipeline stage.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct StageCounts {
    pub tree: GateCount,
    pub select: GateCount,
    pub subtract: GateCount,
    pub horner: GateCount,
    pub clamp: GateCount,
    pub obfuscation: GateCount,
}

pub struct ComposedCircuit {
    pub circuit: Circuit,
    pub stages: StageCounts,
}

/// The full-GC evaluation circuit: tree -> select -> subtract -> Horner ->
/// clamp (constant plans stop after select). Party A inputs x̂; the output
/// is the `ly`-bit approximation.
pub fn compose_full_gc<R: Real>(plan: &ApproxPlan<R>) -> ComposedCircuit {
    let mut b = Builder::new();
    let mut stages = StageCounts::default();
    let lx = plan.lx();
    let ly = plan.ly() as usize;
    let x = b.input_a(lx as usize);

    let leaves: Vec<(u32, u8)> = plan.tree.leaves.iter().map(|s| (s.s_l, s.depth)).collect();
    let mark = b.gates_len();
    let leaf_wires = emit_interval_tree(&mut b, &leaves, lx, &x);
    stages.tree = b.count_since(mark);

    let payloads: Vec<Vec<bool>> =
        (0..plan.leaf_count()).map(|j| plan.payload_bits(j)).collect();
    let mark = b.gates_len();
    let payload = emit_param_select(&mut b, &leaf_wires, &payloads);
    stages.select = b.count_since(mark);

    let outputs = if plan.degree() == 0 {
        // the selected constant already is the result
        let (off, width) = plan.widths.field_layout(lx)[0];
        let f: Vec<WireId> =
            payload[off as usize..(off + width) as usize].to_vec();
        (0..ly).map(|i| b.bit_of(&f, Ext::Zero, i)).collect()
    } else {
        let mark = b.gates_len();
        let s_wires = &payload[..lx as usize];
        let delta = b.sub_low(&x, s_wires, plan.widths.lv as usize);
        stages.subtract = b.count_since(mark);

        let mark = b.gates_len();
        let h = emit_horner(&mut b, plan, &payload, &delta);
        stages.horner = b.count_since(mark);

        let mark = b.gates_len();
        let out = emit_output_clamp(&mut b, &h.full, plan.widths.lk as usize, ly);
        stages.clamp = b.count_since(mark);
        out
    };

    ComposedCircuit { circuit: b.finish(outputs), stages }
}

/// Wire layout of the hybrid circuit's outputs and garbler inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HybridLayout {
    /// Bits of the obfuscated difference `delta + r`.
    pub obf_delta_bits: usize,
    /// Bits of each obfuscated coefficient `A'_i + r_a[i]`, degree 0..=d.
    pub obf_param_bits: Vec<usize>,
    /// Bit length of `r` (garbler input, first).
    pub r_bits: usize,
    /// Bit lengths of each `r_a[i]` (garbler inputs, in degree order).
    pub r_a_bits: Vec<usize>,
}

impl HybridLayout {
    pub fn for_plan<R: Real>(plan: &ApproxPlan<R>, tau: u16) -> Self {
        let w = &plan.widths;
        let lv = w.lv as usize;
        let tau = tau as usize;
        let r_bits = lv + tau;
        let r_a_bits: Vec<usize> = (0..=plan.degree())
            .map(|i| 1 + w.lui[i] as usize + i * lv + tau)
            .collect();
        HybridLayout {
            obf_delta_bits: r_bits + 1,
            obf_param_bits: r_a_bits.iter().map(|&bits| bits + 1).collect(),
            r_bits,
            r_a_bits,
        }
    }

    pub fn garbler_input_bits(&self) -> usize {
        self.r_bits + self.r_a_bits.iter().sum::<usize>()
    }
}

pub struct HybridCircuit {
    pub circuit: Circuit,
    pub stages: StageCounts,
    pub layout: HybridLayout,
}

/// The hybrid protocol's garbled stage: tree -> select -> subtract, then
/// additive obfuscation of the difference and of every selected
/// coefficient with garbler-supplied randomness.
pub fn compose_hybrid<R: Real>(plan: &ApproxPlan<R>, tau: u16) -> HybridCircuit {
    assert!(plan.degree() >= 1, "hybrid protocol needs degree >= 1");
    let layout = HybridLayout::for_plan(plan, tau);
    let mut b = Builder::new();
    let mut stages = StageCounts::default();
    let lx = plan.lx();
    let x = b.input_a(lx as usize);
    let r_wires = b.input_b(layout.r_bits);
    let ra_wires: Vec<Vec<WireId>> =
        layout.r_a_bits.iter().map(|&bits| b.input_b(bits)).collect();

    let leaves: Vec<(u32, u8)> = plan.tree.leaves.iter().map(|s| (s.s_l, s.depth)).collect();
    let mark = b.gates_len();
    let leaf_wires = emit_interval_tree(&mut b, &leaves, lx, &x);
    stages.tree = b.count_since(mark);

    let payloads: Vec<Vec<bool>> =
        (0..plan.leaf_count()).map(|j| plan.payload_bits(j)).collect();
    let mark = b.gates_len();
    let payload = emit_param_select(&mut b, &leaf_wires, &payloads);
    stages.select = b.count_since(mark);

    let mark = b.gates_len();
    let delta = b.sub_low(&x, &payload[..lx as usize], plan.widths.lv as usize);
    stages.subtract = b.count_since(mark);

    let mark = b.gates_len();
    let mut outputs = b.add(&delta, Ext::Zero, &r_wires, Ext::Zero, layout.obf_delta_bits);
    let field_layout = plan.widths.field_layout(lx);
    for (i, ra) in ra_wires.iter().enumerate() {
        let (off, width) = field_layout[i];
        let field: Vec<WireId> = payload[off as usize..(off + width) as usize].to_vec();
        let obf = b.add(&field, Ext::Sign, ra, Ext::Zero, layout.obf_param_bits[i]);
        outputs.extend(obf);
    }
    stages.obfuscation = b.count_since(mark);

    HybridCircuit { circuit: b.finish(outputs), stages, layout }
}
