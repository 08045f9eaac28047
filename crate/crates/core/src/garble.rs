//! Garbling scheme: free-XOR with point-and-permute and 3-row reduction.
//!
//! Every wire carries a pair of t-bit labels whose XOR is the circuit-wide
//! offset `delta` (least significant bit forced to 1, so the permute bit of
//! the two labels always differs). XOR gates combine labels directly and
//! ship nothing; each TABLE2 gate ships 3 rows of t bits, the fourth row
//! being defined as a hash output. NOT gates swap label roles and are free.

use rand::RngCore;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::circuit::{Circuit, Gate};

#[derive(Debug, Error)]
pub enum GarbleError {
    #[error("security parameter t={0} must be a multiple of 8 in 8..=128")]
    BadSecurityParameter(u16),
    #[error("expected {expected} input labels, got {got}")]
    InputLength { expected: usize, got: usize },
    #[error("garbled material does not match this circuit (hash mismatch)")]
    CircuitHashMismatch,
    #[error("output wire {0}: derived label fails authentication (corrupted material)")]
    RowAuthFailure(usize),
    #[error("malformed garbled material: {0}")]
    Malformed(&'static str),
}

/// A wire label; only the low `t` bits are used.
pub type Label = u128;

fn mask(t: u16) -> u128 {
    if t == 128 {
        u128::MAX
    } else {
        (1u128 << t) - 1
    }
}

fn check_t(t: u16) -> Result<(), GarbleError> {
    if (8..=128).contains(&t) && t.is_multiple_of(8) {
        Ok(())
    } else {
        Err(GarbleError::BadSecurityParameter(t))
    }
}

/// Hash of one or two labels, bound to a gate id, truncated to t bits.
fn gate_hash(t: u16, gate_id: u64, a: Label, b: Label) -> Label {
    let mut h = Sha256::new();
    h.update(b"pwstpc.gate");
    h.update(gate_id.to_le_bytes());
    h.update(a.to_le_bytes());
    h.update(b.to_le_bytes());
    let digest = h.finalize();
    u128::from_le_bytes(digest[..16].try_into().unwrap()) & mask(t)
}

fn output_auth_hash(t: u16, wire_index: u64, label: Label) -> Label {
    let mut h = Sha256::new();
    h.update(b"pwstpc.out");
    h.update(wire_index.to_le_bytes());
    h.update(label.to_le_bytes());
    let digest = h.finalize();
    u128::from_le_bytes(digest[..16].try_into().unwrap()) & mask(t)
}

/// The transmissible part of a garbling: 3 rows per non-XOR gate plus the
/// output authentication digests. Bound to a circuit by its hash.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GarbledCircuit {
    pub t: u16,
    pub circuit_hash: [u8; 32],
    /// Three rows per TABLE2 gate, in gate order; row index is the
    /// evaluator's permute-bit pair minus the derived (0,0) row.
    pub rows: Vec<[Label; 3]>,
    /// Per output wire: truncated hashes of the two possible labels.
    pub output_auth: Vec<(Label, Label)>,
}

impl GarbledCircuit {
    /// Total stored gate material in bits: exactly `3 t` per non-XOR gate.
    pub fn material_bits(&self) -> usize {
        self.rows.len() * 3 * self.t as usize
    }

    /// Wire encoding: circuit hash, then rows in gate order, then the
    /// output auth digests.
    pub fn to_bytes(&self) -> Vec<u8> {
        let lb = self.t as usize / 8;
        let mut out = Vec::with_capacity(36 + self.rows.len() * 3 * lb);
        out.extend_from_slice(&self.circuit_hash);
        out.extend_from_slice(&(self.rows.len() as u32).to_be_bytes());
        for rows in &self.rows {
            for row in rows {
                out.extend_from_slice(&row.to_le_bytes()[..lb]);
            }
        }
        out.extend_from_slice(&(self.output_auth.len() as u32).to_be_bytes());
        for &(a0, a1) in &self.output_auth {
            out.extend_from_slice(&a0.to_le_bytes()[..lb]);
            out.extend_from_slice(&a1.to_le_bytes()[..lb]);
        }
        out
    }

    pub fn from_bytes(t: u16, bytes: &[u8]) -> Result<Self, GarbleError> {
        check_t(t)?;
        let lb = t as usize / 8;
        let read_label = |chunk: &[u8]| -> Label {
            let mut buf = [0u8; 16];
            buf[..lb].copy_from_slice(chunk);
            u128::from_le_bytes(buf)
        };
        if bytes.len() < 36 {
            return Err(GarbleError::Malformed("truncated header"));
        }
        let circuit_hash: [u8; 32] = bytes[..32].try_into().unwrap();
        let n_gates = u32::from_be_bytes(bytes[32..36].try_into().unwrap()) as usize;
        let mut off = 36;
        let mut rows = Vec::with_capacity(n_gates);
        for _ in 0..n_gates {
            if bytes.len() < off + 3 * lb {
                return Err(GarbleError::Malformed("truncated rows"));
            }
            let mut gate = [0u128; 3];
            for slot in gate.iter_mut() {
                *slot = read_label(&bytes[off..off + lb]);
                off += lb;
            }
            rows.push(gate);
        }
        if bytes.len() < off + 4 {
            return Err(GarbleError::Malformed("truncated output section"));
        }
        let n_out = u32::from_be_bytes(bytes[off..off + 4].try_into().unwrap()) as usize;
        off += 4;
        let mut output_auth = Vec::with_capacity(n_out);
        for _ in 0..n_out {
            if bytes.len() < off + 2 * lb {
                return Err(GarbleError::Malformed("truncated output auth"));
            }
            let a0 = read_label(&bytes[off..off + lb]);
            let a1 = read_label(&bytes[off + lb..off + 2 * lb]);
            off += 2 * lb;
            output_auth.push((a0, a1));
        }
        Ok(GarbledCircuit { t, circuit_hash, rows, output_auth })
    }
}

/// Everything the garbler produces: the material to ship plus the label
/// maps it keeps (or transfers selectively via OT).
pub struct GarbleBundle {
    pub garbled: GarbledCircuit,
    /// Label pairs (false, true) for party A's input wires.
    pub input_a: Vec<(Label, Label)>,
    /// Label pairs for party B's own input wires.
    pub input_b: Vec<(Label, Label)>,
    /// Active labels of the constant wires (already fixed to their value).
    pub const_labels: Vec<Label>,
    /// Permute bits of the output labels: `lsb(label_0)` per output wire.
    pub decode_map: Vec<bool>,
}

/// Garbles the circuit. Deterministic for a fixed RNG state.
pub fn garble(
    circuit: &Circuit,
    t: u16,
    rng: &mut impl RngCore,
) -> Result<GarbleBundle, GarbleError> {
    check_t(t)?;
    let m = mask(t);
    let rand_label = |rng: &mut dyn RngCore| -> Label {
        let mut buf = [0u8; 16];
        rng.fill_bytes(&mut buf);
        u128::from_le_bytes(buf) & m
    };
    let delta = rand_label(rng) | 1;

    let mut label0: Vec<Label> = vec![0; circuit.wire_count as usize];
    for &w in circuit.inputs_a.iter().chain(&circuit.inputs_b) {
        label0[w as usize] = rand_label(rng);
    }
    for &(w, _) in &circuit.constants {
        label0[w as usize] = rand_label(rng);
    }

    let mut rows = Vec::new();
    for (gate_id, gate) in circuit.gates.iter().enumerate() {
        match *gate {
            Gate::Xor { a, b, out } => {
                label0[out as usize] = label0[a as usize] ^ label0[b as usize];
            }
            Gate::Not { a, out } => {
                // swap label roles: the evaluator passes its label through
                label0[out as usize] = label0[a as usize] ^ delta;
            }
            Gate::Table2 { mask: table, a, b, out } => {
                let a0 = label0[a as usize];
                let b0 = label0[b as usize];
                let pa = (a0 & 1) as u8;
                let pb = (b0 & 1) as u8;
                // label of wire `a` whose permute bit equals i
                let a_at = |i: u8| a0 ^ if i ^ pa == 1 { delta } else { 0 };
                let b_at = |j: u8| b0 ^ if j ^ pb == 1 { delta } else { 0 };
                let semantic = |i: u8, j: u8| {
                    let x = i ^ pa;
                    let y = j ^ pb;
                    (table >> ((x << 1) | y)) & 1
                };
                // row (0,0) is the hash itself (the reduced row)
                let h00 = gate_hash(t, gate_id as u64, a_at(0), b_at(0));
                let out0 = h00 ^ if semantic(0, 0) == 1 { delta } else { 0 };
                label0[out as usize] = out0;
                let mut gate_rows = [0u128; 3];
                for (slot, (i, j)) in [(0u8, 1u8), (1, 0), (1, 1)].iter().enumerate() {
                    let h = gate_hash(t, gate_id as u64, a_at(*i), b_at(*j));
                    let out_label = out0 ^ if semantic(*i, *j) == 1 { delta } else { 0 };
                    gate_rows[slot] = h ^ out_label;
                }
                rows.push(gate_rows);
            }
        }
    }

    let output_auth = circuit
        .outputs
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let l0 = label0[w as usize];
            (
                output_auth_hash(t, i as u64, l0),
                output_auth_hash(t, i as u64, l0 ^ delta),
            )
        })
        .collect();
    let decode_map = circuit.outputs.iter().map(|&w| label0[w as usize] & 1 == 1).collect();

    Ok(GarbleBundle {
        garbled: GarbledCircuit {
            t,
            circuit_hash: circuit.hash(),
            rows,
            output_auth,
        },
        input_a: circuit
            .inputs_a
            .iter()
            .map(|&w| (label0[w as usize], label0[w as usize] ^ delta))
            .collect(),
        input_b: circuit
            .inputs_b
            .iter()
            .map(|&w| (label0[w as usize], label0[w as usize] ^ delta))
            .collect(),
        const_labels: circuit
            .constants
            .iter()
            .map(|&(w, v)| label0[w as usize] ^ if v { delta } else { 0 })
            .collect(),
        decode_map,
    })
}

/// Active labels entering evaluation, in the circuit's declared order.
pub struct ActiveInputs {
    pub inputs_a: Vec<Label>,
    pub inputs_b: Vec<Label>,
    pub constants: Vec<Label>,
}

/// Evaluates the garbled circuit: one hash per non-XOR gate, nothing for
/// XOR and NOT. Output labels are authenticated against the material.
pub fn evaluate(
    circuit: &Circuit,
    garbled: &GarbledCircuit,
    inputs: &ActiveInputs,
) -> Result<Vec<Label>, GarbleError> {
    if garbled.circuit_hash != circuit.hash() {
        return Err(GarbleError::CircuitHashMismatch);
    }
    if inputs.inputs_a.len() != circuit.inputs_a.len() {
        return Err(GarbleError::InputLength {
            expected: circuit.inputs_a.len(),
            got: inputs.inputs_a.len(),
        });
    }
    if inputs.inputs_b.len() != circuit.inputs_b.len() {
        return Err(GarbleError::InputLength {
            expected: circuit.inputs_b.len(),
            got: inputs.inputs_b.len(),
        });
    }
    if inputs.constants.len() != circuit.constants.len() {
        return Err(GarbleError::InputLength {
            expected: circuit.constants.len(),
            got: inputs.constants.len(),
        });
    }
    let t = garbled.t;
    let mut active: Vec<Label> = vec![0; circuit.wire_count as usize];
    for (&w, &l) in circuit.inputs_a.iter().zip(&inputs.inputs_a) {
        active[w as usize] = l;
    }
    for (&w, &l) in circuit.inputs_b.iter().zip(&inputs.inputs_b) {
        active[w as usize] = l;
    }
    for (&(w, _), &l) in circuit.constants.iter().zip(&inputs.constants) {
        active[w as usize] = l;
    }
    let mut table_index = 0usize;
    for (gate_id, gate) in circuit.gates.iter().enumerate() {
        match *gate {
            Gate::Xor { a, b, out } => {
                active[out as usize] = active[a as usize] ^ active[b as usize];
            }
            Gate::Not { a, out } => {
                active[out as usize] = active[a as usize];
            }
            Gate::Table2 { a, b, out, .. } => {
                let la = active[a as usize];
                let lb = active[b as usize];
                let h = gate_hash(t, gate_id as u64, la, lb);
                let (i, j) = ((la & 1) as u8, (lb & 1) as u8);
                let rows = &garbled.rows[table_index];
                table_index += 1;
                active[out as usize] = match (i, j) {
                    (0, 0) => h,
                    (0, 1) => h ^ rows[0],
                    (1, 0) => h ^ rows[1],
                    _ => h ^ rows[2],
                };
            }
        }
    }
    if table_index != garbled.rows.len() {
        return Err(GarbleError::Malformed("row count does not match circuit"));
    }
    let mut outputs = Vec::with_capacity(circuit.outputs.len());
    for (i, &w) in circuit.outputs.iter().enumerate() {
        let label = active[w as usize];
        let digest = output_auth_hash(t, i as u64, label);
        let (d0, d1) = garbled.output_auth[i];
        if digest != d0 && digest != d1 {
            return Err(GarbleError::RowAuthFailure(i));
        }
        outputs.push(label);
    }
    Ok(outputs)
}

/// Point-and-permute decode: output bit = permute bit of the active label
/// XOR the garbler's recorded permute bit of label 0.
pub fn decode(output_labels: &[Label], decode_map: &[bool]) -> Vec<bool> {
    debug_assert_eq!(output_labels.len(), decode_map.len());
    output_labels
        .iter()
        .zip(decode_map)
        .map(|(&l, &p)| (l & 1 == 1) ^ p)
        .collect()
}

/// Garbler-side helper: select the active labels for known input bits.
pub fn select_labels(pairs: &[(Label, Label)], bits: &[bool]) -> Vec<Label> {
    debug_assert_eq!(pairs.len(), bits.len());
    pairs
        .iter()
        .zip(bits)
        .map(|(&(l0, l1), &b)| if b { l1 } else { l0 })
        .collect()
}
