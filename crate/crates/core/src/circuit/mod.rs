//! Boolean-circuit intermediate representation with the XOR / non-XOR
//! distinction the garbling cost model relies on.
//!
//! Gates are stored in topological order. NOT gates are free (they fold
//! into wire labels during garbling) and XOR gates carry no ciphertext
//! material, so cost accounting only counts `TABLE2` gates.

mod build;
mod text;

pub use build::{
    build_adder, build_horner, build_interval_tree, build_multiplier, build_param_select,
    build_subtractor, compose_full_gc, compose_hybrid, Builder, ComposedCircuit, Ext,
    HybridCircuit, HybridLayout, StageCounts, MASK_AND, MASK_AND_NOT_B, MASK_NOT_A_AND_B, MASK_OR,
};
pub use text::{parse_circuit, write_circuit};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub type WireId = u32;

/// Forbidden as a TABLE2 mask: it is the XOR truth table and must be
/// emitted as a `Gate::Xor` so free-XOR accounting stays exact.
pub const MASK_XOR: u8 = 0b0110;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Xor { a: WireId, b: WireId, out: WireId },
    /// Free: realized as a label swap, never counted or transmitted.
    Not { a: WireId, out: WireId },
    /// Arbitrary two-input gate; `mask` bit `(a << 1) | b` is the output.
    Table2 { mask: u8, a: WireId, b: WireId, out: WireId },
}

impl Gate {
    pub fn out(&self) -> WireId {
        match *self {
            Gate::Xor { out, .. } | Gate::Not { out, .. } | Gate::Table2 { out, .. } => out,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    pub wire_count: u32,
    /// Evaluator-side input wires (the secret input x̂).
    pub inputs_a: Vec<WireId>,
    /// Garbler-side input wires (constants and protocol randomness).
    pub inputs_b: Vec<WireId>,
    /// Wires pinned to a fixed bit, provided by the garbler for free.
    pub constants: Vec<(WireId, bool)>,
    pub outputs: Vec<WireId>,
    pub gates: Vec<Gate>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct GateCount {
    pub xor_count: u32,
    pub non_xor_count: u32,
    pub not_count: u32,
}

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("input length mismatch: expected {expected}, got {got}")]
    InputLength { expected: usize, got: usize },
    #[error("wire {0} used before definition")]
    UseBeforeDefinition(WireId),
    #[error("wire {0} driven more than once")]
    MultipleDrivers(WireId),
    #[error("output wire {0} is never driven")]
    UndrivenOutput(WireId),
    #[error("TABLE2 gate with XOR mask 0110 (must be an XOR gate)")]
    XorAsTable,
    #[error("malformed circuit file: {0}")]
    Parse(String),
}

/// Exact tally of gate kinds.
pub fn count_gates(circuit: &Circuit) -> GateCount {
    let mut count = GateCount::default();
    for gate in &circuit.gates {
        match gate {
            Gate::Xor { .. } => count.xor_count += 1,
            Gate::Not { .. } => count.not_count += 1,
            Gate::Table2 { .. } => count.non_xor_count += 1,
        }
    }
    count
}

impl Circuit {
    /// Structural checks: topological order, single drivers, no XOR-mask
    /// TABLE2 gates, all outputs driven.
    pub fn validate(&self) -> Result<(), CircuitError> {
        let mut defined = vec![false; self.wire_count as usize];
        for &w in self.inputs_a.iter().chain(&self.inputs_b) {
            if defined[w as usize] {
                return Err(CircuitError::MultipleDrivers(w));
            }
            defined[w as usize] = true;
        }
        for &(w, _) in &self.constants {
            if defined[w as usize] {
                return Err(CircuitError::MultipleDrivers(w));
            }
            defined[w as usize] = true;
        }
        for gate in &self.gates {
            let ins: &[WireId] = match gate {
                Gate::Xor { a, b, .. } | Gate::Table2 { a, b, .. } => &[*a, *b],
                Gate::Not { a, .. } => &[*a],
            };
            for &w in ins.iter() {
                if !defined[w as usize] {
                    return Err(CircuitError::UseBeforeDefinition(w));
                }
            }
            if let Gate::Table2 { mask, .. } = gate {
                if *mask == MASK_XOR {
                    return Err(CircuitError::XorAsTable);
                }
            }
            let out = gate.out();
            if defined[out as usize] {
                return Err(CircuitError::MultipleDrivers(out));
            }
            defined[out as usize] = true;
        }
        for &w in &self.outputs {
            if !defined[w as usize] {
                return Err(CircuitError::UndrivenOutput(w));
            }
        }
        Ok(())
    }

    /// Hash binding garbled material to this exact circuit.
    pub fn hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(text::write_circuit(self).as_bytes());
        h.finalize().into()
    }
}

/// Evaluates the circuit on plain bits, gate by gate.
pub fn plaintext_eval(
    circuit: &Circuit,
    inputs_a: &[bool],
    inputs_b: &[bool],
) -> Result<Vec<bool>, CircuitError> {
    if inputs_a.len() != circuit.inputs_a.len() {
        return Err(CircuitError::InputLength {
            expected: circuit.inputs_a.len(),
            got: inputs_a.len(),
        });
    }
    if inputs_b.len() != circuit.inputs_b.len() {
        return Err(CircuitError::InputLength {
            expected: circuit.inputs_b.len(),
            got: inputs_b.len(),
        });
    }
    let mut wires = vec![false; circuit.wire_count as usize];
    for (&w, &v) in circuit.inputs_a.iter().zip(inputs_a) {
        wires[w as usize] = v;
    }
    for (&w, &v) in circuit.inputs_b.iter().zip(inputs_b) {
        wires[w as usize] = v;
    }
    for &(w, v) in &circuit.constants {
        wires[w as usize] = v;
    }
    for gate in &circuit.gates {
        match *gate {
            Gate::Xor { a, b, out } => {
                wires[out as usize] = wires[a as usize] ^ wires[b as usize];
            }
            Gate::Not { a, out } => {
                wires[out as usize] = !wires[a as usize];
            }
            Gate::Table2 { mask, a, b, out } => {
                let idx = ((wires[a as usize] as u8) << 1) | wires[b as usize] as u8;
                wires[out as usize] = (mask >> idx) & 1 == 1;
            }
        }
    }
    Ok(circuit.outputs.iter().map(|&w| wires[w as usize]).collect())
}
