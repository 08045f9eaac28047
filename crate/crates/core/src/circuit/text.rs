//! Line-oriented text format for circuits, stable enough to diff.
//!
//! ```text
//! wires 12
//! inputsA 2 0 1 / inputsB 1 2
//! outputs 1 11
//! C 0 3
//! X 0 1 4
//! N 4 5
//! T 8 5 2 6
//! ```

use super::{Circuit, CircuitError, Gate};

pub fn write_circuit(circuit: &Circuit) -> String {
    let ids = |v: &[u32]| {
        v.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(" ")
    };
    let mut out = String::new();
    out.push_str(&format!("wires {}\n", circuit.wire_count));
    out.push_str(&format!(
        "inputsA {} {} / inputsB {} {}\n",
        circuit.inputs_a.len(),
        ids(&circuit.inputs_a),
        circuit.inputs_b.len(),
        ids(&circuit.inputs_b),
    ));
    out.push_str(&format!(
        "outputs {} {}\n",
        circuit.outputs.len(),
        ids(&circuit.outputs)
    ));
    for &(w, v) in &circuit.constants {
        out.push_str(&format!("C {} {}\n", v as u8, w));
    }
    for gate in &circuit.gates {
        match *gate {
            Gate::Xor { a, b, out: o } => out.push_str(&format!("X {a} {b} {o}\n")),
            Gate::Not { a, out: o } => out.push_str(&format!("N {a} {o}\n")),
            Gate::Table2 { mask, a, b, out: o } => {
                out.push_str(&format!("T {mask:x} {a} {b} {o}\n"))
            }
        }
    }
    out
}

pub fn parse_circuit(text: &str) -> Result<Circuit, CircuitError> {
    let err = |msg: &str| CircuitError::Parse(msg.to_string());
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());

    let wires_line = lines.next().ok_or_else(|| err("missing wires line"))?;
    let wire_count: u32 = wires_line
        .strip_prefix("wires ")
        .ok_or_else(|| err("expected `wires n`"))?
        .trim()
        .parse()
        .map_err(|_| err("bad wire count"))?;

    let inputs_line = lines.next().ok_or_else(|| err("missing inputs line"))?;
    let (a_part, b_part) =
        inputs_line.split_once(" / ").ok_or_else(|| err("expected `inputsA ... / inputsB ...`"))?;
    let inputs_a = parse_id_list(a_part, "inputsA")?;
    let inputs_b = parse_id_list(b_part, "inputsB")?;

    let outputs_line = lines.next().ok_or_else(|| err("missing outputs line"))?;
    let outputs = parse_id_list(outputs_line, "outputs")?;

    let mut constants = Vec::new();
    let mut gates = Vec::new();
    for line in lines {
        let mut tok = line.split_whitespace();
        let kind = tok.next().ok_or_else(|| err("empty gate line"))?;
        let mut next_id = || -> Result<u32, CircuitError> {
            tok.next()
                .ok_or_else(|| err("truncated gate line"))?
                .parse()
                .map_err(|_| err("bad wire id"))
        };
        match kind {
            "C" => {
                let v = next_id()?;
                if v > 1 {
                    return Err(err("constant must be 0 or 1"));
                }
                let w = next_id()?;
                constants.push((w, v == 1));
            }
            "X" => {
                let (a, b, o) = (next_id()?, next_id()?, next_id()?);
                gates.push(Gate::Xor { a, b, out: o });
            }
            "N" => {
                let (a, o) = (next_id()?, next_id()?);
                gates.push(Gate::Not { a, out: o });
            }
            "T" => {
                let mask_tok = tok.next().ok_or_else(|| err("missing mask"))?;
                let mask =
                    u8::from_str_radix(mask_tok, 16).map_err(|_| err("bad mask"))?;
                if mask > 0xf {
                    return Err(err("mask wider than 4 bits"));
                }
                let mut next_id = || -> Result<u32, CircuitError> {
                    tok.next()
                        .ok_or_else(|| err("truncated gate line"))?
                        .parse()
                        .map_err(|_| err("bad wire id"))
                };
                let (a, b, o) = (next_id()?, next_id()?, next_id()?);
                gates.push(Gate::Table2 { mask, a, b, out: o });
            }
            other => return Err(err(&format!("unknown gate kind `{other}`"))),
        }
    }

    let circuit = Circuit { wire_count, inputs_a, inputs_b, constants, outputs, gates };
    circuit.validate()?;
    Ok(circuit)
}

fn parse_id_list(part: &str, keyword: &str) -> Result<Vec<u32>, CircuitError> {
    let err = |msg: String| CircuitError::Parse(msg);
    let rest = part
        .trim()
        .strip_prefix(keyword)
        .ok_or_else(|| err(format!("expected `{keyword}`")))?;
    let mut tok = rest.split_whitespace();
    let count: usize = tok
        .next()
        .ok_or_else(|| err(format!("missing {keyword} count")))?
        .parse()
        .map_err(|_| err(format!("bad {keyword} count")))?;
    let ids: Vec<u32> = tok
        .map(|t| t.parse().map_err(|_| err(format!("bad id in {keyword}"))))
        .collect::<Result<_, _>>()?;
    if ids.len() != count {
        return Err(err(format!(
            "{keyword} count {count} does not match {} ids",
            ids.len()
        )));
    }
    Ok(ids)
}
