//! The protocol evaluated entirely inside one garbled circuit: interval
//! detection, parameter retrieval and Horner approximation composed into a
//! single circuit, garbled by Bob, evaluated by Alice. One communication
//! round after the input-secret OT.

use crate::circuit::compose_full_gc;
use crate::encode::ApproxPlan;
use crate::garble::{self, ActiveInputs, GarbledCircuit};
use crate::real::Real;
use crate::transport::{Message, MsgType, Transport};
use crate::util::{bits_le, from_bits_le};

use super::{
    provide_input_secrets, serve_input_secrets, LabelBlock, ProtocolError, Role, SessionConfig,
    SessionResult,
};

/// Runs one full-GC session. The evaluator passes `Some(xhat)`; the
/// garbler passes `None`. In test mode the evaluator reports the decoded
/// output back so both sides can check it.
pub fn run_full_gc<R: Real, T: Transport + ?Sized>(
    plan: &ApproxPlan<R>,
    role: Role,
    input: Option<u32>,
    transport: &mut T,
    cfg: &SessionConfig,
) -> Result<SessionResult, ProtocolError> {
    match role {
        Role::Garbler => run_garbler(plan, transport, cfg),
        Role::Evaluator => {
            let xhat = input.ok_or(ProtocolError::MissingInput)?;
            if xhat >= 1u32 << plan.lx() {
                return Err(ProtocolError::InputOutOfDomain { input: xhat, lx: plan.lx() });
            }
            run_evaluator(plan, xhat, transport, cfg)
        }
    }
}

fn run_garbler<R: Real, T: Transport + ?Sized>(
    plan: &ApproxPlan<R>,
    transport: &mut T,
    cfg: &SessionConfig,
) -> Result<SessionResult, ProtocolError> {
    let mut rng = cfg.rng_for(Role::Garbler);
    let composed = compose_full_gc(plan);
    let bundle = garble::garble(&composed.circuit, cfg.security.t, &mut rng)?;

    let material = bundle.garbled.to_bytes();
    let material_bytes = bundle.garbled.material_bits() / 8;
    transport.send(&Message::new(MsgType::GarbledMaterial, material))?;

    let block = LabelBlock {
        input_b: bundle.input_b.iter().map(|&(l0, _)| l0).collect(),
        constants: bundle.const_labels.clone(),
        decode_map: bundle.decode_map.clone(),
    };
    transport.send(&Message::new(MsgType::Labels, block.to_bytes(cfg.security.t)))?;

    serve_input_secrets(transport, cfg, &bundle.input_a, &mut rng)?;

    let decoded = if cfg.test_decode {
        let msg = transport.expect(MsgType::TestDecode)?;
        if msg.payload.len() != 4 {
            return Err(ProtocolError::Malformed("bad test-decode payload"));
        }
        Some(u32::from_be_bytes(msg.payload.try_into().unwrap()))
    } else {
        None
    };

    Ok(SessionResult {
        decoded,
        material_bytes,
        stats: transport.stats().clone(),
        ..SessionResult::default()
    })
}

fn run_evaluator<R: Real, T: Transport + ?Sized>(
    plan: &ApproxPlan<R>,
    xhat: u32,
    transport: &mut T,
    cfg: &SessionConfig,
) -> Result<SessionResult, ProtocolError> {
    let mut rng = cfg.rng_for(Role::Evaluator);
    let composed = compose_full_gc(plan);

    let material_msg = transport.expect(MsgType::GarbledMaterial)?;
    let garbled = GarbledCircuit::from_bytes(cfg.security.t, &material_msg.payload)?;
    if garbled.circuit_hash != composed.circuit.hash() {
        return Err(garble::GarbleError::CircuitHashMismatch.into());
    }
    let material_bytes = garbled.material_bits() / 8;

    let block =
        LabelBlock::from_bytes(cfg.security.t, &transport.expect(MsgType::Labels)?.payload)?;

    let input_bits = bits_le(xhat as u64, plan.lx() as usize);
    let inputs_a = provide_input_secrets(transport, cfg, &input_bits, &mut rng)?;

    let outputs = garble::evaluate(
        &composed.circuit,
        &garbled,
        &ActiveInputs { inputs_a, inputs_b: block.input_b, constants: block.constants },
    )?;
    let bits = garble::decode(&outputs, &block.decode_map);
    let decoded = from_bits_le(&bits) as u32;

    if cfg.test_decode {
        transport.send(&Message::new(MsgType::TestDecode, decoded.to_be_bytes().to_vec()))?;
    }

    Ok(SessionResult {
        output_labels: Some(outputs),
        decoded: Some(decoded),
        material_bytes,
        stats: transport.stats().clone(),
        ..SessionResult::default()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::{encode_plan, reference_eval};
    use crate::partition::{bisect, FitKind};
    use crate::quantize::{quantize_function, FunctionSpec};
    use crate::transport::InProcTransport;
    use std::thread;

    fn sinc_plan(lx: u8, eps: f64, d: u8) -> ApproxPlan<f64> {
        let table = quantize_function(&FunctionSpec::<f64>::sinc(lx, lx).unwrap()).unwrap();
        encode_plan(bisect(&table, d, eps, FitKind::Plain).unwrap()).unwrap()
    }

    fn run_pair(plan: &ApproxPlan<f64>, xhat: u32, seed: u64) -> (SessionResult, SessionResult) {
        let cfg = SessionConfig::new(crate::protocol::SecurityConfig::for_tests(), seed);
        let (mut ta, mut tb) = InProcTransport::pair();
        let plan_b = plan.clone();
        let cfg_b = cfg.clone();
        let garbler = thread::spawn(move || {
            run_full_gc(&plan_b, Role::Garbler, None, &mut tb, &cfg_b).unwrap()
        });
        let evaluator = run_full_gc(plan, Role::Evaluator, Some(xhat), &mut ta, &cfg).unwrap();
        (garbler.join().unwrap(), evaluator)
    }

    #[test]
    fn degree_zero_session_matches_reference() {
        let plan = sinc_plan(6, 0.1, 0);
        for xhat in [0u32, 17, 31, 63] {
            let (g, e) = run_pair(&plan, xhat, 1000 + xhat as u64);
            let expect = reference_eval(&plan, xhat);
            assert_eq!(e.decoded, Some(expect));
            assert_eq!(g.decoded, Some(expect));
        }
    }

    #[test]
    fn degree_one_session_matches_reference() {
        let plan = sinc_plan(6, 0.1, 1);
        for xhat in 0..64u32 {
            let (_, e) = run_pair(&plan, xhat, 2000 + xhat as u64);
            assert_eq!(e.decoded, Some(reference_eval(&plan, xhat)), "x={xhat}");
        }
    }

    #[test]
    fn material_bytes_match_gate_count() {
        let plan = sinc_plan(6, 0.1, 1);
        let composed = compose_full_gc(&plan);
        let non_xor = crate::circuit::count_gates(&composed.circuit).non_xor_count as usize;
        let (g, e) = run_pair(&plan, 5, 31);
        assert_eq!(g.material_bytes, 3 * 80 * non_xor / 8);
        assert_eq!(e.material_bytes, g.material_bytes);
    }

    #[test]
    fn evaluator_requires_input() {
        let plan = sinc_plan(6, 0.1, 0);
        let (mut ta, _tb) = InProcTransport::pair();
        let cfg = SessionConfig::new(crate::protocol::SecurityConfig::for_tests(), 7);
        assert!(matches!(
            run_full_gc(&plan, Role::Evaluator, None, &mut ta, &cfg),
            Err(ProtocolError::MissingInput)
        ));
        assert!(matches!(
            run_full_gc(&plan, Role::Evaluator, Some(64), &mut ta, &cfg),
            Err(ProtocolError::InputOutOfDomain { .. })
        ));
    }
}
