//! End-to-end plaintext pipeline checks: the composed circuit reproduces
//! the integer reference evaluator on every input, and the per-stage gate
//! counts obey the analytic laws.

use pwstpc::circuit::{
    build_horner, build_interval_tree, build_param_select, compose_full_gc, compose_hybrid,
    count_gates, plaintext_eval,
};
use pwstpc::encode::{encode_plan, reference_eval, ApproxPlan};
use pwstpc::partition::{bisect, FitKind};
use pwstpc::quantize::{quantize_function, FunctionSpec};
use pwstpc::reference_eval_raw;

fn sinc_plan(lx: u8, ly: u8, eps: f64, d: u8, fit: FitKind) -> ApproxPlan<f64> {
    let table = quantize_function(&FunctionSpec::<f64>::sinc(lx, ly).unwrap()).unwrap();
    encode_plan(bisect(&table, d, eps, fit).unwrap()).unwrap()
}

fn bits_le(v: u64, width: usize) -> Vec<bool> {
    (0..width).map(|b| (v >> b) & 1 == 1).collect()
}

fn from_bits_le(bits: &[bool]) -> u64 {
    bits.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i))
}

#[test]
fn composed_pipeline_equals_reference_exhaustive() {
    for (lx, eps, d, fit) in [
        (8u8, 0.1, 0u8, FitKind::Plain),
        (8, 0.1, 1, FitKind::Plain),
        (8, 0.1, 2, FitKind::Plain),
        (8, 0.05, 2, FitKind::Continuous),
        (8, 0.05, 3, FitKind::Plain),
        (10, 0.05, 1, FitKind::Plain),
        (10, 0.02, 2, FitKind::Plain),
    ] {
        let plan = sinc_plan(lx, lx, eps, d, fit);
        let composed = compose_full_gc(&plan);
        for xhat in 0..(1u32 << lx) {
            let out =
                plaintext_eval(&composed.circuit, &bits_le(xhat as u64, lx as usize), &[])
                    .unwrap();
            let got = from_bits_le(&out) as u32;
            assert_eq!(
                got,
                reference_eval(&plan, xhat),
                "lx={lx} eps={eps} d={d} fit={fit:?} x={xhat}"
            );
        }
    }
}

#[test]
fn mixed_bit_lengths_pipeline() {
    // lx != ly exercises the truncation/clamp widths
    for (lx, ly, d) in [(8u8, 6u8, 1u8), (6, 8, 2), (8, 4, 1)] {
        let plan = sinc_plan(lx, ly, 0.1, d, FitKind::Plain);
        let composed = compose_full_gc(&plan);
        for xhat in 0..(1u32 << lx) {
            let out =
                plaintext_eval(&composed.circuit, &bits_le(xhat as u64, lx as usize), &[])
                    .unwrap();
            assert_eq!(
                from_bits_le(&out) as u32,
                reference_eval(&plan, xhat),
                "lx={lx} ly={ly} d={d} x={xhat}"
            );
        }
    }
}

#[test]
fn interval_tree_gate_law_across_plans() {
    for (eps, d) in [(0.1, 0u8), (0.05, 0), (0.01, 0), (0.1, 1), (0.05, 2), (0.02, 1)] {
        let plan = sinc_plan(8, 8, eps, d, FitKind::Plain);
        let n = plan.leaf_count() as u32;
        let c = build_interval_tree(&plan.tree);
        let non_xor = count_gates(&c).non_xor_count;
        if n >= 2 {
            assert_eq!(non_xor, 2 * (n - 2), "eps={eps} d={d} N={n}");
        } else {
            assert_eq!(non_xor, 0);
        }
    }
}

#[test]
fn select_never_uses_non_xor() {
    for d in [0u8, 1, 2] {
        let plan = sinc_plan(8, 8, 0.05, d, FitKind::Plain);
        let c = build_param_select(&plan);
        assert_eq!(count_gates(&c).non_xor_count, 0, "d={d}");
    }
}

/// published count formula: 3 d^2 lv^2 - d lv^2 + 2 d lv ly - d^2 lv / 2 + d lv / 2
fn horner_formula(d: u32, lv: u32, ly: u32) -> f64 {
    let (d, lv, ly) = (d as f64, lv as f64, ly as f64);
    3.0 * d * d * lv * lv - d * lv * lv + 2.0 * d * lv * ly - 0.5 * d * d * lv + 0.5 * d * lv
}

#[test]
fn horner_counts_within_band_of_formula() {
    for (lx, eps, d) in [
        (8u8, 0.1, 1u8),
        (8, 0.05, 1),
        (8, 0.01, 1),
        (8, 0.1, 2),
        (8, 0.05, 2),
        (8, 0.01, 2),
        (12, 0.1, 1),
        (12, 0.05, 1),
        (12, 0.01, 1),
        (12, 0.1, 2),
        (12, 0.05, 2),
        (12, 0.01, 2),
    ] {
        let plan = sinc_plan(lx, lx, eps, d, FitKind::Plain);
        let composed = compose_full_gc(&plan);
        let got = composed.stages.horner.non_xor_count as f64;
        let expect = horner_formula(d as u32, plan.widths.lv as u32, lx as u32);
        let dev = (got - expect) / expect;
        assert!(
            dev.abs() <= 0.15,
            "lx={lx} eps={eps} d={d} lv={}: horner {got} vs formula {expect} ({:+.1}%)",
            plan.widths.lv,
            dev * 100.0
        );
    }
}

#[test]
fn standalone_horner_matches_reference_pre_truncation_window() {
    // the standalone Horner circuit (payload + delta as inputs) returns the
    // ly bits of the pre-clamp value
    for d in [1u8, 2] {
        let plan = sinc_plan(8, 8, 0.1, d, FitKind::Plain);
        let c = build_horner(&plan);
        for xhat in 0..256u32 {
            let leaf = plan.tree.leaf_of(xhat);
            let delta = xhat - plan.tree.leaves[leaf].s_l;
            let mut input = plan.payload_bits(leaf);
            input.extend(bits_le(delta as u64, plan.widths.lv as usize));
            let out = plaintext_eval(&c, &input, &[]).unwrap();
            let got = from_bits_le(&out) as i64;
            let raw = reference_eval_raw(&plan, xhat);
            let expect = (i64::try_from(raw).unwrap()).rem_euclid(256);
            assert_eq!(got, expect, "d={d} x={xhat}");
        }
    }
}

#[test]
fn hybrid_circuit_outputs_obfuscated_values() {
    use num_bigint::BigUint;
    let plan = sinc_plan(8, 8, 0.1, 2, FitKind::Plain);
    let hybrid = compose_hybrid(&plan, 16);
    // garbler inputs: r and r_a[i] bits; pick fixed values and check the
    // outputs are exactly value + blind
    let r = 12345u64;
    let ras = [77u64, 513, 9999];
    let mut b_bits = bits_le(r, hybrid.layout.r_bits);
    for (i, &ra) in ras.iter().enumerate() {
        b_bits.extend(bits_le(ra, hybrid.layout.r_a_bits[i]));
    }
    for xhat in (0..256u32).step_by(17) {
        let out = plaintext_eval(
            &hybrid.circuit,
            &bits_le(xhat as u64, 8),
            &b_bits,
        )
        .unwrap();
        let leaf = plan.tree.leaf_of(xhat);
        let delta = (xhat - plan.tree.leaves[leaf].s_l) as u64;
        let mut cursor = 0;
        let got_delta = from_bits_le(&out[..hybrid.layout.obf_delta_bits]);
        cursor += hybrid.layout.obf_delta_bits;
        assert_eq!(got_delta, delta + r, "x={xhat}");
        for (i, &ra) in ras.iter().enumerate() {
            let w = hybrid.layout.obf_param_bits[i];
            let got = BigUint::from(from_bits_le(&out[cursor..cursor + w]));
            cursor += w;
            let coeff = plan.int_coeffs[leaf][i];
            let expect_signed = coeff + ra as i128;
            let modulus = 1i128 << w;
            let expect = BigUint::from((expect_signed.rem_euclid(modulus)) as u128);
            assert_eq!(got, expect, "x={xhat} coeff {i}");
        }
    }
}

#[test]
fn text_format_round_trips_composed_circuits() {
    use pwstpc::circuit::{parse_circuit, write_circuit};
    for d in [0u8, 1, 2] {
        let plan = sinc_plan(8, 8, 0.1, d, FitKind::Plain);
        let composed = compose_full_gc(&plan);
        let text = write_circuit(&composed.circuit);
        let parsed = parse_circuit(&text).unwrap();
        assert_eq!(parsed, composed.circuit, "d={d}");
        assert_eq!(parsed.hash(), composed.circuit.hash());
    }
}

#[test]
fn one_hot_exhaustive_at_l12() {
    let plan = sinc_plan(12, 12, 0.05, 0, FitKind::Plain);
    let c = build_interval_tree(&plan.tree);
    for xhat in 0..(1u32 << 12) {
        let out = plaintext_eval(&c, &bits_le(xhat as u64, 12), &[]).unwrap();
        let ones = out.iter().filter(|&&v| v).count();
        assert_eq!(ones, 1, "x={xhat}");
        assert!(out[plan.tree.leaf_of(xhat)], "x={xhat}");
    }
}

#[test]
fn constant_column_bytes_match_published_cells() {
    // every (l, eps) cell where this implementation reproduces the
    // published segment count must also reproduce the published byte count
    // through bytes = 3t * 2(N-2) / 8
    use pwstpc::account::{model_full_gc, CostModel};
    let cells = [
        (8u8, 0.1, 13usize, 660u64),
        (8, 0.05, 28, 1560),
        (8, 0.01, 92, 5400),
        (8, 0.005, 127, 7500),
        (12, 0.1, 15, 780),
        (12, 0.05, 33, 1860),
    ];
    let model = CostModel::default();
    for (lx, eps, published_n, published_bytes) in cells {
        let plan = sinc_plan(lx, lx, eps, 0, FitKind::Plain);
        assert_eq!(plan.leaf_count(), published_n, "lx={lx} eps={eps}");
        let cost = model_full_gc(&plan, &model);
        assert_eq!(cost.gate_material_bytes, published_bytes, "lx={lx} eps={eps}");
    }
}
