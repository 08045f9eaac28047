//! The hybrid protocol: the garbled circuit detects the interval, selects
//! the parameters and additively obfuscates them; the polynomial itself is
//! then evaluated on the obfuscated clear values with the products pushed
//! into Paillier ciphertexts. Bob ends up with the encryption of the
//! k-amplified polynomial value; nobody sees the plain result.
//!
//! Rounds: R1 garbled material, R2 encrypted powers of the obfuscated
//! difference (degree >= 2 only), R3 re-obfuscated powers back to Alice,
//! R4 the obfuscated evaluation and parameter ciphertexts, after which Bob
//! strips every obfuscation term under encryption. For degree 1 the power
//! rounds collapse and `[delta + r]` rides along in R4.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::One;
use rand::RngCore;

use crate::circuit::{compose_hybrid, HybridCircuit};
use crate::encode::ApproxPlan;
use crate::garble::{self, ActiveInputs, GarbledCircuit};
use crate::paillier::{
    self, decode_signed, decrypt, encrypt, encrypt_signed, keygen, keygen_insecure_test_keys,
    scalar_mul, Ciphertext, Keypair, PaillierError, PublicKey,
};
use crate::real::Real;
use crate::transport::{Message, MsgType, Transport};
use crate::util::{biguint_bits_le, biguint_from_bits_le, bits_le};

use super::{
    provide_input_secrets, serve_input_secrets, LabelBlock, ProtocolError, Role, SessionConfig,
    SessionResult,
};

/// Bob's obfuscation randomness for one hybrid session.
#[derive(Debug, Clone)]
pub struct HybridRandomness {
    /// Blinds the difference delta; `lv + tau` bits.
    pub r: BigUint,
    /// Blinds coefficient i; `1 + lui[i] + i*lv + tau` bits.
    pub r_a: Vec<BigUint>,
    /// Blinds the powers delta^i for i = 2..=d; `i*lv + tau` bits.
    /// (`delta` itself is already blinded by `r`.)
    pub r_delta: Vec<BigUint>,
}

impl HybridRandomness {
    pub fn sample<R: Real>(
        plan: &ApproxPlan<R>,
        tau: u16,
        rng: &mut impl RngCore,
    ) -> HybridRandomness {
        use num_bigint::RandBigInt;
        let w = &plan.widths;
        let lv = w.lv as u64;
        let tau = tau as u64;
        let r = rng.gen_biguint(lv + tau);
        let r_a = (0..=plan.degree())
            .map(|i| rng.gen_biguint(1 + w.lui[i] as u64 + i as u64 * lv + tau))
            .collect();
        let r_delta = (2..=plan.degree())
            .map(|i| rng.gen_biguint(i as u64 * lv + tau))
            .collect();
        HybridRandomness { r, r_a, r_delta }
    }

    /// Obfuscation for the power delta^i (i >= 1).
    fn rho(&self, i: usize) -> &BigUint {
        if i == 1 {
            &self.r
        } else {
            &self.r_delta[i - 2]
        }
    }

    /// The garbler's circuit input bits: `r` then each `r_a[i]`.
    fn input_bits<R: Real>(&self, plan: &ApproxPlan<R>, tau: u16) -> Vec<bool> {
        let layout = crate::circuit::HybridLayout::for_plan(plan, tau);
        let mut bits = biguint_bits_le(&self.r, layout.r_bits);
        for (i, ra) in self.r_a.iter().enumerate() {
            bits.extend(biguint_bits_le(ra, layout.r_a_bits[i]));
        }
        bits
    }

    /// Structural blinding check: every obfuscation is at least `tau` bits
    /// longer than the magnitude bound of the value it hides, and every
    /// sampled value fits its stated length.
    pub fn covers<R: Real>(&self, plan: &ApproxPlan<R>, tau: u16) -> bool {
        let w = &plan.widths;
        let layout = crate::circuit::HybridLayout::for_plan(plan, tau);
        let lv = u64::from(w.lv);
        let tau = u64::from(tau);
        // delta < 2^lv, blinded by r
        let mut ok =
            self.r.bits() <= layout.r_bits as u64 && layout.r_bits as u64 >= lv + tau;
        for (i, ra) in self.r_a.iter().enumerate() {
            // |A'_i| < 2^(lui + lki), blinded by r_a[i]
            let value_bound = u64::from(w.lui[i]) + u64::from(w.lki[i]);
            let stated = layout.r_a_bits[i] as u64;
            ok &= ra.bits() <= stated && stated >= value_bound + tau;
        }
        for (idx, rd) in self.r_delta.iter().enumerate() {
            // delta^i < 2^(i lv), blinded by r_delta[i]
            let i = (idx + 2) as u64;
            let stated = i * lv + tau;
            ok &= rd.bits() <= stated && stated >= i * lv + tau;
        }
        ok
    }
}

/// Exact worst-case magnitude reached by any plaintext the hybrid session
/// ever encrypts; intermediates must stay below N/2.
fn capacity_bound<R: Real>(plan: &ApproxPlan<R>, tau: u16) -> BigUint {
    let w = &plan.widths;
    let d = plan.degree();
    let lv = w.lv as usize;
    let tau = tau as usize;
    let mut y_ob_bound = BigUint::default();
    for i in 0..=d {
        let scale = (w.lk - w.lki[i]) as usize;
        let u_bound = 2 + w.lui[i] as usize + i * lv + tau; // |A' + r_a| < 2^this
        let p_bound = if i == 0 { 0 } else { i * lv + tau + 1 }; // |delta^i + rho|
        y_ob_bound += BigUint::one() << (scale + u_bound + p_bound);
    }
    let power_bound = BigUint::one() << (d * (lv + tau + 1));
    (y_ob_bound.max(power_bound)) << 2
}

fn check_capacity<R: Real>(
    plan: &ApproxPlan<R>,
    tau: u16,
    pk: &PublicKey,
) -> Result<(), ProtocolError> {
    let needed = capacity_bound(plan, tau);
    let half_n = &pk.n >> 1;
    if needed >= half_n {
        return Err(PaillierError::CapacityExceeded {
            needed_bits: needed.bits(),
            available_bits: pk.n.bits().saturating_sub(1),
        }
        .into());
    }
    Ok(())
}

/// Runs one hybrid session (degree >= 1). Alice (the evaluator) generates
/// the Paillier keypair; Bob (the garbler) ends up with the encrypted
/// k-amplified result. In test mode Alice decrypts it and both sides
/// record `floor(result / k)`.
pub fn run_hybrid<R: Real, T: Transport + ?Sized>(
    plan: &ApproxPlan<R>,
    role: Role,
    input: Option<u32>,
    transport: &mut T,
    cfg: &SessionConfig,
) -> Result<SessionResult, ProtocolError> {
    if plan.degree() == 0 {
        return Err(ProtocolError::DegreeZeroHybrid);
    }
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

/// `k / k_i = 2^(lk - lki[i])` as a signed integer.
fn scale_factor(plan_lk: u8, lki: u8) -> BigInt {
    BigInt::one() << (plan_lk - lki)
}

fn send_ciphertexts<T: Transport + ?Sized>(
    transport: &mut T,
    ty: MsgType,
    pk: &PublicKey,
    cts: &[Ciphertext],
) -> Result<(), ProtocolError> {
    let mut payload = Vec::with_capacity(cts.len() * pk.ciphertext_len());
    for ct in cts {
        payload.extend_from_slice(&ct.to_bytes(pk));
    }
    transport.send(&Message::new(ty, payload))?;
    Ok(())
}

fn recv_ciphertexts<T: Transport + ?Sized>(
    transport: &mut T,
    ty: MsgType,
    pk: &PublicKey,
    count: usize,
) -> Result<Vec<Ciphertext>, ProtocolError> {
    let msg = transport.expect(ty)?;
    let len = pk.ciphertext_len();
    if msg.payload.len() != count * len {
        return Err(ProtocolError::Malformed("bad ciphertext batch length"));
    }
    msg.payload
        .chunks(len)
        .map(|c| Ciphertext::from_bytes(pk, c).map_err(ProtocolError::from))
        .collect()
}

fn binomial(n: usize, k: usize) -> BigUint {
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for j in 0..k {
        num *= n - j;
        den *= j + 1;
    }
    num / den
}

fn run_garbler<R: Real, T: Transport + ?Sized>(
    plan: &ApproxPlan<R>,
    transport: &mut T,
    cfg: &SessionConfig,
) -> Result<SessionResult, ProtocolError> {
    let mut rng = cfg.rng_for(Role::Garbler);
    let d = plan.degree();
    let w = &plan.widths;
    let tau = cfg.security.tau;

    let pk = PublicKey::from_bytes(&transport.expect(MsgType::PublicKey)?.payload)?;
    check_capacity(plan, tau, &pk)?;

    let randomness = HybridRandomness::sample(plan, tau, &mut rng);
    let HybridCircuit { circuit, layout, .. } = compose_hybrid(plan, tau);
    let bundle = garble::garble(&circuit, cfg.security.t, &mut rng)?;
    let material_bytes = bundle.garbled.material_bits() / 8;

    // R1: garbled material plus the garbler's active labels and decode map
    let b_bits = randomness.input_bits(plan, tau);
    debug_assert_eq!(b_bits.len(), layout.garbler_input_bits());
    let block = LabelBlock {
        input_b: garble::select_labels(&bundle.input_b, &b_bits),
        constants: bundle.const_labels.clone(),
        decode_map: bundle.decode_map.clone(),
    };
    let mut r1 = bundle.garbled.to_bytes();
    let label_block = block.to_bytes(cfg.security.t);
    r1.extend_from_slice(&(label_block.len() as u32).to_be_bytes());
    r1.extend_from_slice(&label_block);
    transport.send(&Message::new(MsgType::HybridR1, r1))?;

    serve_input_secrets(transport, cfg, &bundle.input_a, &mut rng)?;

    let r_int = BigInt::from(randomness.r.clone());

    // de-obfuscated encrypted powers [delta^i], i = 1..=d
    let mut delta_powers: Vec<Ciphertext> = Vec::new();
    if d >= 2 {
        let obf_powers = recv_ciphertexts(transport, MsgType::HybridR2, &pk, d)?;
        for i in 1..=d {
            // delta^i = (delta+r)^i - sum_{j<i} C(i,j) delta^j r^(i-j)
            let mut ct = obf_powers[i - 1].clone();
            for j in 1..i {
                let coeff = BigInt::from(binomial(i, j)) * r_int.pow((i - j) as u32);
                ct = paillier::add(&pk, &ct, &scalar_mul(&pk, &delta_powers[j - 1], &-coeff));
            }
            let const_term = -r_int.pow(i as u32);
            ct = paillier::add(&pk, &ct, &encrypt_signed(&pk, &const_term, &mut rng)?);
            delta_powers.push(ct);
        }
        // R3: fresh obfuscations rho_i on the powers, i = 2..=d
        let reobf: Vec<Ciphertext> = (2..=d)
            .map(|i| {
                let rho = encrypt(&pk, randomness.rho(i), &mut rng)?;
                Ok(paillier::add(&pk, &delta_powers[i - 1], &rho))
            })
            .collect::<Result<_, ProtocolError>>()?;
        send_ciphertexts(transport, MsgType::HybridR3, &pk, &reobf)?;
    }

    // R4: obfuscated evaluation, negated-scaled parameters, and for d = 1
    // the ciphertext of delta + r
    let expected = 1 + d + usize::from(d == 1);
    let r4 = recv_ciphertexts(transport, MsgType::HybridR4, &pk, expected)?;
    let y_ob = &r4[0];
    let neg_params = &r4[1..1 + d];
    if d == 1 {
        let obf_delta_ct = &r4[1 + d];
        let neg_r = encrypt_signed(&pk, &-&r_int, &mut rng)?;
        delta_powers.push(paillier::add(&pk, obf_delta_ct, &neg_r));
    }

    // strip every obfuscation term:
    // [kP] = [y_ob] * [-s_0 r_a0] * prod [delta^i]^(-s_i r_ai) * prod C_i^(rho_i)
    let s0 = scale_factor(w.lk, w.lki[0]);
    let mut result = paillier::add(
        &pk,
        y_ob,
        &encrypt_signed(&pk, &(-&s0 * BigInt::from(randomness.r_a[0].clone())), &mut rng)?,
    );
    for i in 1..=d {
        let s_i = scale_factor(w.lk, w.lki[i]);
        let exp = -&s_i * BigInt::from(randomness.r_a[i].clone());
        result = paillier::add(&pk, &result, &scalar_mul(&pk, &delta_powers[i - 1], &exp));
        let rho = BigInt::from(randomness.rho(i).clone());
        result = paillier::add(&pk, &result, &scalar_mul(&pk, &neg_params[i - 1], &rho));
    }

    let hybrid_descaled = if cfg.test_decode {
        transport.send(&Message::new(MsgType::TestDecode, result.to_bytes(&pk)))?;
        let reply = transport.expect(MsgType::TestDecode)?;
        Some(BigInt::from_signed_bytes_be(&reply.payload))
    } else {
        None
    };

    Ok(SessionResult {
        hybrid_ciphertext: Some(result.to_bytes(&pk)),
        hybrid_descaled,
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
    let d = plan.degree();
    let w = &plan.widths;
    let tau = cfg.security.tau;

    let Keypair { pk, sk } = if cfg.security.insecure_test_keys {
        keygen_insecure_test_keys(cfg.security.he_bits, &mut rng)?
    } else {
        keygen(cfg.security.he_bits, &mut rng)?
    };
    transport.send(&Message::new(MsgType::PublicKey, pk.to_bytes()))?;
    check_capacity(plan, tau, &pk)?;

    let HybridCircuit { circuit, layout, .. } = compose_hybrid(plan, tau);

    let r1 = transport.expect(MsgType::HybridR1)?;
    let garbled = GarbledCircuit::from_bytes(cfg.security.t, &r1.payload)?;
    if garbled.circuit_hash != circuit.hash() {
        return Err(garble::GarbleError::CircuitHashMismatch.into());
    }
    let material_bytes = garbled.material_bits() / 8;
    let garbled_len = garbled.to_bytes().len();
    if r1.payload.len() < garbled_len + 4 {
        return Err(ProtocolError::Malformed("truncated hybrid R1"));
    }
    let block_len =
        u32::from_be_bytes(r1.payload[garbled_len..garbled_len + 4].try_into().unwrap()) as usize;
    let block = LabelBlock::from_bytes(
        cfg.security.t,
        &r1.payload[garbled_len + 4..garbled_len + 4 + block_len],
    )?;

    let input_bits = bits_le(xhat as u64, plan.lx() as usize);
    let inputs_a = provide_input_secrets(transport, cfg, &input_bits, &mut rng)?;

    let outputs = garble::evaluate(
        &circuit,
        &garbled,
        &ActiveInputs { inputs_a, inputs_b: block.input_b, constants: block.constants },
    )?;
    let bits = garble::decode(&outputs, &block.decode_map);

    // clear outputs: delta + r, then each A'_i + r_a[i]
    let mut cursor = 0usize;
    let obf_delta = biguint_from_bits_le(&bits[..layout.obf_delta_bits]);
    cursor += layout.obf_delta_bits;
    let mut obf_params = Vec::with_capacity(d + 1);
    for &width in &layout.obf_param_bits {
        obf_params.push(biguint_from_bits_le(&bits[cursor..cursor + width]));
        cursor += width;
    }
    debug_assert_eq!(cursor, bits.len());

    // powers of the obfuscated difference: p_1 = delta + r from the
    // circuit, p_i (i >= 2) round-tripped through Bob for de-obfuscation
    let mut powers: Vec<BigUint> = vec![obf_delta.clone()];
    if d >= 2 {
        let cts: Vec<Ciphertext> = (1..=d)
            .map(|i| encrypt(&pk, &obf_delta.pow(i as u32), &mut rng))
            .collect::<Result<_, _>>()?;
        send_ciphertexts(transport, MsgType::HybridR2, &pk, &cts)?;
        let reobf = recv_ciphertexts(transport, MsgType::HybridR3, &pk, d - 1)?;
        for ct in &reobf {
            powers.push(decrypt(&pk, &sk, ct)?);
        }
    }

    // y_ob = s_0 u_0 + sum_i s_i u_i (delta^i + rho_i)
    let s0 = scale_factor(w.lk, w.lki[0]);
    let mut y_ob = &s0 * BigInt::from(obf_params[0].clone());
    for (i, (param, power)) in obf_params[1..].iter().zip(&powers).enumerate() {
        let s_i = scale_factor(w.lk, w.lki[i + 1]);
        y_ob += s_i * BigInt::from(param.clone()) * BigInt::from(power.clone());
    }

    let mut r4 = vec![encrypt_signed(&pk, &y_ob, &mut rng)?];
    for (i, param) in obf_params.iter().enumerate().skip(1) {
        let s_i = scale_factor(w.lk, w.lki[i]);
        let neg = -s_i * BigInt::from(param.clone());
        r4.push(encrypt_signed(&pk, &neg, &mut rng)?);
    }
    if d == 1 {
        r4.push(encrypt(&pk, &obf_delta, &mut rng)?);
    }
    send_ciphertexts(transport, MsgType::HybridR4, &pk, &r4)?;

    let hybrid_descaled = if cfg.test_decode {
        let ct_msg = transport.expect(MsgType::TestDecode)?;
        let ct = Ciphertext::from_bytes(&pk, &ct_msg.payload)?;
        let amplified = decode_signed(&pk, &decrypt(&pk, &sk, &ct)?);
        let descaled = amplified.div_floor(&w.k());
        transport
            .send(&Message::new(MsgType::TestDecode, descaled.to_signed_bytes_be()))?;
        Some(descaled)
    } else {
        None
    };

    Ok(SessionResult {
        hybrid_descaled,
        material_bytes,
        stats: transport.stats().clone(),
        ..SessionResult::default()
    })
}
