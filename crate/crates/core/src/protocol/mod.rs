//! Two-party protocol sessions: the full garbled-circuit evaluation and
//! the hybrid garbled-circuit + Paillier evaluation.
//!
//! Bob garbles and owns the protocol randomness; Alice evaluates and, in
//! the hybrid protocol, owns the Paillier private key. The input x̂ enters
//! as evaluator-side garbled secrets obtained through OT.

mod full_gc;
mod hybrid;

pub use full_gc::run_full_gc;
pub use hybrid::{run_hybrid, HybridRandomness};

use num_bigint::BigInt;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::circuit::CircuitError;
use crate::garble::{GarbleError, Label};
use crate::ot::{self, GroupId, OtError};
use crate::paillier::PaillierError;
use crate::transport::{Message, MsgType, Transport, TransportError, TransportStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Bob: garbles circuits, owns the obfuscation randomness.
    Garbler,
    /// Alice: evaluates circuits, owns the Paillier key in the hybrid.
    Evaluator,
}

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Garble(#[from] GarbleError),
    #[error(transparent)]
    Ot(#[from] OtError),
    #[error(transparent)]
    Paillier(#[from] PaillierError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("evaluator role requires the input value")]
    MissingInput,
    #[error("input {input} out of domain [0, 2^{lx})")]
    InputOutOfDomain { input: u32, lx: u8 },
    #[error("hybrid protocol needs degree >= 1, plan has degree 0")]
    DegreeZeroHybrid,
    #[error("malformed protocol message: {0}")]
    Malformed(&'static str),
}

/// Security parameters of a session (short-term defaults: t = 80, tau = 80).
#[derive(Debug, Clone)]
pub struct SecurityConfig {
    /// Garbled-circuit label bits.
    pub t: u16,
    /// Statistical obfuscation parameter.
    pub tau: u16,
    /// Group for the base oblivious transfers.
    pub ot_group: GroupId,
    /// Paillier modulus bits (hybrid only).
    pub he_bits: u64,
    /// Allow Paillier moduli below the production floor.
    pub insecure_test_keys: bool,
}

impl Default for SecurityConfig {
    fn default() -> Self {
        SecurityConfig {
            t: 80,
            tau: 80,
            ot_group: GroupId::Modp2048,
            he_bits: 1024,
            insecure_test_keys: false,
        }
    }
}

impl SecurityConfig {
    /// Desk-scale parameters for tests: tiny OT group, 512-bit test keys.
    pub fn for_tests() -> Self {
        SecurityConfig {
            ot_group: GroupId::InsecureTest512,
            he_bits: 512,
            insecure_test_keys: true,
            ..SecurityConfig::default()
        }
    }
}

/// Per-session knobs shared by both parties.
#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub security: SecurityConfig,
    /// Seeds the party's CSPRNG stream; both parties may share one seed
    /// (streams are separated by role).
    pub seed: u64,
    /// Exchange and record decoded results for verification.
    pub test_decode: bool,
}

impl SessionConfig {
    pub fn new(security: SecurityConfig, seed: u64) -> Self {
        SessionConfig { security, seed, test_decode: true }
    }

    pub(crate) fn rng_for(&self, role: Role) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(match role {
            Role::Garbler => 0xb0b,
            Role::Evaluator => 0xa11ce,
        });
        rng
    }
}

/// What a finished session hands back to its party.
#[derive(Debug, Clone, Default)]
pub struct SessionResult {
    /// Evaluator, full-GC: the ly active output labels.
    pub output_labels: Option<Vec<Label>>,
    /// Test mode: the decoded integer output (full-GC).
    pub decoded: Option<u32>,
    /// Garbler, hybrid: the k-amplified result ciphertext, serialized.
    pub hybrid_ciphertext: Option<Vec<u8>>,
    /// Test mode, hybrid: `floor(k P(delta) / k)`, the pre-clamp value.
    pub hybrid_descaled: Option<BigInt>,
    /// Exact garbled gate material bytes moved this session.
    pub material_bytes: usize,
    /// Framed byte counts per direction.
    pub stats: TransportStats,
}

pub(crate) fn label_bytes(label: Label, t: u16) -> Vec<u8> {
    label.to_le_bytes()[..t as usize / 8].to_vec()
}

pub(crate) fn label_from_bytes(bytes: &[u8]) -> Result<Label, ProtocolError> {
    if bytes.len() > 16 {
        return Err(ProtocolError::Malformed("label too long"));
    }
    let mut buf = [0u8; 16];
    buf[..bytes.len()].copy_from_slice(bytes);
    Ok(u128::from_le_bytes(buf))
}

/// Garbler side of the input-secret transfer: one OT per evaluator input
/// bit, batched into setup / choices / payload messages.
pub fn serve_input_secrets<T: Transport + ?Sized>(
    transport: &mut T,
    cfg: &SessionConfig,
    pairs: &[(Label, Label)],
    rng: &mut impl RngCore,
) -> Result<(), ProtocolError> {
    let group = cfg.security.ot_group.group();
    let (sender, setup) = ot::sender_setup(group, rng);
    transport.send(&Message::new(MsgType::Ot, setup.to_bytes(group)))?;
    let choices =
        ot::OtChoices::from_bytes(group, &transport.expect(MsgType::Ot)?.payload)?;
    let byte_pairs: Vec<(Vec<u8>, Vec<u8>)> = pairs
        .iter()
        .map(|&(l0, l1)| (label_bytes(l0, cfg.security.t), label_bytes(l1, cfg.security.t)))
        .collect();
    let payloads = sender.payloads(&choices, &byte_pairs, rng)?;
    transport.send(&Message::new(
        MsgType::Ot,
        payloads.to_bytes(group, cfg.security.t as usize / 8),
    ))?;
    Ok(())
}

/// Evaluator side of the input-secret transfer: obtains the label of each
/// own input bit without revealing the bits.
pub fn provide_input_secrets<T: Transport + ?Sized>(
    transport: &mut T,
    cfg: &SessionConfig,
    bits: &[bool],
    rng: &mut impl RngCore,
) -> Result<Vec<Label>, ProtocolError> {
    let group = cfg.security.ot_group.group();
    let setup = ot::OtSetup::from_bytes(group, &transport.expect(MsgType::Ot)?.payload)?;
    let (chooser, choices) = ot::choose(group, &setup, bits, rng);
    transport.send(&Message::new(MsgType::Ot, choices.to_bytes(group)))?;
    let payloads = ot::OtPayloads::from_bytes(
        group,
        cfg.security.t as usize / 8,
        &transport.expect(MsgType::Ot)?.payload,
    )?;
    let messages = chooser.receive(&payloads)?;
    messages.iter().map(|m| label_from_bytes(m)).collect()
}

/// Garbler-to-evaluator block carrying its own input labels, the constant
/// labels and the output decode map.
pub(crate) struct LabelBlock {
    pub input_b: Vec<Label>,
    pub constants: Vec<Label>,
    pub decode_map: Vec<bool>,
}

impl LabelBlock {
    pub fn to_bytes(&self, t: u16) -> Vec<u8> {
        let lb = t as usize / 8;
        let mut out = Vec::with_capacity(8 + (self.input_b.len() + self.constants.len()) * lb);
        out.extend_from_slice(&(self.input_b.len() as u32).to_be_bytes());
        for &l in &self.input_b {
            out.extend_from_slice(&label_bytes(l, t));
        }
        out.extend_from_slice(&(self.constants.len() as u32).to_be_bytes());
        for &l in &self.constants {
            out.extend_from_slice(&label_bytes(l, t));
        }
        out.extend_from_slice(&(self.decode_map.len() as u32).to_be_bytes());
        let mut packed = vec![0u8; self.decode_map.len().div_ceil(8)];
        for (i, &b) in self.decode_map.iter().enumerate() {
            if b {
                packed[i / 8] |= 1 << (i % 8);
            }
        }
        out.extend_from_slice(&packed);
        out
    }

    pub fn from_bytes(t: u16, bytes: &[u8]) -> Result<Self, ProtocolError> {
        let lb = t as usize / 8;
        let mut off = 0usize;
        let read_u32 = |off: &mut usize| -> Result<usize, ProtocolError> {
            if bytes.len() < *off + 4 {
                return Err(ProtocolError::Malformed("truncated label block"));
            }
            let v = u32::from_be_bytes(bytes[*off..*off + 4].try_into().unwrap()) as usize;
            *off += 4;
            Ok(v)
        };
        let n_b = read_u32(&mut off)?;
        let mut input_b = Vec::with_capacity(n_b);
        for _ in 0..n_b {
            if bytes.len() < off + lb {
                return Err(ProtocolError::Malformed("truncated label block"));
            }
            input_b.push(label_from_bytes(&bytes[off..off + lb])?);
            off += lb;
        }
        let n_c = read_u32(&mut off)?;
        let mut constants = Vec::with_capacity(n_c);
        for _ in 0..n_c {
            if bytes.len() < off + lb {
                return Err(ProtocolError::Malformed("truncated label block"));
            }
            constants.push(label_from_bytes(&bytes[off..off + lb])?);
            off += lb;
        }
        let n_d = read_u32(&mut off)?;
        let packed = &bytes[off..];
        if packed.len() < n_d.div_ceil(8) {
            return Err(ProtocolError::Malformed("truncated decode map"));
        }
        let decode_map = (0..n_d).map(|i| packed[i / 8] >> (i % 8) & 1 == 1).collect();
        Ok(LabelBlock { input_b, constants, decode_map })
    }
}
