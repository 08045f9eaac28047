//! Semi-honest 1-of-2 oblivious transfer, Diffie-Hellman style.
//!
//! Two messages plus a setup value: the sender publishes a group element
//! `c` with unknown discrete log to the chooser; the chooser sends
//! `pk_0`, implicitly defining `pk_1 = c / pk_0`, knowing the secret
//! exponent of exactly one of the two. The sender ElGamal-encrypts each
//! message under the corresponding public key. The chooser's message is a
//! uniform group element either way, so the sender learns nothing about
//! the choice bit.

use std::sync::OnceLock;

use num_bigint::{BigUint, RandBigInt};
use num_traits::One;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OtError {
    #[error("payload count {got} does not match choice count {expected}")]
    CountMismatch { expected: usize, got: usize },
    #[error("message pair {0} has mismatched lengths")]
    LengthMismatch(usize),
    #[error("malformed OT message: {0}")]
    Malformed(&'static str),
}

/// Multiplicative group mod a safe prime `p = 2q + 1`; exponents are
/// sampled below `q`.
pub struct DhGroup {
    pub p: BigUint,
    pub g: BigUint,
    q: BigUint,
    element_len: usize,
}

impl DhGroup {
    fn from_hex(p_hex: &str, g: u32) -> Self {
        let p = BigUint::parse_bytes(p_hex.as_bytes(), 16).expect("valid prime hex");
        let q = (&p - 1u8) >> 1;
        let element_len = p.bits().div_ceil(8) as usize;
        DhGroup { p, g: BigUint::from(g), q, element_len }
    }

    /// RFC 3526 group 14 (2048-bit MODP), generator 2.
    pub fn modp_2048() -> &'static DhGroup {
        static GROUP: OnceLock<DhGroup> = OnceLock::new();
        GROUP.get_or_init(|| {
            DhGroup::from_hex(
                "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74\
                 020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437\
                 4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED\
                 EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05\
                 98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB\
                 9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B\
                 E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718\
                 3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF",
                2,
            )
        })
    }

    /// A fixed 512-bit safe prime for tests and demos only; far below any
    /// acceptable security margin, but an order of magnitude faster.
    pub fn insecure_test_512() -> &'static DhGroup {
        static GROUP: OnceLock<DhGroup> = OnceLock::new();
        GROUP.get_or_init(|| {
            DhGroup::from_hex(
                "80062AE2721350461866B5B873CD862775E7A8DA4987E7936719A10192F278C2\
                 57C694FC6008A4F2E584A853092AFCA6711FBBEF542876F226DA7BF68B04E5EB",
                4,
            )
        })
    }

    pub fn element_len(&self) -> usize {
        self.element_len
    }

    fn random_exponent(&self, rng: &mut impl RngCore) -> BigUint {
        rng.gen_biguint_range(&BigUint::one(), &self.q)
    }

    fn element_to_bytes(&self, e: &BigUint) -> Vec<u8> {
        let mut out = vec![0u8; self.element_len];
        let raw = e.to_bytes_be();
        out[self.element_len - raw.len()..].copy_from_slice(&raw);
        out
    }

    fn element_from_bytes(&self, bytes: &[u8]) -> Result<BigUint, OtError> {
        if bytes.len() != self.element_len {
            return Err(OtError::Malformed("bad element length"));
        }
        let e = BigUint::from_bytes_be(bytes);
        if e >= self.p {
            return Err(OtError::Malformed("element out of group"));
        }
        Ok(e)
    }
}

/// Named group selection, serializable into configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupId {
    Modp2048,
    InsecureTest512,
}

impl GroupId {
    pub fn group(&self) -> &'static DhGroup {
        match self {
            GroupId::Modp2048 => DhGroup::modp_2048(),
            GroupId::InsecureTest512 => DhGroup::insecure_test_512(),
        }
    }
}

/// Sender's setup message: the element whose discrete log stays unknown to
/// the chooser.
pub struct OtSetup {
    pub c: BigUint,
}

/// One chooser message per transfer: `pk_0`.
pub struct OtChoices {
    pub pk0: Vec<BigUint>,
}

/// One sender message per transfer: ElGamal encryptions of both inputs.
pub struct OtPayloads {
    /// (u_0, e_0, u_1, e_1): `u_j = g^{r_j}`, `e_j = m_j XOR H(pk_j^{r_j})`.
    pub items: Vec<(BigUint, Vec<u8>, BigUint, Vec<u8>)>,
}

pub struct OtSender {
    group: &'static DhGroup,
    c: BigUint,
}

pub struct OtChooser {
    group: &'static DhGroup,
    bits: Vec<bool>,
    secrets: Vec<BigUint>,
}

/// Sender side, phase 1.
pub fn sender_setup(group: &'static DhGroup, rng: &mut impl RngCore) -> (OtSender, OtSetup) {
    let s = group.random_exponent(rng);
    let c = group.g.modpow(&s, &group.p);
    (OtSender { group, c: c.clone() }, OtSetup { c })
}

/// Chooser side, phase 2: one public key per choice bit.
pub fn choose(
    group: &'static DhGroup,
    setup: &OtSetup,
    bits: &[bool],
    rng: &mut impl RngCore,
) -> (OtChooser, OtChoices) {
    let mut secrets = Vec::with_capacity(bits.len());
    let mut pk0 = Vec::with_capacity(bits.len());
    for &b in bits {
        let k = group.random_exponent(rng);
        let pk_b = group.g.modpow(&k, &group.p);
        let pk = if b {
            // pk_0 = c / pk_1
            &setup.c * pk_b.modinv(&group.p).expect("group element invertible") % &group.p
        } else {
            pk_b
        };
        secrets.push(k);
        pk0.push(pk);
    }
    (OtChooser { group, bits: bits.to_vec(), secrets }, OtChoices { pk0 })
}

impl OtSender {
    /// Sender side, phase 3: encrypt both messages of every pair.
    pub fn payloads(
        &self,
        choices: &OtChoices,
        pairs: &[(Vec<u8>, Vec<u8>)],
        rng: &mut impl RngCore,
    ) -> Result<OtPayloads, OtError> {
        if choices.pk0.len() != pairs.len() {
            return Err(OtError::CountMismatch { expected: pairs.len(), got: choices.pk0.len() });
        }
        let group = self.group;
        let mut items = Vec::with_capacity(pairs.len());
        for (idx, ((m0, m1), pk0)) in pairs.iter().zip(&choices.pk0).enumerate() {
            if m0.len() != m1.len() {
                return Err(OtError::LengthMismatch(idx));
            }
            let pk1 = &self.c * pk0.modinv(&group.p).ok_or(OtError::Malformed("pk0 not invertible"))? % &group.p;
            let mut encrypt = |pk: &BigUint, m: &[u8], j: u8| {
                let r = group.random_exponent(rng);
                let u = group.g.modpow(&r, &group.p);
                let key = pk.modpow(&r, &group.p);
                let e = xor_stream(m, &derive_key(group, &key, idx as u64, j, m.len()));
                (u, e)
            };
            let (u0, e0) = encrypt(pk0, m0, 0);
            let (u1, e1) = encrypt(&pk1, m1, 1);
            items.push((u0, e0, u1, e1));
        }
        Ok(OtPayloads { items })
    }
}

impl OtChooser {
    /// Chooser side, final phase: decrypt the chosen message of each pair.
    pub fn receive(&self, payloads: &OtPayloads) -> Result<Vec<Vec<u8>>, OtError> {
        if payloads.items.len() != self.bits.len() {
            return Err(OtError::CountMismatch {
                expected: self.bits.len(),
                got: payloads.items.len(),
            });
        }
        let group = self.group;
        let mut out = Vec::with_capacity(self.bits.len());
        for (idx, ((u0, e0, u1, e1), (&b, k))) in payloads
            .items
            .iter()
            .zip(self.bits.iter().zip(&self.secrets))
            .enumerate()
        {
            let (u, e) = if b { (u1, e1) } else { (u0, e0) };
            let key = u.modpow(k, &group.p);
            out.push(xor_stream(e, &derive_key(group, &key, idx as u64, b as u8, e.len())));
        }
        Ok(out)
    }
}

fn derive_key(group: &DhGroup, element: &BigUint, index: u64, j: u8, len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len);
    let mut counter = 0u32;
    let element_bytes = group.element_to_bytes(element);
    while out.len() < len {
        let mut h = Sha256::new();
        h.update(b"pwstpc.ot");
        h.update(index.to_le_bytes());
        h.update([j]);
        h.update(counter.to_le_bytes());
        h.update(&element_bytes);
        out.extend_from_slice(&h.finalize());
        counter += 1;
    }
    out.truncate(len);
    out
}

fn xor_stream(data: &[u8], key: &[u8]) -> Vec<u8> {
    data.iter().zip(key).map(|(d, k)| d ^ k).collect()
}

// --- wire encodings ---------------------------------------------------

impl OtSetup {
    pub fn to_bytes(&self, group: &DhGroup) -> Vec<u8> {
        group.element_to_bytes(&self.c)
    }

    pub fn from_bytes(group: &DhGroup, bytes: &[u8]) -> Result<Self, OtError> {
        Ok(OtSetup { c: group.element_from_bytes(bytes)? })
    }
}

impl OtChoices {
    pub fn to_bytes(&self, group: &DhGroup) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.pk0.len() * group.element_len);
        for pk in &self.pk0 {
            out.extend_from_slice(&group.element_to_bytes(pk));
        }
        out
    }

    pub fn from_bytes(group: &DhGroup, bytes: &[u8]) -> Result<Self, OtError> {
        if !bytes.len().is_multiple_of(group.element_len) {
            return Err(OtError::Malformed("bad choices length"));
        }
        let pk0 = bytes
            .chunks(group.element_len)
            .map(|c| group.element_from_bytes(c))
            .collect::<Result<_, _>>()?;
        Ok(OtChoices { pk0 })
    }
}

impl OtPayloads {
    pub fn to_bytes(&self, group: &DhGroup, msg_len: usize) -> Vec<u8> {
        let mut out = Vec::new();
        for (u0, e0, u1, e1) in &self.items {
            out.extend_from_slice(&group.element_to_bytes(u0));
            debug_assert_eq!(e0.len(), msg_len);
            out.extend_from_slice(e0);
            out.extend_from_slice(&group.element_to_bytes(u1));
            debug_assert_eq!(e1.len(), msg_len);
            out.extend_from_slice(e1);
        }
        out
    }

    pub fn from_bytes(group: &DhGroup, msg_len: usize, bytes: &[u8]) -> Result<Self, OtError> {
        let item_len = 2 * (group.element_len + msg_len);
        if !bytes.len().is_multiple_of(item_len) {
            return Err(OtError::Malformed("bad payloads length"));
        }
        let mut items = Vec::with_capacity(bytes.len() / item_len);
        for chunk in bytes.chunks(item_len) {
            let el = group.element_len;
            let u0 = group.element_from_bytes(&chunk[..el])?;
            let e0 = chunk[el..el + msg_len].to_vec();
            let u1 = group.element_from_bytes(&chunk[el + msg_len..2 * el + msg_len])?;
            let e1 = chunk[2 * el + msg_len..].to_vec();
            items.push((u0, e0, u1, e1));
        }
        Ok(OtPayloads { items })
    }
}

/// In-process 1-of-2 transfer of all pairs; the building block the
/// protocols drive over a real transport.
pub fn ot_transfer(
    group: &'static DhGroup,
    pairs: &[(Vec<u8>, Vec<u8>)],
    bits: &[bool],
    sender_rng: &mut impl RngCore,
    chooser_rng: &mut impl RngCore,
) -> Result<Vec<Vec<u8>>, OtError> {
    let (sender, setup) = sender_setup(group, sender_rng);
    let (chooser, choices) = choose(group, &setup, bits, chooser_rng);
    let payloads = sender.payloads(&choices, pairs, sender_rng)?;
    chooser.receive(&payloads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn group() -> &'static DhGroup {
        DhGroup::insecure_test_512()
    }

    #[test]
    fn chooser_gets_first_message_for_zero() {
        let pairs = vec![(b"AAAAAAAAAA".to_vec(), b"BBBBBBBBBB".to_vec())];
        let mut s = ChaCha20Rng::seed_from_u64(1);
        let mut c = ChaCha20Rng::seed_from_u64(2);
        let got = ot_transfer(group(), &pairs, &[false], &mut s, &mut c).unwrap();
        assert_eq!(got[0], b"AAAAAAAAAA");
    }

    #[test]
    fn chooser_gets_second_message_for_one() {
        let pairs = vec![(b"AAAAAAAAAA".to_vec(), b"BBBBBBBBBB".to_vec())];
        let mut s = ChaCha20Rng::seed_from_u64(3);
        let mut c = ChaCha20Rng::seed_from_u64(4);
        let got = ot_transfer(group(), &pairs, &[true], &mut s, &mut c).unwrap();
        assert_eq!(got[0], b"BBBBBBBBBB");
    }

    #[test]
    fn thousand_random_transfers_all_correct() {
        let mut rng = StdRng::seed_from_u64(99);
        let mut s = ChaCha20Rng::seed_from_u64(5);
        let mut c = ChaCha20Rng::seed_from_u64(6);
        // batched: 10 batches x 100 transfers
        for batch in 0..10 {
            let pairs: Vec<(Vec<u8>, Vec<u8>)> = (0..100)
                .map(|_| {
                    let mut m0 = vec![0u8; 10];
                    let mut m1 = vec![0u8; 10];
                    rng.fill(&mut m0[..]);
                    rng.fill(&mut m1[..]);
                    (m0, m1)
                })
                .collect();
            let bits: Vec<bool> = (0..100).map(|_| rng.gen()).collect();
            let got = ot_transfer(group(), &pairs, &bits, &mut s, &mut c).unwrap();
            for i in 0..100 {
                let want = if bits[i] { &pairs[i].1 } else { &pairs[i].0 };
                assert_eq!(&got[i], want, "batch {batch} item {i}");
            }
        }
    }

    #[test]
    fn chooser_message_shape_is_independent_of_bits() {
        // structural stand-in for sender privacy: both keys multiply to c,
        // and the encoded choices have identical shape for any bit pattern
        let g = group();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let (_sender, setup) = sender_setup(g, &mut rng);
        let (_ch0, choices0) = choose(g, &setup, &[false, false], &mut ChaCha20Rng::seed_from_u64(8));
        let (_ch1, choices1) = choose(g, &setup, &[true, true], &mut ChaCha20Rng::seed_from_u64(8));
        assert_eq!(
            choices0.to_bytes(g).len(),
            choices1.to_bytes(g).len(),
        );
        for pk0 in choices0.pk0.iter().chain(&choices1.pk0) {
            let pk1 = &setup.c * pk0.modinv(&g.p).unwrap() % &g.p;
            assert_eq!((pk0 * &pk1) % &g.p, &setup.c % &g.p);
        }
    }

    #[test]
    fn message_encodings_round_trip() {
        let g = group();
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let (sender, setup) = sender_setup(g, &mut rng);
        let setup2 = OtSetup::from_bytes(g, &setup.to_bytes(g)).unwrap();
        assert_eq!(setup2.c, setup.c);
        let bits = [true, false, true];
        let (chooser, choices) = choose(g, &setup, &bits, &mut rng);
        let choices2 = OtChoices::from_bytes(g, &choices.to_bytes(g)).unwrap();
        assert_eq!(choices2.pk0, choices.pk0);
        let pairs: Vec<(Vec<u8>, Vec<u8>)> =
            (0..3).map(|i| (vec![i as u8; 10], vec![0xf0 | i as u8; 10])).collect();
        let payloads = sender.payloads(&choices2, &pairs, &mut rng).unwrap();
        let bytes = payloads.to_bytes(g, 10);
        let payloads2 = OtPayloads::from_bytes(g, 10, &bytes).unwrap();
        let got = chooser.receive(&payloads2).unwrap();
        for (i, &b) in bits.iter().enumerate() {
            assert_eq!(got[i], if b { pairs[i].1.clone() } else { pairs[i].0.clone() });
        }
    }

    #[test]
    fn mismatched_counts_rejected() {
        let g = group();
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let (sender, setup) = sender_setup(g, &mut rng);
        let (_, choices) = choose(g, &setup, &[true], &mut rng);
        let pairs = vec![(vec![0u8; 4], vec![1u8; 4]), (vec![2u8; 4], vec![3u8; 4])];
        assert!(matches!(
            sender.payloads(&choices, &pairs, &mut rng),
            Err(OtError::CountMismatch { .. })
        ));
    }
}
