//! Paillier additively homomorphic encryption with a signed-value
//! encoding on top of the plaintext ring.
//!
//! Generator fixed to `g = N + 1`, which turns encryption into one modular
//! exponentiation, and decryption runs through the CRT over the two prime
//! factors. Ciphertexts occupy `Z_{N^2}^*` and serialize to exactly `2T/8`
//! bytes for a `T`-bit modulus.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::RngCore;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PaillierError {
    #[error("modulus size {0} too small (need >= {MIN_MODULUS_BITS}, or >= {MIN_TEST_MODULUS_BITS} for insecure test keys)")]
    ModulusTooSmall(u64),
    #[error("modulus size {0} must be a multiple of 8")]
    ModulusNotByteAligned(u64),
    #[error("plaintext not in Z_N")]
    PlaintextOutOfRange,
    #[error("ciphertext outside Z_{{N^2}}*")]
    CiphertextOutOfGroup,
    #[error("signed value magnitude reaches N/2")]
    MagnitudeOverflow,
    #[error("hybrid intermediates would exceed the plaintext capacity (need {needed_bits} bits, modulus allows {available_bits})")]
    CapacityExceeded { needed_bits: u64, available_bits: u64 },
}

pub const MIN_MODULUS_BITS: u64 = 256;
pub const MIN_TEST_MODULUS_BITS: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub n: BigUint,
    pub n_squared: BigUint,
    /// Nominal modulus bit size T; ciphertexts serialize to 2T/8 bytes.
    pub bits: u64,
}

#[derive(Debug, Clone)]
pub struct SecretKey {
    p: BigUint,
    q: BigUint,
    p_squared: BigUint,
    q_squared: BigUint,
    /// (g^{p-1} mod p^2 - 1) / p, inverted mod p; same for q.
    hp: BigUint,
    hq: BigUint,
    /// q^{-1} mod p for the CRT recombination.
    q_inv_p: BigUint,
}

#[derive(Debug, Clone)]
pub struct Keypair {
    pub pk: PublicKey,
    pub sk: SecretKey,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext(BigUint);

/// Generates a keypair with an exactly `bits`-long modulus.
pub fn keygen(bits: u64, rng: &mut impl RngCore) -> Result<Keypair, PaillierError> {
    if bits < MIN_MODULUS_BITS {
        return Err(PaillierError::ModulusTooSmall(bits));
    }
    keygen_impl(bits, rng)
}

/// Test-only keygen allowing small moduli (>= 64 bits).
pub fn keygen_insecure_test_keys(bits: u64, rng: &mut impl RngCore) -> Result<Keypair, PaillierError> {
    if bits < MIN_TEST_MODULUS_BITS {
        return Err(PaillierError::ModulusTooSmall(bits));
    }
    keygen_impl(bits, rng)
}

fn keygen_impl(bits: u64, rng: &mut impl RngCore) -> Result<Keypair, PaillierError> {
    if !bits.is_multiple_of(8) {
        return Err(PaillierError::ModulusNotByteAligned(bits));
    }
    let half = bits / 2;
    loop {
        let p = random_prime(half, rng);
        let q = random_prime(half, rng);
        if p == q {
            continue;
        }
        let n = &p * &q;
        if n.bits() != bits {
            continue;
        }
        let n_squared = &n * &n;
        let p_squared = &p * &p;
        let q_squared = &q * &q;
        // g = n + 1: g^{p-1} mod p^2 = 1 + (p-1) n mod p^2
        let g = &n + 1u8;
        let hp = match l_function(&g.modpow(&(&p - 1u8), &p_squared), &p).modinv(&p) {
            Some(v) => v,
            None => continue,
        };
        let hq = match l_function(&g.modpow(&(&q - 1u8), &q_squared), &q).modinv(&q) {
            Some(v) => v,
            None => continue,
        };
        let q_inv_p = match q.modinv(&p) {
            Some(v) => v,
            None => continue,
        };
        return Ok(Keypair {
            pk: PublicKey { n, n_squared, bits },
            sk: SecretKey { p, q, p_squared, q_squared, hp, hq, q_inv_p },
        });
    }
}

/// `L(u) = (u - 1) / n` on multiples-of-n-plus-one inputs.
fn l_function(u: &BigUint, n: &BigUint) -> BigUint {
    (u - 1u8) / n
}

/// Uniform prime with the top two bits set (so products reach full size).
fn random_prime(bits: u64, rng: &mut impl RngCore) -> BigUint {
    loop {
        let mut candidate = rng.gen_biguint(bits);
        candidate.set_bit(bits - 1, true);
        candidate.set_bit(bits - 2, true);
        candidate.set_bit(0, true);
        if is_prime(&candidate, rng) {
            return candidate;
        }
    }
}

const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Miller-Rabin with 32 random bases after small-prime trial division.
fn is_prime(n: &BigUint, rng: &mut impl RngCore) -> bool {
    for &sp in &SMALL_PRIMES {
        let sp = BigUint::from(sp);
        if n == &sp {
            return true;
        }
        if (n % &sp).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u8;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let two = BigUint::from(2u8);
    'witness: for _ in 0..32 {
        let a = rng.gen_biguint_range(&two, &n_minus_1);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn encrypt(pk: &PublicKey, m: &BigUint, rng: &mut impl RngCore) -> Result<Ciphertext, PaillierError> {
    if m >= &pk.n {
        return Err(PaillierError::PlaintextOutOfRange);
    }
    // (1 + mN) r^N mod N^2
    let r = loop {
        let r = rng.gen_biguint_range(&BigUint::one(), &pk.n);
        if r.gcd(&pk.n).is_one() {
            break r;
        }
    };
    let gm = (BigUint::one() + m * &pk.n) % &pk.n_squared;
    let rn = r.modpow(&pk.n, &pk.n_squared);
    Ok(Ciphertext(gm * rn % &pk.n_squared))
}

pub fn decrypt(pk: &PublicKey, sk: &SecretKey, c: &Ciphertext) -> Result<BigUint, PaillierError> {
    if c.0 >= pk.n_squared || !c.0.gcd(&pk.n_squared).is_one() {
        return Err(PaillierError::CiphertextOutOfGroup);
    }
    let mp = l_function(&c.0.modpow(&(&sk.p - 1u8), &sk.p_squared), &sk.p) * &sk.hp % &sk.p;
    let mq = l_function(&c.0.modpow(&(&sk.q - 1u8), &sk.q_squared), &sk.q) * &sk.hq % &sk.q;
    // CRT: m = mq + q * ((mp - mq) q^{-1} mod p)
    let mq_mod_p = &mq % &sk.p;
    let diff = if mp >= mq_mod_p {
        (&mp - &mq_mod_p) % &sk.p
    } else {
        &sk.p - (&mq_mod_p - &mp) % &sk.p
    };
    let m = &mq + &sk.q * (diff * &sk.q_inv_p % &sk.p);
    Ok(m % &pk.n)
}

/// `dec(add(a, b)) = a + b mod N`.
pub fn add(pk: &PublicKey, a: &Ciphertext, b: &Ciphertext) -> Ciphertext {
    Ciphertext(&a.0 * &b.0 % &pk.n_squared)
}

/// `dec(scalar_mul(c, s)) = m * s mod N`; negative scalars go through the
/// exponent `s mod N`.
pub fn scalar_mul(pk: &PublicKey, c: &Ciphertext, s: &BigInt) -> Ciphertext {
    let n = BigInt::from(pk.n.clone());
    let e = s.mod_floor(&n).to_biguint().expect("mod_floor is non-negative");
    Ciphertext(c.0.modpow(&e, &pk.n_squared))
}

/// Fresh randomness on an existing ciphertext.
pub fn rerandomize(pk: &PublicKey, c: &Ciphertext, rng: &mut impl RngCore) -> Ciphertext {
    let r = loop {
        let r = rng.gen_biguint_range(&BigUint::one(), &pk.n);
        if r.gcd(&pk.n).is_one() {
            break r;
        }
    };
    Ciphertext(&c.0 * r.modpow(&pk.n, &pk.n_squared) % &pk.n_squared)
}

/// Signed-to-ring encoding: non-negative values map to themselves,
/// negative values to `N - |v|`. Requires `|v| < N/2`.
pub fn encode_signed(pk: &PublicKey, v: &BigInt) -> Result<BigUint, PaillierError> {
    let half = &pk.n >> 1;
    let mag = v.magnitude();
    if mag >= &half {
        return Err(PaillierError::MagnitudeOverflow);
    }
    if v.is_negative() {
        Ok(&pk.n - mag)
    } else {
        Ok(mag.clone())
    }
}

/// Inverse of [`encode_signed`] via the `N/2` threshold.
pub fn decode_signed(pk: &PublicKey, m: &BigUint) -> BigInt {
    let half = &pk.n >> 1;
    if m > &half {
        -BigInt::from(&pk.n - m)
    } else {
        BigInt::from(m.clone())
    }
}

/// Encrypt a signed value in one step.
pub fn encrypt_signed(
    pk: &PublicKey,
    v: &BigInt,
    rng: &mut impl RngCore,
) -> Result<Ciphertext, PaillierError> {
    encrypt(pk, &encode_signed(pk, v)?, rng)
}

/// Decrypt straight to a signed value.
pub fn decrypt_signed(
    pk: &PublicKey,
    sk: &SecretKey,
    c: &Ciphertext,
) -> Result<BigInt, PaillierError> {
    Ok(decode_signed(pk, &decrypt(pk, sk, c)?))
}

impl PublicKey {
    /// Big-endian, fixed `bits/8` bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let len = (self.bits / 8) as usize;
        let mut out = vec![0u8; len];
        let raw = self.n.to_bytes_be();
        out[len - raw.len()..].copy_from_slice(&raw);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PaillierError> {
        let bits = bytes.len() as u64 * 8;
        let n = BigUint::from_bytes_be(bytes);
        if n.bits() > bits || n.bits() == 0 {
            return Err(PaillierError::CiphertextOutOfGroup);
        }
        let n_squared = &n * &n;
        Ok(PublicKey { n, n_squared, bits })
    }

    pub fn ciphertext_len(&self) -> usize {
        (self.bits / 4) as usize
    }
}

impl Ciphertext {
    /// Big-endian, fixed `2T/8` bytes.
    pub fn to_bytes(&self, pk: &PublicKey) -> Vec<u8> {
        let len = pk.ciphertext_len();
        let mut out = vec![0u8; len];
        let raw = self.0.to_bytes_be();
        out[len - raw.len()..].copy_from_slice(&raw);
        out
    }

    pub fn from_bytes(pk: &PublicKey, bytes: &[u8]) -> Result<Self, PaillierError> {
        if bytes.len() != pk.ciphertext_len() {
            return Err(PaillierError::CiphertextOutOfGroup);
        }
        let c = BigUint::from_bytes_be(bytes);
        if c >= pk.n_squared {
            return Err(PaillierError::CiphertextOutOfGroup);
        }
        Ok(Ciphertext(c))
    }
}
