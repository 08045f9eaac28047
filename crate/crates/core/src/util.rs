//! Small shared helpers.

/// log2 of a power of two.
pub fn log2_exact(v: u32) -> u8 {
    debug_assert!(v.is_power_of_two());
    v.trailing_zeros() as u8
}

/// Unsigned little-endian bits of `v`, `width` of them.
pub fn bits_le(v: u64, width: usize) -> Vec<bool> {
    (0..width).map(|b| (v >> b) & 1 == 1).collect()
}

/// Reassembles little-endian bits into an unsigned integer.
pub fn from_bits_le(bits: &[bool]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i))
}


use num_bigint::BigUint;

/// Little-endian bits of a big unsigned integer, `width` of them.
pub fn biguint_bits_le(v: &BigUint, width: usize) -> Vec<bool> {
    (0..width).map(|i| v.bit(i as u64)).collect()
}

/// Reassembles little-endian bits into a big unsigned integer.
pub fn biguint_from_bits_le(bits: &[bool]) -> BigUint {
    let mut v = BigUint::default();
    for (i, &b) in bits.iter().enumerate() {
        if b {
            v.set_bit(i as u64, true);
        }
    }
    v
}
