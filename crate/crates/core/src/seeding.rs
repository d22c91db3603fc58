//! Deterministic seed derivation.
//!
//! Every randomized stage derives its own seed from a global seed plus a
//! stage label, so unrelated configuration changes never shift the random
//! streams of other stages.

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

/// FNV-1a over an arbitrary byte string.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Derive a child seed from a base seed and a label.
pub fn derive_seed(base: u64, label: &str) -> u64 {
    let mut buf = Vec::with_capacity(8 + label.len());
    buf.extend_from_slice(&base.to_le_bytes());
    buf.extend_from_slice(label.as_bytes());
    fnv1a(&buf)
}

/// Derive a child seed from a base seed and an index (e.g. ensemble member).
pub fn derive_indexed_seed(base: u64, label: &str, index: u64) -> u64 {
    let mut buf = Vec::with_capacity(16 + label.len());
    buf.extend_from_slice(&base.to_le_bytes());
    buf.extend_from_slice(label.as_bytes());
    buf.extend_from_slice(&index.to_le_bytes());
    fnv1a(&buf)
}
