//! Deterministic seed derivation, so per-sequence and per-frame randomness
//! is reproducible and independent of iteration order.

/// Derive a child seed from a base seed and a path of indices
/// (splitmix64-style mixing; stable across platforms).
pub(crate) fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut state = mix(base ^ 0x6A09_E667_F3BC_C908);
    for &p in parts {
        state = mix(state.wrapping_add(p).wrapping_add(0x9E37_79B9_7F4A_7C15));
    }
    state
}

fn mix(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
