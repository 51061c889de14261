//! Seed derivation for non-overlapping per-trial randomness.

/// One round of the splitmix64 output function.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a base seed and a path of tags (cell index,
/// trial index, stream label, …). Distinct paths map to distinct streams
/// with collision probability at the birthday bound of a 64-bit mix.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(base ^ 0xA076_1D64_78BD_642F);
    for &t in tags {
        state = splitmix64(state ^ splitmix64(t));
    }
    state
}
