//! Reproducible stream-indexed random number generators.
//!
//! Every randomized sweep derives one generator per sweep coordinate from the
//! master seed, so results do not depend on scheduling or evaluation order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a generator for the stream identified by `ids` under `master`.
///
/// Distinct id tuples give statistically independent streams; the same tuple
/// always gives the same stream.
pub fn stream_rng(master: u64, ids: &[u64]) -> ChaCha8Rng {
    let mut state = master ^ 0x5851_F42D_4C95_7F2D;
    let mut key = splitmix64(&mut state);
    for &id in ids {
        state ^= id.wrapping_mul(0xA24B_AED4_963E_E407);
        key ^= splitmix64(&mut state).rotate_left(17);
    }
    ChaCha8Rng::seed_from_u64(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream_rng(7, &[1, 2]).random();
        let b: u64 = stream_rng(7, &[1, 2]).random();
        let c: u64 = stream_rng(7, &[2, 1]).random();
        let d: u64 = stream_rng(8, &[1, 2]).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
