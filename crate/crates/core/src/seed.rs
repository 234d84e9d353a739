//! Named, reproducible randomness streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha stream keyed by a
//! top-level `u64` seed and a slash-separated derivation path such as
//! `"channel"` or `"noise/trial-17"`. Two components that use different paths
//! never share a stream, so any of them can be replayed on its own.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used throughout the crate.
pub type StreamRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the 64-bit seed for `path` under `root`.
///
/// The mapping is a fixed function of its inputs (FNV-1a over the path bytes
/// followed by a SplitMix64 finalizer), so it is stable across platforms and
/// releases.
pub fn derive_seed(root: u64, path: &str) -> u64 {
    let mut h = FNV_OFFSET ^ splitmix64(root);
    for &byte in path.as_bytes() {
        h ^= u64::from(byte);
        h = h.wrapping_mul(FNV_PRIME);
    }
    splitmix64(h ^ root.rotate_left(17))
}

/// Returns the stream for `path` under `root`.
pub fn stream(root: u64, path: &str) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(root, path))
}

/// Per-trial stream used by Monte Carlo estimators: `"<prefix>/trial-<i>"`.
pub fn trial_stream(root: u64, prefix: &str, trial: u64) -> StreamRng {
    stream(root, &format!("{prefix}/trial-{trial}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_path_same_stream() {
        let a: Vec<u64> = stream(7, "channel").random_iter().take(4).collect();
        let b: Vec<u64> = stream(7, "channel").random_iter().take(4).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn paths_and_roots_separate_streams() {
        assert_ne!(derive_seed(7, "channel"), derive_seed(7, "coins"));
        assert_ne!(derive_seed(7, "channel"), derive_seed(8, "channel"));
        assert_ne!(
            derive_seed(1, "noise/trial-1"),
            derive_seed(1, "noise/trial-10")
        );
    }

    #[test]
    fn derivation_is_frozen() {
        // Changing this value silently changes every seeded experiment.
        assert_eq!(derive_seed(0, ""), 6566800829925814604);
        assert_eq!(derive_seed(42, "channel"), 5821191968221476585);
    }
}
