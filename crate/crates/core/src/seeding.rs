//! Deterministic seed derivation.
//!
//! Every stochastic component draws from its own `ChaCha8Rng` seeded by
//! mixing a root seed with the component's coordinates (particle index,
//! iteration, repeat number, ...). Derived streams are independent of
//! evaluation order, so parallel and sequential runs of the same root seed
//! produce bit-identical results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; decorrelates consecutive inputs.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fold a sequence of coordinates into one seed.
pub fn derive_seed(root: u64, coords: &[u64]) -> u64 {
    let mut acc = mix(root);
    for (i, &c) in coords.iter().enumerate() {
        acc = mix(acc ^ mix(c.wrapping_add(i as u64 + 1)));
    }
    acc
}

/// RNG for the stream identified by `coords` under `root`.
pub fn stream_rng(root: u64, coords: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, coords))
}
