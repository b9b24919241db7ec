//! Deterministic seed derivation.
//!
//! Every stochastic sub-operation of a run draws from its own ChaCha stream,
//! seeded by hashing the run's root seed together with a label path such as
//! `("optimum", iteration, m, n)`. Changing the number of hyperparameter
//! samples or optima therefore never shifts the draws used elsewhere.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type Rng = ChaCha20Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn hash_label(label: &str) -> u64 {
    // FNV-1a; stable across platforms and releases.
    label
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// Derives a child seed from `parent`, a string label and integer indices.
pub fn derive_seed(parent: u64, label: &str, indices: &[u64]) -> u64 {
    let mut h = splitmix64(parent ^ hash_label(label));
    for &i in indices {
        h = splitmix64(h ^ splitmix64(i));
    }
    h
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn derive_rng(parent: u64, label: &str, indices: &[u64]) -> Rng {
    rng_from_seed(derive_seed(parent, label, indices))
}
