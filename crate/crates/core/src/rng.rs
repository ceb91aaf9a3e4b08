//! Seed derivation for reproducible, worker-count independent sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SampleRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// An RNG stream that depends only on `(seed, stream, ordinal)`.
pub fn derive_rng(seed: u64, stream: u64, ordinal: u64) -> SampleRng {
    let mixed = splitmix64(seed ^ splitmix64(stream.wrapping_add(splitmix64(ordinal))));
    ChaCha8Rng::seed_from_u64(mixed)
}

/// Stable stream id for a textual label (FNV-1a).
pub fn stream_id(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}
