//! Reproducible per-user randomness.
//!
//! Every random decision in the crate is driven by a [`RandomSource`], a
//! `(seed, stream_id)` pair. The pair keys a ChaCha8 stream cipher used as a
//! counter-based generator: the seed selects the key and the stream id selects
//! the nonce, so user `i`'s draws depend only on `(seed, i)` and never on the
//! order in which users are processed or on how work is split across threads.
//!
//! Not suitable for secrets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator handed to encoders.
pub type SourceRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RandomSource {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomSource {
    pub const fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> SourceRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Child source for a labelled sub-experiment. The stream id is kept, the
    /// seed is re-keyed, so `derive(a)` and `derive(b)` never share draws.
    pub fn derive(&self, label: u64) -> Self {
        Self {
            seed: mix(self.seed, label),
            stream_id: self.stream_id,
        }
    }

    /// The source for user (or item) `stream_id` under this source's seed.
    pub fn stream(&self, stream_id: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id,
        }
    }
}

/// SplitMix64 finaliser applied to `seed ^ label'`.
pub fn mix(seed: u64, label: u64) -> u64 {
    let mut z = seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
