//! Deterministic random-number streams addressed by a path of integer tags,
//! e.g. `(seed, case, replication, level, replicate, attempt)`.
//!
//! Every stream is a function of its path only, so results do not depend on
//! how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Stream {
    state: u64,
}

impl Stream {
    pub fn root(seed: u64) -> Self {
        Self {
            state: splitmix64(seed ^ 0x5EED_F0110_u64),
        }
    }

    pub fn child(self, tag: u64) -> Self {
        Self {
            state: splitmix64(self.state ^ splitmix64(tag.wrapping_add(0xA5A5_5A5A_0F0F_F0F0))),
        }
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut s = self.state;
        for chunk in key.chunks_exact_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

/// Top-level tags separating the uses of one seed.
pub(crate) mod tag {
    pub const DATA: u64 = 1;
    pub const BOOTSTRAP: u64 = 2;
}
