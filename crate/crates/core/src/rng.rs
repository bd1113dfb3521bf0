//! Counter-based random streams.
//!
//! Every random draw in a path is keyed by `(master seed, path index,
//! domain, counter)`, so a path's randomness does not depend on which worker
//! runs it or in which order paths are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Which part of the computation a stream feeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Response = 1,
    Estimator = 2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeededStream {
    pub master: u64,
    pub path: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeededStream {
    pub fn new(master: u64, path: u64) -> Self {
        SeededStream { master, path }
    }

    /// Fresh generator for draw `counter` in `domain`.
    pub fn rng(&self, domain: Domain, counter: u64) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        let mut h = splitmix(self.master);
        h = splitmix(h ^ self.path);
        h = splitmix(h ^ domain as u64);
        h = splitmix(h ^ counter);
        for chunk in seed.chunks_mut(8) {
            h = splitmix(h);
            chunk.copy_from_slice(&h.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }

    /// Generator for the response at observation index `i` (0-based).
    pub fn observation_rng(&self, i: u64) -> ChaCha8Rng {
        self.rng(Domain::Response, i)
    }

    /// Seed for the estimator's multistart sampler at adaptive step `k`.
    pub fn estimator_seed(&self, k: u64) -> u64 {
        splitmix(splitmix(splitmix(self.master) ^ self.path) ^ (Domain::Estimator as u64) << 32 ^ k)
    }
}
