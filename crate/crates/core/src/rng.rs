//! Seeded random streams.
//!
//! Every random draw in an experiment comes from a ChaCha8 stream addressed by
//! `(master seed, index, purpose)`. The index is usually the episode or trial
//! number, so results do not depend on how work is scheduled across threads.
//!
//! ChaCha is a counter-mode generator: the 256-bit key is derived from
//! `(master, index)` with SplitMix64 and the purpose selects one of its 2^64
//! independent streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// What a stream is used for. The discriminant is the ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    /// Particle discretisation of a continuous prior.
    Prior = 1,
    /// Drawing the hidden parameter.
    Environment = 2,
    /// Bernoulli rewards of played actions.
    Rewards = 3,
    /// Posterior sampling inside Thompson Sampling.
    Policy = 4,
    /// Bernoulli reward the optimal action would have produced.
    Counterfactual = 5,
    /// Random posteriors for information-ratio scans.
    Scan = 6,
    /// Random instances for lemma sweeps.
    Lemma = 7,
    /// Candidate points for epsilon-net construction.
    NetBuild = 8,
    /// Fresh points for epsilon-net coverage validation.
    NetValidate = 9,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Root of a family of independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamTree {
    master: u64,
}

impl StreamTree {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// A child tree, for nesting (for example one tree per `(d, β)` cell of a sweep).
    pub fn child(&self, index: u64) -> Self {
        Self {
            master: splitmix64(self.master ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d))),
        }
    }

    pub fn stream(&self, index: u64, purpose: Purpose) -> StreamRng {
        let mut key = [0u8; 32];
        let mut state = splitmix64(self.master) ^ splitmix64(!index);
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(purpose as u64);
        rng
    }
}
