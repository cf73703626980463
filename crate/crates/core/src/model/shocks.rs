use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Counter-based stream of lognormal productivity shocks.
///
/// The `index`-th draw is a pure function of `(master_seed, stream_id, index)`:
/// ChaCha8 keyed by the seed, with the stream id selecting the ChaCha stream
/// and the index selecting the word position. Draw order and parallelism do
/// not affect values.
#[derive(Debug, Clone)]
pub struct ShockStream {
    master_seed: u64,
    stream_id: u64,
    mu: f64,
    sigma: f64,
    base: ChaCha8Rng,
}

/// 32-bit words consumed per draw (two `u64` uniforms).
const WORDS_PER_DRAW: u128 = 4;

impl ShockStream {
    pub fn new(master_seed: u64, stream_id: u64, mu: f64, sigma: f64) -> Self {
        let mut base = ChaCha8Rng::seed_from_u64(master_seed);
        base.set_stream(stream_id);
        ShockStream {
            master_seed,
            stream_id,
            mu,
            sigma,
            base,
        }
    }

    /// Same underlying normals under a different log-productivity law.
    pub fn with_law(&self, mu: f64, sigma: f64) -> Self {
        ShockStream {
            mu,
            sigma,
            ..self.clone()
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Standard normal at `index` (Box-Muller on two uniforms).
    pub fn standard_normal(&self, index: u64) -> f64 {
        let mut rng = self.base.clone();
        rng.set_word_pos(index as u128 * WORDS_PER_DRAW);
        box_muller(rng.next_u64(), rng.next_u64())
    }

    /// Productivity `A = exp(mu + sigma z)` at `index`.
    pub fn draw(&self, index: u64) -> f64 {
        libm::exp(self.mu + self.sigma * self.standard_normal(index))
    }

    /// Standard normals for `start..start + count`, generated sequentially.
    /// Identical to calling [`ShockStream::standard_normal`] per index.
    pub fn normals(&self, start: u64, count: usize) -> Vec<f64> {
        let mut rng = self.base.clone();
        rng.set_word_pos(start as u128 * WORDS_PER_DRAW);
        (0..count)
            .map(|_| box_muller(rng.next_u64(), rng.next_u64()))
            .collect()
    }
}

fn unit_open(bits: u64) -> f64 {
    // (0, 1): 53 random bits, offset by half an ulp of the grid.
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn box_muller(u: u64, v: u64) -> f64 {
    let r = libm::sqrt(-2.0 * libm::log(unit_open(u)));
    r * libm::cos(core::f64::consts::TAU * unit_open(v))
}
