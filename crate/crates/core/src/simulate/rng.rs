use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Deterministic random source addressed by `(seed, stream)`.
///
/// Streams of one seed are independent ChaCha8 sequences, so splitting work
/// by stream id reproduces the same numbers regardless of thread count.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

/// Stream id of path `index` in seed block `block`: the block occupies the
/// high 24 bits, the index the low 40.
pub fn stream_id(block: u64, index: u64) -> u64 {
    debug_assert!(index < 1 << 40);
    (block << 40) | index
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// `Exp(rate)` by inversion; `∞` when `rate = 0`.
    pub fn exponential(&mut self, rate: f64) -> f64 {
        let u = 1.0 - self.uniform();
        -u.ln() / rate
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Index `i` with probability proportional to the gaps of the
    /// nondecreasing cumulative weights `cum`.
    pub fn categorical(&mut self, cum: &[f64]) -> usize {
        let total = *cum.last().expect("non-empty weights");
        let target = self.uniform() * total;
        cum.partition_point(|c| *c <= target).min(cum.len() - 1)
    }

    pub fn inner(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}
