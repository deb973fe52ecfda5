//! Seeded ChaCha8 generator with portable float and integer draws.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::RealMatrix;
use crate::error::{argument, Result};

/// Deterministic random source. Identical `(seed, stream)` pairs yield
/// identical sequences on every platform.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent sub-sequence of the same seed.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`. Caller guarantees `lo < hi`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        loop {
            let v = lo + (hi - lo) * self.unit();
            if v < hi {
                return v;
            }
        }
    }

    /// Unbiased integer on `[0, n)`; `n` must be nonzero.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let zone = n * (u64::MAX / n);
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// `m` distinct indices drawn uniformly without replacement from `0..n`.
    pub fn sample_indices(&mut self, n: usize, m: usize) -> Vec<usize> {
        let m = m.min(n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..m {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(m);
        pool
    }
}

/// `rows x cols` matrix of i.i.d. draws from `[lo, hi)`, filled row-major.
pub fn uniform_matrix(rng: &mut Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Result<RealMatrix> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return argument(format!("invalid uniform bounds [{lo}, {hi})"));
    }
    if rows == 0 || cols == 0 {
        return argument(format!("uniform matrix needs positive shape, got {rows}x{cols}"));
    }
    let data = (0..rows * cols).map(|_| rng.uniform(lo, hi)).collect();
    RealMatrix::from_vec(rows, cols, data)
}
