//! Integration over the hidden-variable distribution.
//!
//! Monte Carlo work is split into fixed-size chunks. Chunk `k` draws from
//! ChaCha8 stream `k` of the master seed and chunk partials are merged in
//! ascending chunk order, so a result depends only on `(n, seed)` and never
//! on how many threads processed the chunks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const DEFAULT_QUADRATURE_NODES: usize = 4096;

/// Samples per Monte Carlo chunk.
pub const CHUNK: u64 = 8192;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Integration {
    Quadrature {
        #[serde(default = "default_nodes")]
        n: usize,
    },
    MonteCarlo {
        n: u64,
        seed: u64,
    },
}

fn default_nodes() -> usize {
    DEFAULT_QUADRATURE_NODES
}

impl Default for Integration {
    fn default() -> Self {
        Integration::Quadrature { n: DEFAULT_QUADRATURE_NODES }
    }
}

impl Integration {
    pub fn quadrature() -> Self {
        Self::default()
    }

    pub fn monte_carlo(n: u64, seed: u64) -> Self {
        Integration::MonteCarlo { n, seed }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Integration::Quadrature { n: 0 } | Integration::MonteCarlo { n: 0, .. } => {
                Err(invalid("integration needs n >= 1"))
            }
            _ => Ok(()),
        }
    }
}

/// Partial result that can absorb the partial of the next chunk.
pub trait Merge {
    fn merge(&mut self, later: Self);
}

/// Runs `n` Monte Carlo steps in seeded chunks and merges the partials in order.
///
/// `step` is called once per sample with that chunk's accumulator, its RNG
/// and the global sample index.
pub fn chunked<A, I, F>(n: u64, seed: u64, init: I, step: F) -> A
where
    A: Merge + Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, &mut ChaCha8Rng, u64) + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let run_chunk = |k: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k);
        let mut acc = init();
        let len = CHUNK.min(n - k * CHUNK);
        for i in 0..len {
            step(&mut acc, &mut rng, k * CHUNK + i);
        }
        acc
    };

    #[cfg(feature = "parallel")]
    let partials: Vec<A> = {
        use rayon::prelude::*;
        (0..chunks).into_par_iter().map(run_chunk).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<A> = (0..chunks).map(run_chunk).collect();

    let mut it = partials.into_iter();
    let mut total = it.next().unwrap_or_else(&init);
    for p in it {
        total.merge(p);
    }
    total
}

/// Running sums of a scalar and its square.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        (self.variance() / self.count as f64).sqrt()
    }
}

impl Merge for Moments {
    fn merge(&mut self, later: Self) {
        self.count += later.count;
        self.sum += later.sum;
        self.sum_sq += later.sum_sq;
    }
}

impl<T: Merge> Merge for Vec<T> {
    fn merge(&mut self, later: Self) {
        for (a, b) in self.iter_mut().zip(later) {
            a.merge(b);
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;

    fn mean_of_uniform(n: u64, seed: u64) -> Moments {
        chunked(n, seed, Moments::default, |m, rng, _| m.push(rng.random::<f64>()))
    }

    #[test]
    fn chunked_is_reproducible_and_counts_every_sample() {
        let a = mean_of_uniform(3 * CHUNK + 17, 9);
        let b = mean_of_uniform(3 * CHUNK + 17, 9);
        assert_eq!(a, b);
        assert_eq!(a.count, 3 * CHUNK + 17);
        assert!((a.mean() - 0.5).abs() < 0.01);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn chunked_ignores_thread_count() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mean_of_uniform(10 * CHUNK + 3, 4))
        };
        let one = run(1);
        assert_eq!(one, run(3));
        assert_eq!(one, run(8));
    }

    #[test]
    fn moments_of_constant_have_zero_spread() {
        let mut m = Moments::default();
        for _ in 0..10 {
            m.push(1.0);
        }
        assert_eq!(m.variance(), 0.0);
        assert_eq!(m.stderr(), 0.0);
    }
}
