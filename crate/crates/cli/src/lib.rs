//! Experiment runner for the Givens-vector identification library: the two
//! instability fixtures, the stability sweep, timing benchmarks and the
//! Monte Carlo accuracy study. Every command produces a CSV table.

pub mod bench;
pub mod config;
pub mod csvout;
pub mod fixtures;
pub mod identify;
pub mod stability;

use anyhow::Result;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use config::{InputVariant, Settings};
pub use csvout::{fmt_f64, Table};

/// Seed of trial `index`, independent of how trials are scheduled.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// Runs `f` inside a pool of `threads` workers (0 for the default size).
pub fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    Ok(pool.install(f))
}

/// Mean of the finite entries, NaN when there are none.
pub fn finite_mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, count) = xs.into_iter().filter(|x| x.is_finite()).fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}
