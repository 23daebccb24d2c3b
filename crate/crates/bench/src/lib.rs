//! Fixtures shared by the benchmarks.

use posdef_core::matrix::{ConfigRef, Generator, PointConfig};
use posdef_core::search::DEFAULT_SEED;

/// A Gaussian cloud of `m` points in `R^n`.
pub fn cloud(m: usize, n: usize, scale: f64) -> PointConfig {
    PointConfig::generate(&ConfigRef::new(Generator::RandomGaussian, DEFAULT_SEED, m, n, scale))
        .expect("valid configuration")
}

/// Points spread over `[0, hi]`, crossing the band around 1.
pub fn grid(count: usize, hi: f64) -> Vec<f64> {
    posdef_core::kernel::linspace(0.0, hi, count)
}
