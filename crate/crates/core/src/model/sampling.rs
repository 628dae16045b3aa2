use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use super::spec::ChartSpec;

pub const DEFAULT_POINTS: usize = 100;
pub const DEFAULT_SEED: u64 = 42;

/// Uniform in `[0, 1)` from the top 53 bits.
fn unit(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `count` points drawn uniformly from the chart's domain box.
pub fn sample_points(chart: &ChartSpec, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..count).map(|_| chart.domain.iter().map(|[lo, hi]| lo + (hi - lo) * unit(&mut rng)).collect()).collect()
}

/// Uniform reals in `[lo, hi)`; used for random coefficients.
pub fn sample_uniform(count: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..count).map(|_| lo + (hi - lo) * unit(&mut rng)).collect()
}
