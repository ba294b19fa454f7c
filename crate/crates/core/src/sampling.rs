//! Deterministic sample-point generators shared by the probabilistic tests.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed used by every "≢ 0 by sampling" test in the crate.
pub const DEFAULT_SAMPLE_SEED: u64 = 0x5eed_cafe;

/// `count` points drawn uniformly (by area) from `r_in <= |z| <= r_out`.
pub fn annulus_points(count: usize, r_in: f64, r_out: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u: f64 = rng.gen();
            let r = (r_in * r_in + u * (r_out * r_out - r_in * r_in)).sqrt();
            let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            Complex64::from_polar(r, t)
        })
        .collect()
}

/// The probe set used by the identically-zero test: 64 points in `0.5 <= |z| <= 2`.
pub fn zero_test_points() -> Vec<Complex64> {
    annulus_points(ZERO_TEST_POINTS, 0.5, 2.0, DEFAULT_SAMPLE_SEED)
}

pub const ZERO_TEST_POINTS: usize = 64;
