//! Deterministic RNG streams for Monte Carlo trials.
//!
//! Every trial owns an independent stream derived from `(seed, trial)`, so
//! results are identical no matter how trials are scheduled across threads.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// RNG stream for one Monte Carlo trial.
///
/// Streams for different trial indices never overlap.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One draw from the circularly-symmetric complex Gaussian CN(0, 1).
pub fn standard_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// One draw from the real Gaussian N(0, sigma^2).
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    let x: f64 = rng.sample(StandardNormal);
    sigma * x
}
