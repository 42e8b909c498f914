//! Standard-normal helpers built on erfc, stable in the far tails.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use statrs::function::erf::{erfc, erfc_inv};

/// Standard normal density.
pub(crate) fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF.
pub(crate) fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail P(X > x), accurate for large positive x.
pub(crate) fn survival(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Inverse CDF.
pub(crate) fn quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}
