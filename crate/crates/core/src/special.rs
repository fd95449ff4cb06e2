//! Gaussian density/distribution helpers and Beta/Gamma wrappers.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn phi(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Derivative of the standard normal density, `-x phi(x)`.
#[inline]
pub fn phi_dot(x: f64) -> f64 {
    -x * phi(x)
}

/// Standard normal distribution function.
#[inline]
pub fn big_phi(x: f64) -> f64 {
    if x == f64::INFINITY {
        1.0
    } else if x == f64::NEG_INFINITY {
        0.0
    } else {
        0.5 * erfc(-x / std::f64::consts::SQRT_2)
    }
}

/// Standard normal quantile function.
pub fn big_phi_inv(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Beta function through log-gamma.
pub fn beta(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

pub fn factorial(p: usize) -> f64 {
    (1..=p).fold(1.0, |acc, k| acc * k as f64)
}
