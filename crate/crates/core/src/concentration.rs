//! Confidence radii: Hoeffding, Bernstein and Dvoretzky–Kiefer–Wolfowitz.

use alloc::format;

use crate::numeric::{ln, sqrt};
use crate::{Error, Result};

fn check(n: u64, delta: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::arg("sample count must be positive"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::arg(format!("failure probability {delta} outside (0, 1)")));
    }
    Ok(ln(2.0 / delta))
}

/// Radius `ε` with `P(|mean - E| > ε) <= delta` for `n` draws in an interval
/// of width `range_width`.
pub fn hoeffding_radius(n: u64, range_width: f64, delta: f64) -> Result<f64> {
    let l = check(n, delta)?;
    if !(range_width > 0.0) {
        return Err(Error::arg(format!("range width {range_width} must be positive")));
    }
    Ok(range_width * sqrt(l / (2.0 * n as f64)))
}

/// Larger root of `n ε² = ln(2/δ) (2σ² + 2cε/3)`.
pub fn bernstein_radius(n: u64, variance_bound: f64, magnitude_bound: f64, delta: f64) -> Result<f64> {
    let l = check(n, delta)?;
    if !(variance_bound >= 0.0 && magnitude_bound >= 0.0) {
        return Err(Error::arg("variance and magnitude bounds must be nonnegative"));
    }
    let n = n as f64;
    let b = 2.0 * magnitude_bound * l / 3.0;
    let disc = b * b + 8.0 * n * variance_bound * l;
    Ok((b + sqrt(disc)) / (2.0 * n))
}

/// Uniform-in-`x` radius for an empirical CDF of `n` draws.
pub fn dkw_radius(n: u64, delta: f64) -> Result<f64> {
    let l = check(n, delta)?;
    Ok(sqrt(l / (2.0 * n as f64)))
}
