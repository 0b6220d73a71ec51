//! Bandit learners for prophet inequality and Pandora's box under value-only
//! feedback, with exact piecewise distributions, brute-force oracles and
//! round-by-round simulators.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the CLI and
//! the experiment harness live in the `stopbandit` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod concentration;
pub mod distributions;
pub mod doubling;
pub mod environments;
pub mod oracle;
pub mod pandora_learner;
pub mod prophet_learner;

mod error;
mod numeric;

pub use error::{Error, Result};
pub use numeric::{ln, sqrt, LevelSet, PiecewiseLinear};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Threshold sentinel meaning "never accept" (prophet) or "never stop before
/// this box" (Pandora). Compares above every value in `[0, 1]`.
pub const ABOVE: f64 = f64::INFINITY;

/// Counter-based generator used for every random draw in the crate.
pub type SimRng = ChaCha8Rng;

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw from `[0, 1)` with 53 bits of resolution.
pub fn uniform01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// True if `x` is a threshold the simulators accept: a number in `[0, 1]` or
/// [`ABOVE`].
pub fn is_threshold(x: f64) -> bool {
    x == ABOVE || (0.0..=1.0).contains(&x)
}
