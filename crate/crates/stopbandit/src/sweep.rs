//! Horizon sweeps and the log-log regret fit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::experiment::{run, ExperimentConfig};
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub horizon: u64,
    pub replicates: u32,
    pub mean_regret: f64,
    pub std_error: f64,
    /// Runs in which the doubling schedule was cut short by the horizon.
    pub truncated: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    /// Some mean regret was not positive, so `ln(regret + 1)` was fitted.
    pub offset: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub fit: Fit,
}

/// Least squares of `y` on `x`.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits `ln R(T) = slope · ln T + intercept`.
pub fn fit_exponent(horizons: &[u64], regrets: &[f64]) -> Fit {
    let offset = regrets.iter().any(|&r| r <= 0.0);
    let x: Vec<f64> = horizons.iter().map(|&t| (t as f64).ln()).collect();
    let y: Vec<f64> = regrets.iter().map(|&r| if offset { (r.max(0.0) + 1.0).ln() } else { r.ln() }).collect();
    let (slope, intercept) = least_squares(&x, &y);
    let residuals = x.iter().zip(&y).map(|(a, b)| b - (slope * a + intercept)).collect();
    Fit { slope, intercept, residuals, offset }
}

fn check_horizons(horizons: &[u64]) -> Result<(), HarnessError> {
    if horizons.len() < 4 {
        return Err(HarnessError::Config("a sweep needs at least four horizons".into()));
    }
    let ratio = horizons[1] as f64 / horizons[0] as f64;
    let geometric = ratio > 1.0
        && horizons.windows(2).all(|w| ((w[1] as f64 / w[0] as f64) / ratio - 1.0).abs() < 0.01);
    if !geometric {
        return Err(HarnessError::Config("sweep horizons must be geometrically spaced".into()));
    }
    Ok(())
}

/// Runs `cfg.replicates` replicates at each horizon in parallel and fits
/// the growth exponent of the mean cumulative regret.
pub fn sweep_and_fit(cfg: &ExperimentConfig, horizons: &[u64]) -> Result<SweepResult, HarnessError> {
    check_horizons(horizons)?;
    let reps = cfg.replicates.max(1);
    let jobs: Vec<(usize, u32)> = (0..horizons.len()).flat_map(|h| (0..reps).map(move |k| (h, k))).collect();
    let results = jobs
        .par_iter()
        .map(|&(h, k)| {
            let run_cfg = ExperimentConfig { horizon: horizons[h], ..cfg.replicate(k) };
            let e = run(&run_cfg, false)?;
            Ok((h, e.trace.cum_regret, e.report.is_some_and(|r| r.truncated)))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let rows: Vec<SweepRow> = horizons
        .iter()
        .enumerate()
        .map(|(h, &horizon)| {
            let xs: Vec<f64> = results.iter().filter(|r| r.0 == h).map(|r| r.1).collect();
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let var = if n > 1.0 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            SweepRow {
                horizon,
                replicates: reps,
                mean_regret: mean,
                std_error: (var / n).sqrt(),
                truncated: results.iter().filter(|r| r.0 == h && r.2).count() as u32,
            }
        })
        .collect();
    let fit = fit_exponent(horizons, &rows.iter().map(|r| r.mean_regret).collect::<Vec<_>>());
    Ok(SweepResult { rows, fit })
}

/// `2^lo, 2^(lo+1), …, 2^hi`.
pub fn powers_of_two(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|k| 1u64 << k).collect()
}
