//! Phase-doubling driver shared by every learner: run refinement phases at
//! `ε = 1, 1/2, 1/4, …` until `ε` reaches the `n^{α/2} ln T / √T` floor, then
//! exploit the final action set.

use alloc::vec::Vec;

use crate::environments::{Environment, PhaseNote, RoundKind};
use crate::numeric::{powf, sqrt};
use crate::prophet_learner::{log_horizon, Flag};
use crate::{Error, Result};

/// Multipliers in front of the round counts.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Constants {
    /// Initialization rounds per `√T ln T`.
    pub c_init: f64,
    /// Exploration rounds per `ln T / ε²`.
    pub c_explore: f64,
    /// Fresh CDF samples per `n² ln T / ε` for the general Pandora learner.
    pub c_estimate: f64,
    /// Fresh CDF samples per `ln T / ε` for the two-box Pandora learner.
    pub c_estimate_fixed: f64,
}

impl Constants {
    /// Defaults sized for desk-scale horizons.
    pub const DESK: Constants =
        Constants { c_init: 4.0, c_explore: 4.0, c_estimate: 64.0, c_estimate_fixed: 4.0 };

    /// The constants written in the analysis.
    pub const PAPER: Constants =
        Constants { c_init: 1000.0, c_explore: 1000.0, c_estimate: 1e5, c_estimate_fixed: 1000.0 };

    pub fn preset(name: &str) -> Option<Constants> {
        match name {
            "desk" => Some(Self::DESK),
            "paper" => Some(Self::PAPER),
            _ => None,
        }
    }
}

impl Default for Constants {
    fn default() -> Self {
        Self::DESK
    }
}

/// What one refinement phase reports back to the driver.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhaseSummary {
    pub phase: u32,
    pub epsilon: f64,
    pub rounds: u64,
    pub flags: Vec<Flag>,
    /// Swap tests run in this phase (Pandora only).
    pub swaptests: usize,
}

/// An action-set-updating subroutine the driver can run.
pub trait Refiner<E: Environment> {
    /// Problem size `n`.
    fn size(&self) -> usize;

    fn initialize(&mut self, env: &mut E) -> Result<()>;

    /// One phase at accuracy `epsilon`.
    fn refine(&mut self, env: &mut E, epsilon: f64, phase: u32) -> Result<PhaseSummary>;

    /// A fixed action from the current set, played after the last phase.
    fn tail_action(&self) -> E::Action;
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DoublingConfig {
    pub alpha: f64,
    /// Phases stop once `ε` is at or below `max(floor, min_epsilon)`.
    pub min_epsilon: f64,
}

impl Default for DoublingConfig {
    fn default() -> Self {
        DoublingConfig { alpha: 0.0, min_epsilon: 0.0 }
    }
}

impl DoublingConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        DoublingConfig { alpha, ..Self::default() }
    }

    /// `n^{α/2} ln T / √T`.
    pub fn floor(&self, n: usize, horizon: u64) -> f64 {
        powf(n as f64, self.alpha / 2.0) * log_horizon(horizon) / sqrt(horizon.max(1) as f64)
    }

    /// The `ε` values the driver will try, in order.
    pub fn schedule(&self, n: usize, horizon: u64) -> Vec<f64> {
        let stop = self.floor(n, horizon).max(self.min_epsilon);
        let mut out = Vec::new();
        let mut eps = 1.0;
        while eps > stop {
            out.push(eps);
            eps /= 2.0;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DoublingReport {
    pub floor: f64,
    pub init_rounds: u64,
    pub phases: Vec<PhaseSummary>,
    pub tail_rounds: u64,
    pub total_rounds: u64,
    /// The horizon ran out before the phase schedule finished.
    pub truncated: bool,
}

/// Runs initialization, the phase schedule and the tail. Never plays past
/// the horizon; a phase that hits it is cut short and reported.
pub fn run_doubling<E, R>(cfg: &DoublingConfig, env: &mut E, learner: &mut R) -> Result<DoublingReport>
where
    E: Environment,
    R: Refiner<E>,
{
    let horizon = env.horizon();
    if env.budget() > horizon {
        return Err(Error::arg("the driver needs the budget to equal the horizon"));
    }
    let n = learner.size();
    let mut report = DoublingReport { floor: cfg.floor(n, horizon), ..Default::default() };
    let start = env.played();
    match learner.initialize(env) {
        Ok(()) => {}
        Err(e) if e.is_horizon() => report.truncated = true,
        Err(e) => return Err(e),
    }
    report.init_rounds = env.played() - start;
    if !report.truncated {
        for (k, eps) in cfg.schedule(n, horizon).into_iter().enumerate() {
            let phase = k as u32 + 1;
            let before = env.played();
            match learner.refine(env, eps, phase) {
                Ok(mut s) => {
                    s.phase = phase;
                    s.epsilon = eps;
                    s.rounds = env.played() - before;
                    report.phases.push(s);
                }
                Err(e) if e.is_horizon() => {
                    report.truncated = true;
                    report.phases.push(PhaseSummary {
                        phase,
                        epsilon: eps,
                        rounds: env.played() - before,
                        flags: alloc::vec![Flag::Truncated],
                        swaptests: 0,
                    });
                    break;
                }
                Err(e) => return Err(e),
            }
        }
    }
    let phase = report.phases.len() as u32 + 1;
    let last_eps = report.phases.last().map_or(1.0, |p| p.epsilon);
    env.note(PhaseNote { phase, epsilon: last_eps, kind: RoundKind::Tail });
    let action = learner.tail_action();
    let before = env.played();
    while env.played() < horizon {
        env.play(&action)?;
    }
    report.tail_rounds = env.played() - before;
    report.total_rounds = env.played() - start;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_at_one_million() {
        let cfg = DoublingConfig::default();
        let s = cfg.schedule(1, 1_000_000);
        assert_eq!(s.len(), 7);
        assert_eq!(*s.last().unwrap(), 1.0 / 64.0);
        assert!((cfg.floor(1, 1_000_000) - 0.013815510557964274).abs() < 1e-15);
    }

    #[test]
    fn alpha_scales_floor() {
        let a = DoublingConfig::with_alpha(0.0).floor(3, 4096);
        let b = DoublingConfig::with_alpha(5.0).floor(3, 4096);
        assert!((b / a - powf(3.0, 2.5)).abs() < 1e-12);
    }
}
