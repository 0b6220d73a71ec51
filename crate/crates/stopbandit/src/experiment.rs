//! Wiring of environment, learner, doubling driver and regret recorder.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use stopbandit_core::doubling::{run_doubling, Constants, DoublingConfig, DoublingReport};
use stopbandit_core::environments::{
    Environment, FeedbackModel, PandoraAction, PandoraInstance, PandoraSim, PhaseNote, ProphetAction,
    ProphetInstance, ProphetSim, RoundKind, Simulator,
};
use stopbandit_core::oracle::{pandora_utility, prophet_expected_reward, prophet_opt, weitzman};
use stopbandit_core::pandora_learner::{PandoraFixedOrder, PandoraGeneral, SearchMode};
use stopbandit_core::prophet_learner::{ConfidenceIntervals, Flag, PhaseReport, ProphetGeneral, ProphetTwo};
use stopbandit_core::rng_stream;

use crate::instance::{parse_pandora, parse_prophet};
use crate::trace::{flag_name, Recorder, RegretTrace, TraceAction};
use crate::HarnessError;

/// RNG stream reserved for the simulator.
const ENV_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    Prophet,
    Pandora,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceSource {
    File(PathBuf),
    Text(String),
}

/// What plays the rounds.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    #[default]
    Learner,
    /// The benchmark policy every round.
    Optimal,
    /// A fixed action. Prophet actions ignore `order`.
    Fixed { thresholds: Vec<f64>, order: Option<Vec<usize>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub instance: InstanceSource,
    pub horizon: u64,
    pub seed: u64,
    #[serde(default)]
    pub constants: Constants,
    /// Name of the preset `constants` came from, for the record.
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub feedback: FeedbackModel,
    #[serde(default)]
    pub mode: SearchMode,
    /// Two-box Pandora instances only: use the fixed-order learner.
    #[serde(default)]
    pub fixed_order: bool,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub policy: Policy,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub snapshots: Option<PathBuf>,
    #[serde(default = "one")]
    pub replicates: u32,
}

fn one() -> u32 {
    1
}

impl ExperimentConfig {
    pub fn new(problem: Problem, instance: InstanceSource, horizon: u64, seed: u64) -> Self {
        ExperimentConfig {
            problem,
            instance,
            horizon,
            seed,
            constants: Constants::DESK,
            preset: Some("desk".into()),
            feedback: FeedbackModel::ValueOnly,
            mode: SearchMode::Exact,
            fixed_order: false,
            alpha: 0.0,
            policy: Policy::Learner,
            out: None,
            snapshots: None,
            replicates: 1,
        }
    }

    /// The same experiment with replicate `k`'s seed.
    pub fn replicate(&self, k: u32) -> Self {
        ExperimentConfig { seed: self.seed + k as u64, ..self.clone() }
    }

    fn instance_text(&self) -> Result<String, HarnessError> {
        match &self.instance {
            InstanceSource::File(p) => Ok(std::fs::read_to_string(p)?),
            InstanceSource::Text(t) => Ok(t.clone()),
        }
    }

    pub fn prophet_instance(&self) -> Result<ProphetInstance, HarnessError> {
        parse_prophet(&self.instance_text()?)
    }

    pub fn pandora_instance(&self) -> Result<PandoraInstance, HarnessError> {
        parse_pandora(&self.instance_text()?)
    }
}

/// Learner state after a phase, in original units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub phase: u32,
    pub epsilon: f64,
    pub intervals: Vec<(f64, f64)>,
    pub edges: Vec<(usize, usize)>,
    pub flags: Vec<Flag>,
    pub swaptests: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub trace: RegretTrace,
    /// Present when a learner played.
    pub report: Option<DoublingReport>,
    pub snapshots: Vec<Snapshot>,
}

/// Runs the configured experiment, keeping every round.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Experiment, HarnessError> {
    run(cfg, true)
}

/// Runs the configured experiment; `keep_rows` false tracks totals only.
pub fn run(cfg: &ExperimentConfig, keep_rows: bool) -> Result<Experiment, HarnessError> {
    if cfg.horizon == 0 {
        return Err(HarnessError::Config("horizon must be positive".into()));
    }
    match cfg.problem {
        Problem::Prophet => run_prophet(cfg, cfg.prophet_instance()?, keep_rows),
        Problem::Pandora => run_pandora(cfg, cfg.pandora_instance()?, keep_rows),
    }
}

fn prophet_snapshots(history: &[PhaseReport]) -> Vec<Snapshot> {
    history
        .iter()
        .enumerate()
        .map(|(k, r)| Snapshot {
            phase: k as u32 + 1,
            epsilon: r.epsilon,
            intervals: r.refined.bounds().to_vec(),
            edges: Vec::new(),
            flags: r.flags.clone(),
            swaptests: 0,
        })
        .collect()
}

fn doubling(cfg: &ExperimentConfig) -> DoublingConfig {
    DoublingConfig::with_alpha(cfg.alpha)
}

fn play_fixed<E: Environment>(env: &mut E, action: &E::Action) -> Result<(), HarnessError> {
    env.note(PhaseNote { phase: 0, epsilon: 0.0, kind: RoundKind::Tail });
    while env.played() < env.horizon() {
        env.play(action)?;
    }
    Ok(())
}

fn finish<E>(rec: Recorder<'_, E>, report: Option<DoublingReport>, snapshots: Vec<Snapshot>) -> Experiment
where
    E: Environment,
    E::Action: TraceAction,
{
    let mut trace = rec.into_trace();
    if let Some(r) = &report {
        for p in &r.phases {
            if !p.flags.is_empty() {
                trace.phase_flags.insert(p.phase, p.flags.iter().map(flag_name).collect());
            }
        }
    }
    Experiment { trace, report, snapshots }
}

fn run_prophet(cfg: &ExperimentConfig, inst: ProphetInstance, keep: bool) -> Result<Experiment, HarnessError> {
    let opt = prophet_opt(&inst).action();
    let best = prophet_expected_reward(&inst, &opt)?;
    let sim: ProphetSim =
        Simulator::new(inst.clone(), cfg.horizon, rng_stream(cfg.seed, ENV_STREAM)).with_feedback(cfg.feedback);
    let mut rec = Recorder::new(sim, best, |a: &ProphetAction| prophet_expected_reward(&inst, a), keep);
    match &cfg.policy {
        Policy::Optimal => {
            play_fixed(&mut rec, &opt)?;
            Ok(finish(rec, None, Vec::new()))
        }
        Policy::Fixed { thresholds, .. } => {
            play_fixed(&mut rec, &ProphetAction::new(thresholds.clone()))?;
            Ok(finish(rec, None, Vec::new()))
        }
        Policy::Learner if inst.n() == 2 => {
            let mut learner = ProphetTwo::new(cfg.constants);
            let report = run_doubling(&doubling(cfg), &mut rec, &mut learner)?;
            Ok(finish(rec, Some(report), prophet_snapshots(learner.history())))
        }
        Policy::Learner => {
            let mut learner = ProphetGeneral::new(inst.n(), cfg.constants)?;
            let report = run_doubling(&doubling(cfg), &mut rec, &mut learner)?;
            Ok(finish(rec, Some(report), prophet_snapshots(learner.history())))
        }
    }
}

fn run_pandora(cfg: &ExperimentConfig, inst: PandoraInstance, keep: bool) -> Result<Experiment, HarnessError> {
    let opt = weitzman(&inst)?.action();
    let best = pandora_utility(&inst, &opt)?;
    let sim: PandoraSim =
        Simulator::new(inst.clone(), cfg.horizon, rng_stream(cfg.seed, ENV_STREAM)).with_feedback(cfg.feedback);
    let mut rec = Recorder::new(sim, best, |a: &PandoraAction| pandora_utility(&inst, a), keep);
    match &cfg.policy {
        Policy::Optimal => {
            play_fixed(&mut rec, &opt)?;
            Ok(finish(rec, None, Vec::new()))
        }
        Policy::Fixed { thresholds, order } => {
            let order = order.clone().unwrap_or_else(|| (0..inst.n()).collect());
            play_fixed(&mut rec, &PandoraAction::new(order, thresholds.clone()))?;
            Ok(finish(rec, None, Vec::new()))
        }
        Policy::Learner if cfg.fixed_order => {
            if inst.n() != 2 {
                return Err(HarnessError::Config("the fixed-order learner needs exactly two boxes".into()));
            }
            let mut learner = PandoraFixedOrder::new([inst.costs[0], inst.costs[1]], cfg.constants);
            let report = run_doubling(&doubling(cfg), &mut rec, &mut learner)?;
            Ok(finish(rec, Some(report), prophet_snapshots(learner.history())))
        }
        Policy::Learner => {
            let mut learner = PandoraGeneral::new(inst.costs.clone(), cfg.constants, cfg.mode)?;
            let report = run_doubling(&doubling(cfg), &mut rec, &mut learner)?;
            let scale = learner.scale();
            let snaps = learner
                .history()
                .iter()
                .enumerate()
                .map(|(k, r)| Snapshot {
                    phase: k as u32 + 1,
                    epsilon: report.phases.get(k).map_or(0.0, |p| p.epsilon),
                    intervals: unscale(r.group.intervals(), scale),
                    edges: r.group.constraints(),
                    flags: r.flags.clone(),
                    swaptests: r.swaptests,
                })
                .collect();
            Ok(finish(rec, Some(report), snaps))
        }
    }
}

fn unscale(iv: &ConfidenceIntervals, scale: f64) -> Vec<(f64, f64)> {
    iv.bounds().iter().map(|&(l, u)| ((l * scale).min(1.0), (u * scale).min(1.0))).collect()
}

/// Writes one JSON object per snapshot.
pub fn write_snapshots<W: std::io::Write>(mut out: W, snaps: &[Snapshot]) -> Result<(), HarnessError> {
    for s in snaps {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_snapshots<R: std::io::BufRead>(input: R) -> Result<Vec<Snapshot>, HarnessError> {
    input
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}
