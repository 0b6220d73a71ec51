//! Interval-shrinking learners for the prophet inequality under value-only
//! feedback: the two-variable learner and the general-`n` learner, plus
//! their initializations.

use alloc::format;
use alloc::vec::Vec;

use crate::distributions::{CdfView, EmpiricalCdf};
use crate::doubling::{Constants, PhaseSummary, Refiner};
use crate::environments::{Environment, PhaseNote, ProphetAction, RoundKind};
use crate::numeric::{ln, powf, rounds, sqrt, PiecewiseLinear};
use crate::{Error, Result, ABOVE};

/// Per-variable threshold intervals `[ℓ_i, u_i]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfidenceIntervals {
    bounds: Vec<(f64, f64)>,
}

impl ConfidenceIntervals {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        for (k, &(l, u)) in bounds.iter().enumerate() {
            if !(0.0 <= l && l <= u && u <= 1.0) {
                return Err(Error::arg(format!("interval {k} = [{l}, {u}] is not inside [0, 1]")));
            }
        }
        Ok(ConfidenceIntervals { bounds })
    }

    /// `count` copies of `[0, 1]`.
    pub fn full(count: usize) -> Self {
        ConfidenceIntervals { bounds: alloc::vec![(0.0, 1.0); count] }
    }

    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn get(&self, i: usize) -> (f64, f64) {
        self.bounds[i]
    }

    pub fn lower(&self, i: usize) -> f64 {
        self.bounds[i].0
    }

    pub fn upper(&self, i: usize) -> f64 {
        self.bounds[i].1
    }

    pub fn width(&self, i: usize) -> f64 {
        self.bounds[i].1 - self.bounds[i].0
    }

    pub fn contains(&self, i: usize, x: f64) -> bool {
        let (l, u) = self.bounds[i];
        l <= x && x <= u
    }

    pub(crate) fn set(&mut self, i: usize, l: f64, u: f64) {
        self.bounds[i] = (l, u);
    }

    pub fn lowers(&self) -> Vec<f64> {
        self.bounds.iter().map(|b| b.0).collect()
    }

    pub fn uppers(&self) -> Vec<f64> {
        self.bounds.iter().map(|b| b.1).collect()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.bounds.iter().map(|b| 0.5 * (b.0 + b.1)).collect()
    }

    /// Every interval lies inside the matching interval of `outer`.
    pub fn nested_in(&self, outer: &ConfidenceIntervals) -> bool {
        self.len() == outer.len()
            && self.bounds.iter().zip(&outer.bounds).all(|(a, b)| b.0 <= a.0 && a.1 <= b.1)
    }
}

/// Empirical CDFs built from fresh samples, one per variable or box.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CdfEstimates {
    pub fhat: Vec<EmpiricalCdf>,
    /// Uniform accuracy the sample size was chosen for.
    pub product_error_budget: f64,
    /// Increases every time estimates are rebuilt from new samples.
    pub generation: u64,
}

impl CdfEstimates {
    pub fn len(&self) -> usize {
        self.fhat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fhat.is_empty()
    }
}

/// Something that went wrong but did not stop the run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Flag {
    /// The refined set was empty; the interval collapsed to the zero crossing.
    Degenerate { index: usize },
    /// The estimated bounding function dipped by `dip` before being made
    /// monotone.
    NonMonotone { index: usize, dip: f64 },
    /// No admissible policy separates the two endpoints; interval kept.
    NoReach { index: usize },
    /// The horizon ran out inside this phase.
    Truncated,
}

/// Knots of one estimated bounding function `δ̂`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeltaTrace {
    pub index: usize,
    pub knots: Vec<(f64, f64)>,
}

/// Outcome of one interval-shrinking call.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhaseReport {
    pub epsilon: f64,
    pub rounds_used: u64,
    pub refined: ConfidenceIntervals,
    pub delta_hat_trace: Vec<DeltaTrace>,
    pub flags: Vec<Flag>,
}

pub(crate) fn log_horizon(horizon: u64) -> f64 {
    ln(horizon.max(2) as f64)
}

pub(crate) fn quarter_root(horizon: u64) -> f64 {
    powf(horizon.max(1) as f64, -0.25)
}

/// Plays `action` `count` times and returns the average reward.
pub(crate) fn average<E: Environment>(env: &mut E, action: &E::Action, count: u64) -> Result<f64> {
    let mut sum = 0.0;
    for _ in 0..count {
        sum += env.play(action)?;
    }
    Ok(sum / count as f64)
}

/// Plays `action` `count` times and keeps the rewards.
pub(crate) fn collect<E: Environment>(env: &mut E, action: &E::Action, count: u64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        out.push(env.play(action)?);
    }
    Ok(out)
}

/// Solves `{ τ : lo <= δ̂(τ) <= hi }` for a nondecreasing piecewise-linear
/// `δ̂` given by its knots and records flags.
pub(crate) fn cut(
    index: usize,
    knots: Vec<(f64, f64)>,
    lo: f64,
    hi: f64,
    flags: &mut Vec<Flag>,
    trace: &mut Vec<DeltaTrace>,
) -> (f64, f64) {
    trace.push(DeltaTrace { index, knots: knots.clone() });
    let (f, dip) = PiecewiseLinear::monotone(knots);
    if dip > 1e-9 {
        flags.push(Flag::NonMonotone { index, dip });
    }
    let set = f.level_set(lo, hi);
    if set.degenerate {
        flags.push(Flag::Degenerate { index });
    }
    (set.lo, set.hi)
}

/// Bounding-function numerator for two variables:
/// `Δ(τ) = F₁(u)(τ - u) - F₁(ℓ)(τ - ℓ) + ∫_ℓ^u F₁`.
pub fn delta_two(f1: &dyn CdfView, l: f64, u: f64, tau: f64) -> f64 {
    f1.at(u) * (tau - u) - f1.at(l) * (tau - l) + f1.integral(l, u)
}

/// General-`n` version, scaled by the reach probability `P_i`.
pub fn delta_general(fi: &dyn CdfView, reach: f64, l: f64, u: f64, tau: f64) -> f64 {
    reach * delta_two(fi, l, u, tau)
}

/// Result of the two-variable initialization.
#[derive(Debug, Clone, PartialEq)]
pub struct Init2 {
    pub fhat1: EmpiricalCdf,
    pub interval: ConfidenceIntervals,
    pub mean2: f64,
    pub rounds: u64,
}

/// Plays `τ = 0` (the reward is `X₁`) and `τ = ABOVE` (the reward is `X₂`)
/// `c_init √T ln T` times each; returns `F̂₁` and `μ̂₂ ± T^{-1/4}/2`.
pub fn init2<E>(env: &mut E, c_init: f64) -> Result<Init2>
where
    E: Environment<Action = ProphetAction>,
{
    let t = env.horizon();
    let n = rounds(c_init * sqrt(t as f64) * log_horizon(t));
    env.note(PhaseNote { phase: 0, epsilon: 0.0, kind: RoundKind::Init });
    let xs = collect(env, &ProphetAction::new(alloc::vec![0.0]), n)?;
    let mean2 = average(env, &ProphetAction::new(alloc::vec![ABOVE]), n)?;
    let half = 0.5 * quarter_root(t);
    let interval = ConfidenceIntervals::new(alloc::vec![(
        (mean2 - half).clamp(0.0, 1.0),
        (mean2 + half).clamp(0.0, 1.0)
    )])?;
    Ok(Init2 { fhat1: EmpiricalCdf::new(xs)?, interval, mean2, rounds: 2 * n })
}

/// One phase of the two-variable interval-shrinking algorithm. Plays `ℓ`
/// then `u`, and keeps `{ τ : |δ̂(τ)| <= 5ε }`.
pub fn isa2<E>(
    env: &mut E,
    interval: &ConfidenceIntervals,
    fhat1: &dyn CdfView,
    epsilon: f64,
    c_explore: f64,
) -> Result<PhaseReport>
where
    E: Environment<Action = ProphetAction>,
{
    if interval.len() != 1 {
        return Err(Error::arg("the two-variable learner takes one interval"));
    }
    let (l, u) = interval.get(0);
    let m = rounds(c_explore * log_horizon(env.horizon()) / (epsilon * epsilon));
    let r_l = average(env, &ProphetAction::new(alloc::vec![l]), m)?;
    let r_u = average(env, &ProphetAction::new(alloc::vec![u]), m)?;
    let d = r_u - r_l;
    let knots = alloc::vec![(l, delta_two(fhat1, l, u, l) - d), (u, delta_two(fhat1, l, u, u) - d)];
    let (mut flags, mut trace) = (Vec::new(), Vec::new());
    let (a, b) = cut(0, knots, -5.0 * epsilon, 5.0 * epsilon, &mut flags, &mut trace);
    Ok(PhaseReport {
        epsilon,
        rounds_used: 2 * m,
        refined: ConfidenceIntervals::new(alloc::vec![(a, b)])?,
        delta_hat_trace: trace,
        flags,
    })
}

/// Result of the general initialization.
#[derive(Debug, Clone, PartialEq)]
pub struct InitGeneral {
    pub estimates: CdfEstimates,
    pub intervals: ConfidenceIntervals,
    pub rounds: u64,
}

/// Harvests `c_init n² √T ln T` free samples of each `X_i` with the pattern
/// `(ABOVE, …, ABOVE, 0, …, 0)`, then averages the lower-bound policy from
/// each position backwards to place the intervals.
pub fn init_general<E>(env: &mut E, n: usize, c_init: f64) -> Result<InitGeneral>
where
    E: Environment<Action = ProphetAction>,
{
    if n < 2 {
        return Err(Error::arg("need at least two variables"));
    }
    let t = env.horizon();
    let nf = n as f64;
    let count = rounds(c_init * nf * nf * sqrt(t as f64) * log_horizon(t));
    env.note(PhaseNote { phase: 0, epsilon: 0.0, kind: RoundKind::Init });
    let mut fhat = Vec::with_capacity(n);
    for i in 0..n {
        let th: Vec<f64> = (0..n - 1).map(|j| if j < i { ABOVE } else { 0.0 }).collect();
        fhat.push(EmpiricalCdf::new(collect(env, &ProphetAction::new(th), count)?)?);
    }
    let w = quarter_root(t) / (10.0 * nf);
    let mut lowers = alloc::vec![0.0; n - 1];
    let mut bounds = alloc::vec![(0.0, 1.0); n - 1];
    for i in (0..n - 1).rev() {
        let th: Vec<f64> = (0..n - 1).map(|j| if j <= i { ABOVE } else { lowers[j] }).collect();
        let mu = average(env, &ProphetAction::new(th), count)?;
        let slack = (2 * n - 2 * i - 3) as f64;
        let l = (mu - w).clamp(0.0, 1.0);
        bounds[i] = (l, (mu + slack * w).clamp(0.0, 1.0));
        lowers[i] = l;
    }
    Ok(InitGeneral {
        estimates: CdfEstimates { fhat, product_error_budget: quarter_root(t), generation: 0 },
        intervals: ConfidenceIntervals::new(bounds)?,
        rounds: (2 * n as u64 - 1) * count,
    })
}

/// One phase of the general interval-shrinking algorithm. For `i` from the
/// last threshold back to the first, plays `(u_1…u_{i-1}, ℓ_i or u_i,
/// ℓ'_{i+1}…)` and keeps `{ τ : -ε <= δ̂_i(τ) <= (2n-2i-1)ε }` (1-based `i`).
pub fn isa_general<E>(
    env: &mut E,
    intervals: &ConfidenceIntervals,
    estimates: &CdfEstimates,
    epsilon: f64,
    c_explore: f64,
) -> Result<PhaseReport>
where
    E: Environment<Action = ProphetAction>,
{
    let k = intervals.len();
    let n = k + 1;
    if estimates.len() < k {
        return Err(Error::arg("need a CDF estimate for every thresholded variable"));
    }
    let m = rounds(c_explore * log_horizon(env.horizon()) / (epsilon * epsilon));
    let mut refined = intervals.clone();
    let (mut flags, mut trace) = (Vec::new(), Vec::new());
    for i in (0..k).rev() {
        let (l, u) = intervals.get(i);
        let mut th: Vec<f64> = (0..k)
            .map(|j| if j < i { intervals.upper(j) } else { refined.lower(j) })
            .collect();
        th[i] = l;
        let r_l = average(env, &ProphetAction::new(th.clone()), m)?;
        th[i] = u;
        let r_u = average(env, &ProphetAction::new(th), m)?;
        let d = r_u - r_l;
        let reach: f64 = (0..i).map(|j| estimates.fhat[j].at(intervals.upper(j))).product();
        let fi = &estimates.fhat[i];
        let knots = alloc::vec![
            (l, delta_general(fi, reach, l, u, l) - d),
            (u, delta_general(fi, reach, l, u, u) - d)
        ];
        let hi = (2 * n - 2 * i - 3) as f64 * epsilon;
        let (a, b) = cut(i, knots, -epsilon, hi, &mut flags, &mut trace);
        refined.set(i, a, b);
    }
    Ok(PhaseReport { epsilon, rounds_used: 2 * m * k as u64, refined, delta_hat_trace: trace, flags })
}

/// Two-variable learner: [`init2`] followed by [`isa2`] phases.
#[derive(Debug, Clone)]
pub struct ProphetTwo {
    consts: Constants,
    fhat1: Option<EmpiricalCdf>,
    interval: ConfidenceIntervals,
    history: Vec<PhaseReport>,
}

impl ProphetTwo {
    pub fn new(consts: Constants) -> Self {
        ProphetTwo { consts, fhat1: None, interval: ConfidenceIntervals::full(1), history: Vec::new() }
    }

    pub fn interval(&self) -> &ConfidenceIntervals {
        &self.interval
    }

    pub fn history(&self) -> &[PhaseReport] {
        &self.history
    }
}

impl<E: Environment<Action = ProphetAction>> Refiner<E> for ProphetTwo {
    fn size(&self) -> usize {
        2
    }

    fn initialize(&mut self, env: &mut E) -> Result<()> {
        let init = init2(env, self.consts.c_init)?;
        self.interval = init.interval;
        self.fhat1 = Some(init.fhat1);
        Ok(())
    }

    fn refine(&mut self, env: &mut E, epsilon: f64, phase: u32) -> Result<PhaseSummary> {
        let fhat1 = self.fhat1.as_ref().ok_or_else(|| Error::Invariant("refine before initialize".into()))?;
        env.note(PhaseNote { phase, epsilon, kind: RoundKind::Explore });
        let rep = isa2(env, &self.interval, fhat1, epsilon, self.consts.c_explore)?;
        self.interval = rep.refined.clone();
        let flags = rep.flags.clone();
        self.history.push(rep);
        Ok(PhaseSummary { flags, ..Default::default() })
    }

    fn tail_action(&self) -> ProphetAction {
        ProphetAction::new(self.interval.midpoints())
    }
}

/// General-`n` learner: [`init_general`] followed by [`isa_general`] phases.
#[derive(Debug, Clone)]
pub struct ProphetGeneral {
    n: usize,
    consts: Constants,
    estimates: Option<CdfEstimates>,
    intervals: ConfidenceIntervals,
    history: Vec<PhaseReport>,
}

impl ProphetGeneral {
    pub fn new(n: usize, consts: Constants) -> Result<Self> {
        if n < 2 {
            return Err(Error::arg("need at least two variables"));
        }
        Ok(ProphetGeneral {
            n,
            consts,
            estimates: None,
            intervals: ConfidenceIntervals::full(n - 1),
            history: Vec::new(),
        })
    }

    pub fn intervals(&self) -> &ConfidenceIntervals {
        &self.intervals
    }

    pub fn history(&self) -> &[PhaseReport] {
        &self.history
    }
}

impl<E: Environment<Action = ProphetAction>> Refiner<E> for ProphetGeneral {
    fn size(&self) -> usize {
        self.n
    }

    fn initialize(&mut self, env: &mut E) -> Result<()> {
        let init = init_general(env, self.n, self.consts.c_init)?;
        self.intervals = init.intervals;
        self.estimates = Some(init.estimates);
        Ok(())
    }

    fn refine(&mut self, env: &mut E, epsilon: f64, phase: u32) -> Result<PhaseSummary> {
        let est = self.estimates.as_ref().ok_or_else(|| Error::Invariant("refine before initialize".into()))?;
        env.note(PhaseNote { phase, epsilon, kind: RoundKind::Explore });
        let rep = isa_general(env, &self.intervals, est, epsilon, self.consts.c_explore)?;
        self.intervals = rep.refined.clone();
        let flags = rep.flags.clone();
        self.history.push(rep);
        Ok(PhaseSummary { flags, ..Default::default() })
    }

    fn tail_action(&self) -> ProphetAction {
        ProphetAction::new(self.intervals.midpoints())
    }
}
