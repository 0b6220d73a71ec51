//! Exact ground truth: expected rewards and utilities of fixed actions,
//! optimal policies and per-round regret.

use alloc::format;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::distributions::BoundedDistribution;
use crate::environments::{
    AcceptRule, PandoraAction, PandoraInstance, ProphetAction, ProphetInstance,
};
use crate::numeric::{gauss_legendre, sqrt};
use crate::{Error, Result, ABOVE};

const MAX_OUTCOMES: f64 = 1e6;

/// Expected reward of one prophet round under `action`.
pub fn prophet_expected_reward(inst: &ProphetInstance, action: &ProphetAction) -> Result<f64> {
    action.validate(inst.n())?;
    Ok(reward_from(inst, &action.thresholds, 0))
}

// W_k = E[X_k 1{accept}] + P(reject) W_{k+1}, starting from E[X_n].
fn reward_from(inst: &ProphetInstance, thresholds: &[f64], first: usize) -> f64 {
    let n = inst.n();
    let mut w = inst.dists[n - 1].mean();
    for i in (first..n - 1).rev() {
        let tau = thresholds[i];
        if tau == ABOVE {
            continue;
        }
        let d = &inst.dists[i];
        let (taken, cont) = match inst.rule {
            AcceptRule::AtLeast => (d.partial_mean_above_ext(tau, true), d.cdf_left_ext(tau)),
            AcceptRule::Above => (d.partial_mean_above_ext(tau, false), d.cdf_ext(tau)),
        };
        w = taken + cont * w;
    }
    w
}

/// Expected reward collected from variable `first` onwards when the
/// earlier variables are skipped.
pub fn prophet_reward_from(inst: &ProphetInstance, action: &ProphetAction, first: usize) -> Result<f64> {
    action.validate(inst.n())?;
    Ok(reward_from(inst, &action.thresholds, first))
}

/// Optimal values `Opt_1 … Opt_n` and thresholds `τ*_i = Opt_{i+1}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProphetOpt {
    pub opt_values: Vec<f64>,
    pub opt_thresholds: Vec<f64>,
}

impl ProphetOpt {
    pub fn value(&self) -> f64 {
        self.opt_values[0]
    }

    pub fn action(&self) -> ProphetAction {
        ProphetAction::new(self.opt_thresholds.clone())
    }
}

pub fn prophet_opt(inst: &ProphetInstance) -> ProphetOpt {
    let n = inst.n();
    let mut values = alloc::vec![0.0; n];
    values[n - 1] = inst.dists[n - 1].mean();
    let mut thresholds = alloc::vec![0.0; n - 1];
    for i in (0..n - 1).rev() {
        let tau = values[i + 1];
        thresholds[i] = tau;
        let d = &inst.dists[i];
        values[i] = d.partial_mean_above_ext(tau, true) + d.cdf_left_ext(tau) * tau;
    }
    ProphetOpt { opt_values: values, opt_thresholds: thresholds }
}

/// Exact expected utility by enumerating the joint support of the opened
/// boxes. Accepts any permutation with in-range thresholds, monotone or not.
pub fn pandora_expected_utility(inst: &PandoraInstance, action: &PandoraAction) -> Result<f64> {
    action.check_form(inst.n())?;
    if !inst.is_discrete() {
        return Err(Error::Capability(
            "exact enumeration needs atom-only boxes; use pandora_utility".into(),
        ));
    }
    let outcomes: f64 = inst.dists.iter().map(|d| d.atoms().len() as f64).product();
    if outcomes > MAX_OUTCOMES {
        return Err(Error::Capability(format!("{outcomes} joint outcomes exceed the guard")));
    }
    Ok(enumerate(inst, action, 0, f64::NEG_INFINITY, 0.0))
}

fn enumerate(inst: &PandoraInstance, a: &PandoraAction, k: usize, best: f64, paid: f64) -> f64 {
    if k == a.order.len() || (k > 0 && best >= a.thresholds[a.order[k]]) {
        return best - paid;
    }
    let b = a.order[k];
    let paid = paid + inst.costs[b];
    inst.dists[b]
        .atoms()
        .iter()
        .map(|&(x, m)| m * enumerate(inst, a, k + 1, best.max(x), paid))
        .sum()
}

/// Exact expected utility of a valid (monotone) policy for any piecewise
/// instance. Uses `U = g_{π(1)}(0) + Σ_k E[1{M_{k-1} < τ_{π(k)}} g_{π(k)}(M_{k-1})]`
/// with `M` the running maximum; the Stieltjes integrals are split into
/// atom jumps and polynomial pieces integrated by Gauss–Legendre.
pub fn pandora_utility(inst: &PandoraInstance, action: &PandoraAction) -> Result<f64> {
    action.validate(inst.n())?;
    let n = inst.n();
    let (nodes, weights) = gauss_legendre(n / 2 + 2);
    let first = action.order[0];
    let mut total = inst.gain(first, 0.0);
    for k in 1..n {
        let b = action.order[k];
        let tau = action.thresholds[b];
        let prefix: Vec<&BoundedDistribution> =
            action.order[..k].iter().map(|&j| &inst.dists[j]).collect();
        let h = |x: f64| prefix.iter().map(|d| d.cdf_ext(x)).product::<f64>();
        let h_left = |x: f64| prefix.iter().map(|d| d.cdf_left_ext(x)).product::<f64>();
        let dh = |x: f64| -> f64 {
            let mut s = 0.0;
            for (j, d) in prefix.iter().enumerate() {
                let f = d.density_at(x);
                if f != 0.0 {
                    let rest: f64 = prefix
                        .iter()
                        .enumerate()
                        .filter(|&(l, _)| l != j)
                        .map(|(_, e)| e.cdf_ext(x))
                        .product();
                    s += f * rest;
                }
            }
            s
        };
        let end = if tau == ABOVE { 1.0 } else { tau.min(1.0) };
        let mut cuts: Vec<f64> = alloc::vec![0.0, end];
        for d in prefix.iter().copied().chain(core::iter::once(&inst.dists[b])) {
            cuts.extend(d.breakpoints().into_iter().filter(|&x| x > 0.0 && x < end));
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let g = |x: f64| inst.gain(b, x);
        let mut part = 0.0;
        // jumps of the running maximum, strictly below τ
        for &x in &cuts {
            if x < tau && x <= 1.0 {
                let jump = if x == 0.0 { h(0.0) } else { h(x) - h_left(x) };
                if jump != 0.0 {
                    part += g(x) * jump;
                }
            }
        }
        for w in cuts.windows(2) {
            let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            for (z, wt) in nodes.iter().zip(&weights) {
                let x = mid + half * z;
                part += wt * half * g(x) * dh(x);
            }
        }
        total += part;
    }
    Ok(total)
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

pub fn pandora_utility_mc<R: RngCore + ?Sized>(
    inst: &PandoraInstance,
    action: &PandoraAction,
    samples: u64,
    rng: &mut R,
) -> Result<Estimate> {
    use crate::environments::{pandora_round, FeedbackModel};
    if samples < 2 {
        return Err(Error::arg("need at least two samples"));
    }
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let v = pandora_round(inst, action, rng, FeedbackModel::ValueOnly)?.value;
        s += v;
        s2 += v * v;
    }
    let m = samples as f64;
    let mean = s / m;
    let var = ((s2 - m * mean * mean) / (m - 1.0)).max(0.0);
    Ok(Estimate { mean, std_error: sqrt(var / m) })
}

/// Reservation values, inspection order by decreasing `σ` (ties by lower
/// index) and thresholds `τ_i = σ_i`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeitzmanPolicy {
    pub sigmas: Vec<f64>,
    pub order: Vec<usize>,
}

impl WeitzmanPolicy {
    pub fn action(&self) -> PandoraAction {
        PandoraAction::new(self.order.clone(), self.sigmas.clone())
    }
}

/// Weitzman's index policy. A zero cost gives `σ` at the top of the support.
pub fn weitzman(inst: &PandoraInstance) -> Result<WeitzmanPolicy> {
    let sigmas = inst
        .dists
        .iter()
        .zip(&inst.costs)
        .map(|(d, &c)| if c == 0.0 { Ok(d.support_max()) } else { d.reservation_value(c) })
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..inst.n()).collect();
    order.sort_by(|&a, &b| sigmas[b].total_cmp(&sigmas[a]).then(a.cmp(&b)));
    Ok(WeitzmanPolicy { sigmas, order })
}

/// `F_{π,i}(x)`: probability that every box before `i` in the order is
/// below `x`, i.e. that the search reaches `i` with running max `< x`.
pub fn reach_probability(inst: &PandoraInstance, action: &PandoraAction, i: usize, x: f64) -> Result<f64> {
    let pos = action
        .order
        .iter()
        .position(|&b| b == i)
        .ok_or_else(|| Error::arg(format!("box {i} not in the order")))?;
    Ok(action.order[..pos].iter().map(|&j| inst.dists[j].cdf_left_ext(x)).product())
}

/// Utility change from moving `i` in front of `j` when both are adjacent and
/// share the threshold `τ`:
/// `F_{π,i}(τ) (g_i(τ)(1 - F_j(τ)) - g_j(τ)(1 - F_i(τ)))`.
/// Positive means `i` first is better. CDFs are left limits, which makes
/// the formula exact with atoms.
pub fn swap_difference(inst: &PandoraInstance, action: &PandoraAction, i: usize, j: usize) -> Result<f64> {
    action.check_form(inst.n())?;
    let pi = action.order.iter().position(|&b| b == i);
    let pj = action.order.iter().position(|&b| b == j);
    let (pi, pj) = match (pi, pj) {
        (Some(a), Some(b)) if a.abs_diff(b) == 1 => (a, b),
        _ => return Err(Error::Precondition(format!("boxes {i} and {j} are not adjacent"))),
    };
    let tau = action.thresholds[i];
    if tau != action.thresholds[j] {
        return Err(Error::Precondition(format!("boxes {i} and {j} have unequal thresholds")));
    }
    let front = pi.min(pj);
    let reach: f64 = action.order[..front].iter().map(|&k| inst.dists[k].cdf_left_ext(tau)).product();
    let fi = inst.dists[i].cdf_left_ext(tau);
    let fj = inst.dists[j].cdf_left_ext(tau);
    Ok(reach * (inst.gain(i, tau) * (1.0 - fj) - inst.gain(j, tau) * (1.0 - fi)))
}

/// Per-round regret against `Opt_1`.
#[derive(Debug, Clone)]
pub struct ProphetOracle {
    inst: ProphetInstance,
    opt: ProphetOpt,
}

impl ProphetOracle {
    pub fn new(inst: ProphetInstance) -> Self {
        let opt = prophet_opt(&inst);
        ProphetOracle { inst, opt }
    }

    pub fn instance(&self) -> &ProphetInstance {
        &self.inst
    }

    pub fn opt(&self) -> &ProphetOpt {
        &self.opt
    }

    pub fn value(&self, action: &ProphetAction) -> Result<f64> {
        prophet_expected_reward(&self.inst, action)
    }

    pub fn regret(&self, action: &ProphetAction) -> Result<f64> {
        Ok(self.opt.value() - self.value(action)?)
    }
}

/// Per-round regret against Weitzman's policy.
#[derive(Debug, Clone)]
pub struct PandoraOracle {
    inst: PandoraInstance,
    policy: WeitzmanPolicy,
    best: f64,
}

impl PandoraOracle {
    pub fn new(inst: PandoraInstance) -> Result<Self> {
        let policy = weitzman(&inst)?;
        let best = pandora_utility(&inst, &policy.action())?;
        Ok(PandoraOracle { inst, policy, best })
    }

    pub fn instance(&self) -> &PandoraInstance {
        &self.inst
    }

    pub fn weitzman(&self) -> &WeitzmanPolicy {
        &self.policy
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    pub fn value(&self, action: &PandoraAction) -> Result<f64> {
        pandora_utility(&self.inst, action)
    }

    pub fn regret(&self, action: &PandoraAction) -> Result<f64> {
        Ok(self.best - self.value(action)?)
    }
}

pub fn one_round_regret_prophet(inst: &ProphetInstance, action: &ProphetAction) -> Result<f64> {
    Ok(prophet_opt(inst).value() - prophet_expected_reward(inst, action)?)
}

pub fn one_round_regret_pandora(inst: &PandoraInstance, action: &PandoraAction) -> Result<f64> {
    PandoraOracle::new(inst.clone())?.regret(action)
}
