//! Round-by-round simulators for both games, the adversarial constructions
//! and the hard stochastic prophet instance.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand_core::RngCore;

use crate::distributions::BoundedDistribution;
use crate::numeric::sqrt;
use crate::{is_threshold, Error, Result, SimRng, ABOVE};

/// How a prophet round compares a value with its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum AcceptRule {
    /// Accept `X_i` when `X_i >= τ_i`.
    #[default]
    AtLeast,
    /// Accept `X_i` when `X_i > τ_i`.
    Above,
}

impl AcceptRule {
    #[inline]
    pub fn accepts(self, x: f64, tau: f64) -> bool {
        match self {
            AcceptRule::AtLeast => x >= tau,
            AcceptRule::Above => x > tau,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProphetInstance {
    pub dists: Vec<BoundedDistribution>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub rule: AcceptRule,
}

impl ProphetInstance {
    pub fn new(dists: Vec<BoundedDistribution>) -> Result<Self> {
        if dists.len() < 2 {
            return Err(Error::arg("a prophet instance needs at least two variables"));
        }
        Ok(ProphetInstance { dists, rule: AcceptRule::AtLeast })
    }

    pub fn with_rule(mut self, rule: AcceptRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn n(&self) -> usize {
        self.dists.len()
    }

    pub fn is_discrete(&self) -> bool {
        self.dists.iter().all(BoundedDistribution::is_discrete)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PandoraInstance {
    pub dists: Vec<BoundedDistribution>,
    pub costs: Vec<f64>,
    /// Factor already applied to values and costs (1 for a raw instance).
    pub scale: f64,
}

impl PandoraInstance {
    pub fn new(dists: Vec<BoundedDistribution>, costs: Vec<f64>) -> Result<Self> {
        if dists.is_empty() || dists.len() != costs.len() {
            return Err(Error::arg("need one cost per box and at least one box"));
        }
        if let Some(c) = costs.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(Error::arg(format!("cost {c} outside [0, 1]")));
        }
        Ok(PandoraInstance { dists, costs, scale: 1.0 })
    }

    pub fn n(&self) -> usize {
        self.dists.len()
    }

    pub fn is_discrete(&self) -> bool {
        self.dists.iter().all(BoundedDistribution::is_discrete)
    }

    /// Values and costs divided by `2n`, so each round's utility lies in
    /// `[-1/2, 1/2]`.
    pub fn scaled(&self) -> Result<Self> {
        let f = 1.0 / (2.0 * self.n() as f64);
        let dists = self.dists.iter().map(|d| d.scaled(f)).collect::<Result<Vec<_>>>()?;
        Ok(PandoraInstance {
            dists,
            costs: self.costs.iter().map(|c| c * f).collect(),
            scale: self.scale * f,
        })
    }

    /// Gain `g_i(v)` of box `i`.
    pub fn gain(&self, i: usize, v: f64) -> f64 {
        self.dists[i].gain(v, self.costs[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FeedbackModel {
    /// Every value up to the selected one.
    Prefix,
    /// The selected index and its value.
    IndexValue,
    /// The scalar reward only.
    #[default]
    ValueOnly,
}

/// Thresholds `τ_1 … τ_{n-1}`; `τ_n = 0` is implicit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProphetAction {
    pub thresholds: Vec<f64>,
}

impl ProphetAction {
    pub fn new(thresholds: Vec<f64>) -> Self {
        ProphetAction { thresholds }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.thresholds.len() + 1 != n {
            return Err(Error::Action(format!(
                "expected {} thresholds, got {}",
                n - 1,
                self.thresholds.len()
            )));
        }
        if let Some(t) = self.thresholds.iter().find(|t| !is_threshold(**t)) {
            return Err(Error::Action(format!("threshold {t} outside [0, 1] ∪ {{ABOVE}}")));
        }
        Ok(())
    }
}

/// Inspection order plus one threshold per box (indexed by box, not by
/// position). Box `order[0]` is always opened; before opening `order[k]`
/// the search stops if the best value so far is at least its threshold.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PandoraAction {
    pub order: Vec<usize>,
    pub thresholds: Vec<f64>,
}

impl PandoraAction {
    pub fn new(order: Vec<usize>, thresholds: Vec<f64>) -> Self {
        PandoraAction { order, thresholds }
    }

    /// Opens box `i` and stops.
    pub fn single(n: usize, i: usize) -> Self {
        let mut order = alloc::vec![i];
        order.extend((0..n).filter(|&k| k != i));
        let mut thresholds = alloc::vec![0.0; n];
        thresholds[i] = ABOVE;
        PandoraAction { order, thresholds }
    }

    /// Permutation and threshold range only.
    pub fn check_form(&self, n: usize) -> Result<()> {
        if self.order.len() != n || self.thresholds.len() != n {
            return Err(Error::Action(format!("expected {n} boxes")));
        }
        let mut seen = alloc::vec![false; n];
        for &b in &self.order {
            if b >= n || seen[b] {
                return Err(Error::Action(format!("order {:?} is not a permutation", self.order)));
            }
            seen[b] = true;
        }
        if let Some(t) = self.thresholds.iter().find(|t| !is_threshold(**t)) {
            return Err(Error::Action(format!("threshold {t} outside [0, 1] ∪ {{ABOVE}}")));
        }
        Ok(())
    }

    /// Form plus thresholds nonincreasing along the order.
    pub fn validate(&self, n: usize) -> Result<()> {
        self.check_form(n)?;
        for w in self.order.windows(2) {
            if self.thresholds[w[0]] < self.thresholds[w[1]] {
                return Err(Error::Action(format!(
                    "threshold of box {} below that of later box {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }

    /// Thresholds multiplied by `factor`; results above 1 become [`ABOVE`].
    pub fn rescaled(&self, factor: f64) -> Self {
        let thresholds = self
            .thresholds
            .iter()
            .map(|&t| {
                let s = t * factor;
                if s > 1.0 {
                    ABOVE
                } else {
                    s
                }
            })
            .collect();
        PandoraAction { order: self.order.clone(), thresholds }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RoundFeedback {
    pub value: f64,
    pub selected_index: Option<usize>,
    pub observed_prefix: Option<Vec<f64>>,
}

impl RoundFeedback {
    fn build(model: FeedbackModel, value: f64, index: usize, prefix: Vec<f64>) -> Self {
        match model {
            FeedbackModel::ValueOnly => RoundFeedback { value, ..Default::default() },
            FeedbackModel::IndexValue => {
                RoundFeedback { value, selected_index: Some(index), observed_prefix: None }
            }
            FeedbackModel::Prefix => RoundFeedback {
                value,
                selected_index: Some(index),
                observed_prefix: Some(prefix),
            },
        }
    }

    /// Coarsens to a poorer feedback model.
    pub fn project(&self, model: FeedbackModel) -> Self {
        match model {
            FeedbackModel::ValueOnly => RoundFeedback { value: self.value, ..Default::default() },
            FeedbackModel::IndexValue => RoundFeedback {
                value: self.value,
                selected_index: self.selected_index,
                observed_prefix: None,
            },
            FeedbackModel::Prefix => self.clone(),
        }
    }
}

/// One prophet round: the first `X_i` clearing `τ_i` is taken, `X_n`
/// otherwise.
pub fn prophet_round<R: RngCore + ?Sized>(
    inst: &ProphetInstance,
    action: &ProphetAction,
    rng: &mut R,
    model: FeedbackModel,
) -> Result<RoundFeedback> {
    action.validate(inst.n())?;
    let n = inst.n();
    let mut prefix = Vec::new();
    for (i, d) in inst.dists.iter().enumerate() {
        let x = d.sample(rng);
        if model == FeedbackModel::Prefix {
            prefix.push(x);
        }
        if i + 1 == n || inst.rule.accepts(x, action.thresholds[i]) {
            return Ok(RoundFeedback::build(model, x, i, prefix));
        }
    }
    unreachable!("the last variable is always accepted")
}

/// One Pandora round: utility is the best opened value minus opening costs.
pub fn pandora_round<R: RngCore + ?Sized>(
    inst: &PandoraInstance,
    action: &PandoraAction,
    rng: &mut R,
    model: FeedbackModel,
) -> Result<RoundFeedback> {
    action.validate(inst.n())?;
    let mut best = f64::NEG_INFINITY;
    let mut best_box = action.order[0];
    let mut paid = 0.0;
    let mut prefix = Vec::new();
    for (k, &b) in action.order.iter().enumerate() {
        if k > 0 && best >= action.thresholds[b] {
            break;
        }
        let x = inst.dists[b].sample(rng);
        paid += inst.costs[b];
        if model == FeedbackModel::Prefix {
            prefix.push(x);
        }
        if x > best {
            best = x;
            best_box = b;
        }
    }
    Ok(RoundFeedback::build(model, best - paid, best_box, prefix))
}

/// What a block of rounds is for; carried into traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RoundKind {
    #[default]
    Init,
    Explore,
    /// Free-sample rounds that rebuild CDF estimates.
    Estimate,
    Swap,
    Tail,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseNote {
    pub phase: u32,
    pub epsilon: f64,
    pub kind: RoundKind,
}

/// A bandit environment with value-only feedback: `play` returns the scalar
/// reward and nothing else.
pub trait Environment {
    type Action;

    /// The horizon `T` the learner plans for.
    fn horizon(&self) -> u64;

    /// Rounds played so far.
    fn played(&self) -> u64;

    /// Hard cap on rounds; equals the horizon unless overridden.
    fn budget(&self) -> u64 {
        self.horizon()
    }

    fn remaining(&self) -> u64 {
        self.budget().saturating_sub(self.played())
    }

    fn play(&mut self, action: &Self::Action) -> Result<f64>;

    /// Annotation for subsequent rounds.
    fn note(&mut self, _note: PhaseNote) {}
}

impl<E: Environment + ?Sized> Environment for &mut E {
    type Action = E::Action;
    fn horizon(&self) -> u64 {
        (**self).horizon()
    }
    fn played(&self) -> u64 {
        (**self).played()
    }
    fn budget(&self) -> u64 {
        (**self).budget()
    }
    fn play(&mut self, action: &Self::Action) -> Result<f64> {
        (**self).play(action)
    }
    fn note(&mut self, note: PhaseNote) {
        (**self).note(note)
    }
}

/// Plays `action` `rounds` times and returns the average reward.
pub fn average_reward<E: Environment>(env: &mut E, action: &E::Action, rounds: u64) -> Result<f64> {
    let mut sum = 0.0;
    for _ in 0..rounds {
        sum += env.play(action)?;
    }
    Ok(sum / rounds.max(1) as f64)
}

/// Stochastic simulator shared by both games.
#[derive(Debug, Clone)]
pub struct Simulator<I> {
    inst: I,
    rng: SimRng,
    horizon: u64,
    budget: u64,
    played: u64,
    model: FeedbackModel,
    last: RoundFeedback,
}

pub type ProphetSim = Simulator<ProphetInstance>;
pub type PandoraSim = Simulator<PandoraInstance>;

impl<I> Simulator<I> {
    pub fn new(inst: I, horizon: u64, rng: SimRng) -> Self {
        Simulator {
            inst,
            rng,
            horizon,
            budget: horizon,
            played: 0,
            model: FeedbackModel::ValueOnly,
            last: RoundFeedback::default(),
        }
    }

    /// Allows more (or fewer) rounds than the horizon; used by per-phase
    /// statistical batteries.
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_feedback(mut self, model: FeedbackModel) -> Self {
        self.model = model;
        self
    }

    pub fn instance(&self) -> &I {
        &self.inst
    }

    /// Full feedback of the last round under the configured model. Learners
    /// never see this; it exists for logging.
    pub fn last_feedback(&self) -> &RoundFeedback {
        &self.last
    }

    fn tick(&mut self) -> Result<()> {
        if self.played >= self.budget {
            return Err(Error::HorizonExhausted { played: self.played });
        }
        self.played += 1;
        Ok(())
    }
}

impl Environment for ProphetSim {
    type Action = ProphetAction;
    fn horizon(&self) -> u64 {
        self.horizon
    }
    fn played(&self) -> u64 {
        self.played
    }
    fn budget(&self) -> u64 {
        self.budget
    }
    fn play(&mut self, action: &ProphetAction) -> Result<f64> {
        action.validate(self.inst.n())?;
        self.tick()?;
        self.last = prophet_round(&self.inst, action, &mut self.rng, self.model)?;
        Ok(self.last.value)
    }
}

impl Environment for PandoraSim {
    type Action = PandoraAction;
    fn horizon(&self) -> u64 {
        self.horizon
    }
    fn played(&self) -> u64 {
        self.played
    }
    fn budget(&self) -> u64 {
        self.budget
    }
    fn play(&mut self, action: &PandoraAction) -> Result<f64> {
        action.validate(self.inst.n())?;
        self.tick()?;
        self.last = pandora_round(&self.inst, action, &mut self.rng, self.model)?;
        Ok(self.last.value)
    }
}

/// Presents a Pandora environment in `1/(2n)` units: thresholds are scaled
/// up by `2n` before reaching the inner environment and utilities are
/// scaled down.
#[derive(Debug, Clone)]
pub struct ScaledPandora<E> {
    inner: E,
    factor: f64,
}

impl<E: Environment<Action = PandoraAction>> ScaledPandora<E> {
    pub fn new(inner: E, n: usize) -> Self {
        ScaledPandora { inner, factor: 2.0 * n as f64 }
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }

    pub fn into_inner(self) -> E {
        self.inner
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }
}

impl<E: Environment<Action = PandoraAction>> Environment for ScaledPandora<E> {
    type Action = PandoraAction;
    fn horizon(&self) -> u64 {
        self.inner.horizon()
    }
    fn played(&self) -> u64 {
        self.inner.played()
    }
    fn budget(&self) -> u64 {
        self.inner.budget()
    }
    fn play(&mut self, action: &PandoraAction) -> Result<f64> {
        Ok(self.inner.play(&action.rescaled(self.factor))? / self.factor)
    }
    fn note(&mut self, note: PhaseNote) {
        self.inner.note(note)
    }
}

/// Exact binary fraction `0.b_1 b_2 …` of arbitrary length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryFraction {
    // bit k (1-based) lives in words[(k-1)/64] at position 63 - (k-1)%64
    words: Vec<u64>,
}

impl BinaryFraction {
    pub fn zero() -> Self {
        BinaryFraction { words: Vec::new() }
    }

    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        let mut f = BinaryFraction::zero();
        for (k, b) in bits.into_iter().enumerate() {
            if b {
                f.set(k + 1);
            }
        }
        f
    }

    /// Parses a string of `0`/`1` digits after the binary point.
    pub fn parse(digits: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(digits.len());
        for c in digits.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(Error::arg(format!("not a binary digit: {c}"))),
            }
        }
        Ok(Self::from_bits(bits))
    }

    /// Exact value of a double in `[0, 1)`.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::Domain { value: x, domain: "[0, 1)" });
        }
        let mut f = BinaryFraction::zero();
        if x == 0.0 {
            return Ok(f);
        }
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let (mant, e) = if exp == 0 {
            (bits & ((1 << 52) - 1), -1074)
        } else {
            ((bits & ((1 << 52) - 1)) | (1 << 52), exp - 1075)
        };
        // x = mant * 2^e, so mantissa bit j has weight 2^(j + e)
        for j in 0..53 {
            if mant >> j & 1 == 1 {
                f.set((-(j as i64 + e)) as usize);
            }
        }
        Ok(f)
    }

    pub fn set(&mut self, k: usize) {
        let w = (k - 1) / 64;
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << (63 - (k - 1) % 64);
    }

    pub fn bit(&self, k: usize) -> bool {
        let w = (k - 1) / 64;
        w < self.words.len() && self.words[w] >> (63 - (k - 1) % 64) & 1 == 1
    }

    /// Nearest double (truncated to the leading 64 bits).
    pub fn to_f64(&self) -> f64 {
        let hi = self.words.first().copied().unwrap_or(0);
        hi as f64 / 18446744073709551616.0
    }

    /// Compares with a real number exactly.
    pub fn cmp_real(&self, x: f64) -> Ordering {
        if x.is_nan() {
            return Ordering::Less;
        }
        if x < 0.0 {
            return Ordering::Greater;
        }
        if x >= 1.0 {
            return Ordering::Less;
        }
        let other = BinaryFraction::from_f64(x).expect("range checked");
        self.cmp(&other)
    }
}

impl Ord for BinaryFraction {
    fn cmp(&self, other: &Self) -> Ordering {
        let n = self.words.len().max(other.words.len());
        for k in 0..n {
            let a = self.words.get(k).copied().unwrap_or(0);
            let b = other.words.get(k).copied().unwrap_or(0);
            match a.cmp(&b) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for BinaryFraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The oblivious code shared by both adversarial environments.
#[derive(Debug, Clone)]
pub struct Code {
    bits: Vec<bool>,
    value: BinaryFraction,
}

impl Code {
    pub fn random(len: usize, rng: &mut SimRng) -> Self {
        let bits: Vec<bool> = (0..len).map(|_| rng.next_u32() & 1 == 1).collect();
        Self::from_bits(bits)
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        let value = BinaryFraction::from_bits(bits.iter().copied());
        Code { bits, value }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i - 1]
    }

    /// `Bin(s)`.
    pub fn value(&self) -> &BinaryFraction {
        &self.value
    }

    /// `v_i`: midpoint of `Bin(s_1…s_{i-1} 0 1^{T-i})` and
    /// `Bin(s_1…s_{i-1} 1 0^{T-i})`, i.e. bits `s_1…s_{i-1} 0 1^{T-i} 1`.
    pub fn probe(&self, i: usize) -> BinaryFraction {
        let t = self.bits.len();
        let mut f = BinaryFraction::from_bits(self.bits[..i - 1].iter().copied());
        for k in i + 1..=t + 1 {
            f.set(k);
        }
        f
    }
}

/// Adversarial two-variable prophet environment: `X_1 = 1/2 + ε v_i`,
/// `X_2 = s_i`.
#[derive(Debug, Clone)]
pub struct AdversarialProphet {
    code: Code,
    bias: f64,
    played: u64,
}

impl AdversarialProphet {
    pub fn new(horizon: u64, bias: f64, rng: &mut SimRng) -> Self {
        Self::with_code(Code::random(horizon as usize, rng), bias)
    }

    pub fn with_code(code: Code, bias: f64) -> Self {
        AdversarialProphet { code, bias, played: 0 }
    }

    pub fn code(&self) -> &Code {
        &self.code
    }

    /// `1/2 + ε Bin(s)` rounded to a double; the exact comparison is made by
    /// [`AdversarialProphet::play_hindsight`].
    pub fn hindsight_threshold(&self) -> f64 {
        0.5 + self.bias * self.code.value().to_f64()
    }

    fn round(&mut self, accept: impl Fn(&BinaryFraction) -> bool) -> Result<f64> {
        if self.played >= self.code.len() as u64 {
            return Err(Error::HorizonExhausted { played: self.played });
        }
        self.played += 1;
        let i = self.played as usize;
        let v = self.code.probe(i);
        if accept(&v) {
            Ok(0.5 + self.bias * v.to_f64())
        } else {
            Ok(if self.code.bit(i) { 1.0 } else { 0.0 })
        }
    }

    /// Plays the hindsight threshold with an exact comparison.
    pub fn play_hindsight(&mut self) -> Result<f64> {
        let s = self.code.value().clone();
        self.round(|v| *v >= s)
    }
}

impl Environment for AdversarialProphet {
    type Action = ProphetAction;
    fn horizon(&self) -> u64 {
        self.code.len() as u64
    }
    fn played(&self) -> u64 {
        self.played
    }
    fn play(&mut self, action: &ProphetAction) -> Result<f64> {
        action.validate(2)?;
        let tau = action.thresholds[0];
        let bias = self.bias;
        // X_1 >= τ  ⇔  v_i >= (τ - 1/2)/ε
        self.round(|v| tau != ABOVE && v.cmp_real((tau - 0.5) / bias) != Ordering::Less)
    }
}

/// Adversarial two-box Pandora environment: `X_1 = ε v_i` at cost 0,
/// `X_2 = s_i` at cost 1/2.
#[derive(Debug, Clone)]
pub struct AdversarialPandora {
    code: Code,
    bias: f64,
    played: u64,
}

impl AdversarialPandora {
    pub const COSTS: [f64; 2] = [0.0, 0.5];

    pub fn new(horizon: u64, bias: f64, rng: &mut SimRng) -> Self {
        Self::with_code(Code::random(horizon as usize, rng), bias)
    }

    pub fn with_code(code: Code, bias: f64) -> Self {
        AdversarialPandora { code, bias, played: 0 }
    }

    pub fn code(&self) -> &Code {
        &self.code
    }

    pub fn hindsight_threshold(&self) -> f64 {
        self.bias * self.code.value().to_f64()
    }

    // `stop(v, x2)` decides whether to stop before the box at position 1
    // given what box `first` revealed.
    fn round(&mut self, first: usize, stop: impl Fn(&BinaryFraction, bool) -> bool) -> Result<f64> {
        if self.played >= self.code.len() as u64 {
            return Err(Error::HorizonExhausted { played: self.played });
        }
        self.played += 1;
        let i = self.played as usize;
        let v = self.code.probe(i);
        let x1 = self.bias * v.to_f64();
        let x2 = if self.code.bit(i) { 1.0 } else { 0.0 };
        let both = x1.max(x2) - Self::COSTS[0] - Self::COSTS[1];
        Ok(match (first, stop(&v, self.code.bit(i))) {
            (0, true) => x1 - Self::COSTS[0],
            (1, true) => x2 - Self::COSTS[1],
            _ => both,
        })
    }

    /// Opens box 1, then box 2 exactly when `X_1 < ε Bin(s)`.
    pub fn play_hindsight(&mut self) -> Result<f64> {
        let s = self.code.value().clone();
        self.round(0, |v, _| *v >= s)
    }
}

impl Environment for AdversarialPandora {
    type Action = PandoraAction;
    fn horizon(&self) -> u64 {
        self.code.len() as u64
    }
    fn played(&self) -> u64 {
        self.played
    }
    fn play(&mut self, action: &PandoraAction) -> Result<f64> {
        action.validate(2)?;
        let first = action.order[0];
        let tau = action.thresholds[1 - first];
        let bias = self.bias;
        if first == 0 {
            self.round(0, |v, _| tau != ABOVE && v.cmp_real(tau / bias) != Ordering::Less)
        } else {
            self.round(1, |_, s| if s { 1.0 >= tau } else { 0.0 >= tau })
        }
    }
}

/// The two signed hard instances and their midpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct HardInstances {
    pub plus: ProphetInstance,
    pub minus: ProphetInstance,
    pub mid: ProphetInstance,
    pub gap: f64,
}

/// `X_1 = 1/2`, `X_2 ~ Bernoulli(1/2 ± 1/√T)`.
pub fn hard_stochastic_prophet(horizon: u64) -> Result<HardInstances> {
    if horizon < 4 {
        return Err(Error::arg("horizon must be at least 4"));
    }
    let gap = 1.0 / sqrt(horizon as f64);
    let make = |p: f64| -> Result<ProphetInstance> {
        ProphetInstance::new(alloc::vec![
            BoundedDistribution::atom(0.5)?,
            BoundedDistribution::bernoulli(p)?
        ])
    };
    Ok(HardInstances { plus: make(0.5 + gap)?, minus: make(0.5 - gap)?, mid: make(0.5)?, gap })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_orders_against_code() {
        let code = Code::from_bits(alloc::vec![true, false, true, true]);
        for i in 1..=4 {
            let below = code.probe(i) < *code.value();
            assert_eq!(below, code.bit(i), "round {i}");
        }
    }

    #[test]
    fn fraction_from_f64_is_exact() {
        let f = BinaryFraction::from_f64(0.375).unwrap();
        assert!(f.bit(2) && f.bit(3) && !f.bit(1) && !f.bit(4));
        assert_eq!(f.cmp_real(0.375), Ordering::Equal);
        assert_eq!(f.cmp_real(0.375 + f64::EPSILON), Ordering::Less);
        let tiny = BinaryFraction::from_f64(f64::MIN_POSITIVE / 4.0).unwrap();
        assert!(tiny.bit(1024));
    }

    #[test]
    fn single_open_action_is_valid() {
        let a = PandoraAction::single(3, 1);
        assert_eq!(a.order, alloc::vec![1, 0, 2]);
        a.validate(3).unwrap();
    }
}
