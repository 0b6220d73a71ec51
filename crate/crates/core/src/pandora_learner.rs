//! Pandora's box learners under value-only feedback: the fixed-order
//! two-box learner and the general learner built on constraint groups,
//! move-bound search, swap tests and policy conversion.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec::Vec;

use crate::distributions::{integrate_product, CdfView, EmpiricalCdf};
use crate::doubling::{Constants, PhaseSummary, Refiner};
use crate::environments::{Environment, PandoraAction, PhaseNote, RoundKind, ScaledPandora};
use crate::numeric::{order_by_threshold, rounds, sqrt, PiecewiseLinear};
use crate::prophet_learner::{
    average, collect, cut, log_horizon, quarter_root, CdfEstimates, ConfidenceIntervals, DeltaTrace, Flag,
    PhaseReport,
};
use crate::{Error, Result, ABOVE};

/// How the move-bound policy is searched for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SearchMode {
    /// Enumerate every admissible front set (`n <= 16`).
    #[default]
    Exact,
    /// Candidate endpoint pairs plus the closure approximation of Problem A.
    Approx,
}

const EXACT_SEARCH_LIMIT: usize = 16;
const PROBLEM_A_LIMIT: usize = 20;

/// Threshold intervals for every box plus a transitively closed order
/// relation: `(i, j)` means box `i` must be inspected before box `j`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstraintGroup {
    intervals: ConfidenceIntervals,
    before: Vec<Vec<bool>>,
}

impl ConstraintGroup {
    pub fn new(intervals: ConfidenceIntervals) -> Self {
        let n = intervals.len();
        ConstraintGroup { intervals, before: alloc::vec![alloc::vec![false; n]; n] }
    }

    /// Builds a group from explicit constraints, closes them and checks
    /// validity without changing any interval.
    pub fn with_constraints(intervals: ConfidenceIntervals, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(intervals);
        for &(a, b) in edges {
            if a >= g.n() || b >= g.n() {
                return Err(Error::arg(format!("constraint ({a}, {b}) names a missing box")));
            }
            g.before[a][b] = true;
        }
        g.close()?;
        g.check()?;
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &ConfidenceIntervals {
        &self.intervals
    }

    pub fn lower(&self, i: usize) -> f64 {
        self.intervals.lower(i)
    }

    pub fn upper(&self, i: usize) -> f64 {
        self.intervals.upper(i)
    }

    pub fn has(&self, i: usize, j: usize) -> bool {
        self.before[i][j]
    }

    /// Distinct boxes with no constraint in either direction.
    pub fn unordered(&self, i: usize, j: usize) -> bool {
        i != j && !self.before[i][j] && !self.before[j][i]
    }

    pub fn constraints(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.before[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Transitivity, acyclicity and interval dominance.
    pub fn check(&self) -> Result<()> {
        let n = self.n();
        for i in 0..n {
            if self.before[i][i] {
                return Err(Error::Invariant(format!("order constraints contain a cycle through box {i}")));
            }
            for j in 0..n {
                if !self.before[i][j] {
                    continue;
                }
                if self.lower(i) < self.lower(j) || self.upper(i) < self.upper(j) {
                    return Err(Error::Invariant(format!("constraint ({i}, {j}) without interval dominance")));
                }
                for k in 0..n {
                    if self.before[j][k] && !self.before[i][k] {
                        return Err(Error::Invariant(format!("constraints ({i}, {j}), ({j}, {k}) not closed")));
                    }
                }
            }
        }
        Ok(())
    }

    fn close(&mut self) -> Result<()> {
        let n = self.n();
        for k in 0..n {
            for i in 0..n {
                if self.before[i][k] {
                    for j in 0..n {
                        if self.before[k][j] {
                            self.before[i][j] = true;
                        }
                    }
                }
            }
        }
        match (0..n).find(|&i| self.before[i][i]) {
            Some(i) => Err(Error::Invariant(format!("order constraints contain a cycle through box {i}"))),
            None => Ok(()),
        }
    }

    // Pushes bounds along every constraint until nothing moves; returns the
    // boxes whose lower bound changed.
    fn tighten(&mut self) -> Result<Vec<usize>> {
        let n = self.n();
        let mut changed = alloc::vec![false; n];
        loop {
            let mut moved = false;
            for a in 0..n {
                for b in 0..n {
                    if !self.before[a][b] {
                        continue;
                    }
                    let (la, ua) = self.intervals.get(a);
                    let (lb, ub) = self.intervals.get(b);
                    if ub > ua {
                        self.intervals.set(b, lb, ua);
                        moved = true;
                    }
                    if lb > la {
                        self.intervals.set(a, lb, ua);
                        changed[a] = true;
                        moved = true;
                    }
                }
            }
            if !moved {
                break;
            }
        }
        for i in 0..n {
            let (l, u) = self.intervals.get(i);
            if l > u {
                return Err(Error::Invariant(format!("interval of box {i} became empty: [{l}, {u}]")));
            }
        }
        Ok((0..n).filter(|&i| changed[i]).collect())
    }

    /// Adds `(a, b)`, closes transitively and tightens the intervals.
    /// Returns the boxes whose lower bound moved.
    pub fn add_constraint(&mut self, a: usize, b: usize) -> Result<Vec<usize>> {
        if a == b || self.before[b][a] {
            return Err(Error::Invariant(format!("constraint ({a}, {b}) would create a cycle")));
        }
        self.before[a][b] = true;
        self.close()?;
        self.tighten()
    }

    /// Adds `(i, j)` for every unordered pair with `ℓ_i > u_j`.
    pub fn add_disjoint(&mut self) -> Result<Vec<usize>> {
        let n = self.n();
        let mut changed = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.unordered(i, j) && self.lower(i) > self.upper(j) {
                    changed.extend(self.add_constraint(i, j)?);
                }
            }
        }
        changed.sort_unstable();
        changed.dedup();
        Ok(changed)
    }

    pub(crate) fn set_interval(&mut self, i: usize, l: f64, u: f64) {
        self.intervals.set(i, l, u);
    }

    /// Every box at its lower bound, sorted by decreasing threshold with
    /// ties broken by the constraints and then by index.
    pub fn canonical_policy(&self) -> PandoraAction {
        let n = self.n();
        let boxes: Vec<usize> = (0..n).collect();
        let order = order_by_threshold(&boxes, |k| self.lower(k), |a, b| self.before[a][b]);
        PandoraAction::new(order, self.intervals.lowers())
    }
}

/// One reason a policy is not valid for a group.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Malformed(alloc::string::String),
    OutOfInterval { index: usize, threshold: f64, lower: f64, upper: f64 },
    OrderConstraint { before: usize, after: usize },
    Increasing { earlier: usize, later: usize },
}

/// Checks interval membership, order constraints and nonincreasing
/// thresholds.
pub fn validate_policy(group: &ConstraintGroup, policy: &PandoraAction) -> core::result::Result<(), Vec<Violation>> {
    let n = group.n();
    if let Err(e) = policy.check_form(n) {
        return Err(alloc::vec![Violation::Malformed(format!("{e}"))]);
    }
    let mut out = Vec::new();
    for k in 0..n {
        let t = policy.thresholds[k];
        let (l, u) = group.intervals.get(k);
        if !(l <= t && t <= u) {
            out.push(Violation::OutOfInterval { index: k, threshold: t, lower: l, upper: u });
        }
    }
    let mut pos = alloc::vec![0; n];
    for (p, &b) in policy.order.iter().enumerate() {
        pos[b] = p;
    }
    for (a, b) in group.constraints() {
        if pos[a] > pos[b] {
            out.push(Violation::OrderConstraint { before: a, after: b });
        }
    }
    for w in policy.order.windows(2) {
        if policy.thresholds[w[0]] < policy.thresholds[w[1]] {
            out.push(Violation::Increasing { earlier: w[0], later: w[1] });
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// `max_B Π_{B} b - Π_{B} a` subject to implications `(i, j)`: `i ∈ B ⇒ j ∈ B`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemA {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub implications: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemASolution {
    pub set: Vec<usize>,
    pub value: f64,
}

impl ProblemA {
    pub fn new(a: Vec<f64>, b: Vec<f64>, implications: Vec<(usize, usize)>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::arg("a and b differ in length"));
        }
        for (k, (&x, &y)) in a.iter().zip(&b).enumerate() {
            if !(0.0 <= x && x <= y && y <= 1.0) {
                return Err(Error::arg(format!("element {k}: need 0 <= a <= b <= 1, got {x}, {y}")));
            }
        }
        if implications.iter().any(|&(i, j)| i >= a.len() || j >= a.len()) {
            return Err(Error::arg("implication names a missing element"));
        }
        Ok(ProblemA { a, b, implications })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn value(&self, set: &[usize]) -> f64 {
        let pb: f64 = set.iter().map(|&k| self.b[k]).product();
        let pa: f64 = set.iter().map(|&k| self.a[k]).product();
        pb - pa
    }

    /// Elements forced in by choosing `j`.
    pub fn closure(&self, j: usize) -> Vec<usize> {
        let mut seen = alloc::vec![false; self.len()];
        let mut stack = alloc::vec![j];
        seen[j] = true;
        while let Some(x) = stack.pop() {
            for &(p, q) in &self.implications {
                if p == x && !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
        (0..self.len()).filter(|&k| seen[k]).collect()
    }
}

/// Exhaustive search over feasible subsets.
pub fn problem_a_exact(p: &ProblemA) -> Result<ProblemASolution> {
    let m = p.len();
    if m > PROBLEM_A_LIMIT {
        return Err(Error::Capability(format!("{m} elements exceed the exact Problem A limit")));
    }
    let mut best = ProblemASolution { set: Vec::new(), value: 0.0 };
    for mask in 1u32..(1u32 << m) {
        if p.implications.iter().any(|&(i, j)| mask >> i & 1 == 1 && mask >> j & 1 == 0) {
            continue;
        }
        let set: Vec<usize> = (0..m).filter(|&k| mask >> k & 1 == 1).collect();
        let v = p.value(&set);
        if v > best.value {
            best = ProblemASolution { set, value: v };
        }
    }
    Ok(best)
}

/// Best single closure `B_j`; within a factor `n` of the optimum.
pub fn problem_a_approx(p: &ProblemA) -> ProblemASolution {
    let mut best = ProblemASolution { set: Vec::new(), value: 0.0 };
    for j in 0..p.len() {
        let set = p.closure(j);
        let v = p.value(&set);
        if v > best.value {
            best = ProblemASolution { set, value: v };
        }
    }
    best
}

/// A valid partial policy with box `target`'s threshold left free in
/// `[lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MoveBoundResult {
    pub target: usize,
    pub order: Vec<usize>,
    /// Thresholds of every box; the target's entry is `lower`.
    pub thresholds: Vec<f64>,
    /// Boxes in front of the target.
    pub front: Vec<usize>,
    pub lower: f64,
    pub upper: f64,
    /// `F_{π,i}(upper) - F_{π,i}(lower)` under the supplied CDFs.
    pub reach_gap: f64,
}

impl MoveBoundResult {
    pub fn policy_at(&self, tau: f64) -> PandoraAction {
        let mut th = self.thresholds.clone();
        th[self.target] = tau;
        PandoraAction::new(self.order.clone(), th)
    }
}

fn reach(cdfs: &[&dyn CdfView], front: &[usize], x: f64) -> f64 {
    front.iter().map(|&k| cdfs[k].at(x)).product()
}

// Partial policy for a given front set, or None when the endpoints cross.
fn front_policy(group: &ConstraintGroup, i: usize, in_front: &[bool], cdfs: &[&dyn CdfView]) -> Option<MoveBoundResult> {
    let n = group.n();
    let mut upper = group.upper(i);
    let mut lower = group.lower(i);
    let (mut front, mut back) = (Vec::new(), Vec::new());
    for k in (0..n).filter(|&k| k != i) {
        if in_front[k] {
            upper = upper.min(group.upper(k));
            front.push(k);
        } else {
            lower = lower.max(group.lower(k));
            back.push(k);
        }
    }
    if lower > upper {
        return None;
    }
    let before = |a: usize, b: usize| group.has(a, b);
    let mut order = order_by_threshold(&front, |k| group.upper(k), before);
    let sorted_front = order.clone();
    order.push(i);
    order.extend(order_by_threshold(&back, |k| group.lower(k), before));
    let mut thresholds = group.intervals.lowers();
    for &k in &front {
        thresholds[k] = group.upper(k);
    }
    thresholds[i] = lower;
    let reach_gap = reach(cdfs, &front, upper) - reach(cdfs, &front, lower);
    Some(MoveBoundResult { target: i, order, thresholds, front: sorted_front, lower, upper, reach_gap })
}

fn front_allowed(group: &ConstraintGroup, i: usize, in_front: &[bool]) -> bool {
    let n = group.n();
    for k in (0..n).filter(|&k| k != i) {
        if group.has(k, i) && !in_front[k] {
            return false;
        }
        if group.has(i, k) && in_front[k] {
            return false;
        }
        for j in (0..n).filter(|&j| j != i) {
            if group.has(k, j) && !in_front[k] && in_front[j] {
                return false;
            }
        }
    }
    true
}

/// Finds a partial policy maximizing the reach gap of box `i` between the
/// two admissible values of its threshold. `cdfs[k]` must give `P(X_k < x)`.
pub fn find_movebound(
    group: &ConstraintGroup,
    i: usize,
    cdfs: &[&dyn CdfView],
    mode: SearchMode,
) -> Result<MoveBoundResult> {
    let n = group.n();
    if i >= n || cdfs.len() != n {
        return Err(Error::arg("box index or CDF count does not match the group"));
    }
    let best = match mode {
        SearchMode::Exact => movebound_exact(group, i, cdfs)?,
        SearchMode::Approx => movebound_approx(group, i, cdfs),
    };
    // The all-lower-bounds policy is always admissible, so a result exists.
    best.ok_or_else(|| Error::Invariant(format!("no admissible front set for box {i}")))
}

fn movebound_exact(group: &ConstraintGroup, i: usize, cdfs: &[&dyn CdfView]) -> Result<Option<MoveBoundResult>> {
    let n = group.n();
    if n > EXACT_SEARCH_LIMIT {
        return Err(Error::Capability(format!("exact move-bound search is limited to {EXACT_SEARCH_LIMIT} boxes")));
    }
    let others: Vec<usize> = (0..n).filter(|&k| k != i).collect();
    let mut best: Option<MoveBoundResult> = None;
    let mut in_front = alloc::vec![false; n];
    for mask in 0u32..(1u32 << others.len()) {
        for (bit, &k) in others.iter().enumerate() {
            in_front[k] = mask >> bit & 1 == 1;
        }
        if !front_allowed(group, i, &in_front) {
            continue;
        }
        if let Some(r) = front_policy(group, i, &in_front, cdfs) {
            if best.as_ref().map_or(true, |b| r.reach_gap > b.reach_gap) {
                best = Some(r);
            }
        }
    }
    Ok(best)
}

fn movebound_approx(group: &ConstraintGroup, i: usize, cdfs: &[&dyn CdfView]) -> Option<MoveBoundResult> {
    let n = group.n();
    let (li, ui) = group.intervals.get(i);
    let mut cands: Vec<f64> = alloc::vec![li, ui];
    for k in 0..n {
        for x in [group.lower(k), group.upper(k)] {
            if li <= x && x <= ui {
                cands.push(x);
            }
        }
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let mut best: Option<MoveBoundResult> = None;
    let consider = |in_front: &[bool], best: &mut Option<MoveBoundResult>| {
        if let Some(r) = front_policy(group, i, in_front, cdfs) {
            if best.as_ref().map_or(true, |b| r.reach_gap > b.reach_gap) {
                *best = Some(r);
            }
        }
    };
    // The canonical policy is always admissible.
    let canon: Vec<bool> = (0..n)
        .map(|k| k != i && (group.lower(k) > li || group.has(k, i) || (group.lower(k) == li && k < i && !group.has(i, k))))
        .collect();
    if front_allowed(group, i, &canon) {
        consider(&canon, &mut best);
    }
    for (x, &lc) in cands.iter().enumerate() {
        for &uc in &cands[x..] {
            if let Some(in_front) = approx_front(group, i, lc, uc, cdfs) {
                consider(&in_front, &mut best);
            }
        }
    }
    best
}

// Front set for fixed endpoints: forced members, forced outsiders, and a
// Problem A over the free boxes with the forced members merged into one
// element every free box implies.
fn approx_front(group: &ConstraintGroup, i: usize, lc: f64, uc: f64, cdfs: &[&dyn CdfView]) -> Option<Vec<bool>> {
    let n = group.n();
    let mut must_in = alloc::vec![false; n];
    let mut must_out = alloc::vec![false; n];
    for k in (0..n).filter(|&k| k != i) {
        if group.lower(k) > lc || group.has(k, i) {
            must_in[k] = true;
        }
        if group.upper(k) < uc || group.has(i, k) {
            must_out[k] = true;
        }
    }
    for k in 0..n {
        for j in 0..n {
            if group.has(k, j) && must_in[j] {
                must_in[k] = true;
            }
            if group.has(j, k) && must_out[j] {
                must_out[k] = true;
            }
        }
    }
    if (0..n).any(|k| must_in[k] && must_out[k]) || must_in[i] || must_out[i] {
        return None;
    }
    let free: Vec<usize> = (0..n).filter(|&k| k != i && !must_in[k] && !must_out[k]).collect();
    let forced: Vec<usize> = (0..n).filter(|&k| must_in[k]).collect();
    let mut a: Vec<f64> = free.iter().map(|&k| cdfs[k].at(lc)).collect();
    let mut b: Vec<f64> = free.iter().map(|&k| cdfs[k].at(uc)).collect();
    let mut imp = Vec::new();
    for (x, &k) in free.iter().enumerate() {
        for (y, &j) in free.iter().enumerate() {
            if group.has(j, k) {
                imp.push((x, y));
            }
        }
    }
    if !forced.is_empty() {
        let s = free.len();
        a.push(reach(cdfs, &forced, lc));
        b.push(reach(cdfs, &forced, uc));
        for x in 0..s {
            imp.push((x, s));
        }
    }
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        // estimates at lc <= uc are ordered already; guard rounding
        *x = x.clamp(0.0, 1.0);
        *y = y.clamp(*x, 1.0);
    }
    let problem = ProblemA::new(a, b, imp).ok()?;
    let sol = problem_a_approx(&problem);
    let mut in_front = must_in;
    for &x in &sol.set {
        if x < free.len() {
            in_front[free[x]] = true;
        }
    }
    Some(in_front)
}

/// Bounding-function numerator for moving box `i`'s threshold between `ℓ`
/// and `u` under a fixed partial policy with front boxes `front`:
/// `F_π(u)∫_τ^u(F_i-1) + F_π(ℓ)∫_ℓ^τ(F_i-1) - ∫_ℓ^u F_π(F_i-1)`.
pub fn delta_move(front: &[&dyn CdfView], fi: &dyn CdfView, l: f64, u: f64, tau: f64) -> f64 {
    MoveTerms::new(front, fi, l, u).at(fi, tau)
}

// The τ-free parts of `delta_move`, computed once per phase.
struct MoveTerms {
    l: f64,
    u: f64,
    h_l: f64,
    h_u: f64,
    tail: f64,
}

impl MoveTerms {
    fn new(front: &[&dyn CdfView], fi: &dyn CdfView, l: f64, u: f64) -> Self {
        let h = |x: f64| front.iter().map(|f| f.at(x)).product::<f64>();
        let mut views: Vec<&dyn CdfView> = front.to_vec();
        views.push(fi);
        let k = front.len();
        let tail = integrate_product(l, u, &views, |v| v[..k].iter().product::<f64>() * (v[k] - 1.0));
        MoveTerms { l, u, h_l: h(l), h_u: h(u), tail }
    }

    fn at(&self, fi: &dyn CdfView, tau: f64) -> f64 {
        let slope = |a: f64, b: f64| fi.integral(a, b) - (b - a);
        self.h_u * slope(tau, self.u) + self.h_l * slope(self.l, tau) - self.tail
    }
}

/// Bounding-function numerator for the fixed-order two-box game:
/// `(ĝ(u)-ĝ(τ))F₁(u) - (ĝ(ℓ)-ĝ(τ))F₁(ℓ) - ∫_ℓ^u (F₂-1)F₁`.
pub fn delta_fixed_order(f1: &dyn CdfView, f2: &dyn CdfView, l: f64, u: f64, tau: f64) -> f64 {
    delta_move(&[f1], f2, l, u, tau)
}

/// `ĝ(v) = -c + (1 - v) - ∫_v^1 F`.
pub fn gain_estimate(f: &dyn CdfView, cost: f64, v: f64) -> f64 {
    -cost + (1.0 - v) - f.integral(v, 1.0)
}

/// `{ τ ∈ [0, 1] : |ĝ(τ)| <= half }` for an empirical gain function.
pub fn gain_interval(f: &EmpiricalCdf, cost: f64, half: f64) -> Result<(f64, f64)> {
    let mut knots = alloc::vec![(0.0, -gain_estimate(f, cost, 0.0))];
    for &x in f.jumps_between(0.0, 1.0) {
        if knots.last().map_or(true, |k| k.0 < x) {
            knots.push((x, -gain_estimate(f, cost, x)));
        }
    }
    knots.push((1.0, -gain_estimate(f, cost, 1.0)));
    if knots[0].1 > half {
        return Err(Error::NoRoot(format!("estimated gain at 0 is {} for cost {cost}", -knots[0].1)));
    }
    let (g, _) = PiecewiseLinear::monotone(knots);
    let set = g.level_set(-half, half);
    Ok((set.lo, set.hi))
}

/// Plays `count` single-open rounds of box `b` and recovers its values.
pub fn harvest<E>(env: &mut E, n: usize, b: usize, cost: f64, count: u64) -> Result<EmpiricalCdf>
where
    E: Environment<Action = PandoraAction>,
{
    let xs = collect(env, &PandoraAction::single(n, b), count)?;
    EmpiricalCdf::new(xs.into_iter().map(|r| (r + cost).clamp(0.0, 1.0)).collect())
}

/// Fresh estimates for every box from `count` samples each.
pub fn estimate_cdfs<E>(env: &mut E, costs: &[f64], count: u64, generation: u64) -> Result<CdfEstimates>
where
    E: Environment<Action = PandoraAction>,
{
    let n = costs.len();
    let fhat = (0..n).map(|b| harvest(env, n, b, costs[b], count)).collect::<Result<Vec<_>>>()?;
    Ok(CdfEstimates { fhat, product_error_budget: 0.0, generation })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitPandora {
    pub estimates: CdfEstimates,
    pub intervals: ConfidenceIntervals,
    pub rounds: u64,
}

/// `c_init √T ln T` single-open samples per box; each interval is
/// `{ τ : |ĝ_i(τ)| <= T^{-1/4}/2 }`.
pub fn init_pandora<E>(env: &mut E, costs: &[f64], c_init: f64) -> Result<InitPandora>
where
    E: Environment<Action = PandoraAction>,
{
    let t = env.horizon();
    let count = rounds(c_init * sqrt(t as f64) * log_horizon(t));
    env.note(PhaseNote { phase: 0, epsilon: 0.0, kind: RoundKind::Init });
    let estimates = estimate_cdfs(env, costs, count, 0)?;
    let half = 0.5 * quarter_root(t);
    let bounds = estimates
        .fhat
        .iter()
        .zip(costs)
        .map(|(f, &c)| gain_interval(f, c, half))
        .collect::<Result<Vec<_>>>()?;
    Ok(InitPandora {
        estimates: CdfEstimates { product_error_budget: quarter_root(t), ..estimates },
        intervals: ConfidenceIntervals::new(bounds)?,
        rounds: count * costs.len() as u64,
    })
}

/// The fixed-order action: box 1 always opened, box 2 opened when the
/// first value is below `tau`.
pub fn fixed_order_action(tau: f64) -> PandoraAction {
    PandoraAction::new(alloc::vec![0, 1], alloc::vec![ABOVE, tau])
}

/// One phase of the fixed-order interval-shrinking algorithm; keeps
/// `{ τ : |δ̂(τ)| <= 4ε }`.
pub fn isa_fixed_order<E>(
    env: &mut E,
    interval: &ConfidenceIntervals,
    fhat1: &dyn CdfView,
    fhat2: &dyn CdfView,
    epsilon: f64,
    c_explore: f64,
) -> Result<PhaseReport>
where
    E: Environment<Action = PandoraAction>,
{
    if interval.len() != 1 {
        return Err(Error::arg("the fixed-order learner takes one interval"));
    }
    let (l, u) = interval.get(0);
    let m = rounds(c_explore * log_horizon(env.horizon()) / (epsilon * epsilon));
    let r_l = average(env, &fixed_order_action(l), m)?;
    let r_u = average(env, &fixed_order_action(u), m)?;
    let d = r_u - r_l;
    let terms = MoveTerms::new(&[fhat1], fhat2, l, u);
    let knots = knots_over(l, u, fhat2, |tau| terms.at(fhat2, tau) - d);
    let (mut flags, mut trace) = (Vec::new(), Vec::new());
    let (a, b) = cut(0, knots, -4.0 * epsilon, 4.0 * epsilon, &mut flags, &mut trace);
    Ok(PhaseReport {
        epsilon,
        rounds_used: 2 * m,
        refined: ConfidenceIntervals::new(alloc::vec![(a, b)])?,
        delta_hat_trace: trace,
        flags,
    })
}

fn knots_over(l: f64, u: f64, f: &dyn CdfView, delta: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    let mut xs = alloc::vec![l, u];
    f.cuts(l, u, &mut xs);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.into_iter().map(|x| (x, delta(x))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PbisaReport {
    pub index: usize,
    pub movebound: MoveBoundResult,
    pub refined: (f64, f64),
    pub rounds: u64,
    pub generation: u64,
    pub trace: Option<DeltaTrace>,
    pub flags: Vec<Flag>,
}

/// Interval shrinking for box `i` under a move-bound policy. Consumes the
/// estimates, which must come from samples no other call has used.
#[allow(clippy::too_many_arguments)]
pub fn pbisa<E>(
    env: &mut E,
    group: &ConstraintGroup,
    i: usize,
    epsilon: f64,
    c_explore: f64,
    estimates: CdfEstimates,
    mode: SearchMode,
) -> Result<PbisaReport>
where
    E: Environment<Action = PandoraAction>,
{
    let views: Vec<&dyn CdfView> = estimates.fhat.iter().map(|f| f as &dyn CdfView).collect();
    let mb = find_movebound(group, i, &views, mode)?;
    let (li, ui) = group.intervals.get(i);
    let mut report = PbisaReport {
        index: i,
        refined: (li, ui),
        rounds: 0,
        generation: estimates.generation,
        trace: None,
        flags: Vec::new(),
        movebound: mb,
    };
    let mb = &report.movebound;
    if !(mb.reach_gap > 0.0) || mb.lower >= mb.upper {
        report.flags.push(Flag::NoReach { index: i });
        return Ok(report);
    }
    let m = rounds(c_explore * log_horizon(env.horizon()) / (epsilon * epsilon));
    let (l, u) = (mb.lower, mb.upper);
    let r_u = average(env, &mb.policy_at(u), m)?;
    let r_l = average(env, &mb.policy_at(l), m)?;
    let d = r_u - r_l;
    let front: Vec<&dyn CdfView> = mb.front.iter().map(|&k| views[k]).collect();
    let terms = MoveTerms::new(&front, views[i], l, u);
    let knots = knots_over(li, ui, views[i], |tau| terms.at(views[i], tau) - d);
    let mut trace = Vec::new();
    report.refined = cut(i, knots, -epsilon, epsilon, &mut report.flags, &mut trace);
    report.trace = trace.pop();
    report.rounds = 2 * m;
    Ok(report)
}

/// The two adjacent-order policies of a swap test.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapTestPolicy {
    pub tau: f64,
    /// `i` directly before `j`.
    pub first: PandoraAction,
    /// `j` directly before `i`.
    pub second: PandoraAction,
}

/// Both boxes at `τ = max(ℓ_i, ℓ_j)`; boxes that must or may precede them
/// sit at their upper bounds in front, the rest at their lower bounds behind.
pub fn swap_policy(group: &ConstraintGroup, i: usize, j: usize) -> Result<SwapTestPolicy> {
    if !group.unordered(i, j) {
        return Err(Error::Precondition(format!("boxes {i} and {j} are already ordered")));
    }
    let tau = group.lower(i).max(group.lower(j));
    if tau > group.upper(i).min(group.upper(j)) {
        return Err(Error::Precondition(format!("intervals of boxes {i} and {j} are disjoint")));
    }
    let n = group.n();
    let (mut front, mut back) = (Vec::new(), Vec::new());
    let mut th = group.intervals.lowers();
    for k in (0..n).filter(|&k| k != i && k != j) {
        if group.has(k, i) || group.has(k, j) || group.lower(k) > tau {
            front.push(k);
            th[k] = group.upper(k);
        } else {
            back.push(k);
        }
    }
    th[i] = tau;
    th[j] = tau;
    let before = |a: usize, b: usize| group.has(a, b);
    let head = order_by_threshold(&front, |k| group.upper(k), before);
    let tail = order_by_threshold(&back, |k| group.lower(k), before);
    let build = |x: usize, y: usize| {
        let mut order = head.clone();
        order.push(x);
        order.push(y);
        order.extend_from_slice(&tail);
        PandoraAction::new(order, th.clone())
    };
    Ok(SwapTestPolicy { tau, first: build(i, j), second: build(j, i) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwapOutcome {
    pub pair: (usize, usize),
    pub added: Option<(usize, usize)>,
    /// Boxes whose lower bound moved.
    pub lowered: Vec<usize>,
    pub r_first: f64,
    pub r_second: f64,
    pub rounds: u64,
}

/// Plays both swap-test policies `c ln T / (n² ε²)` times. A gap above
/// `40nε` adds the winning order to the group.
pub fn swaptest<E>(
    env: &mut E,
    group: &mut ConstraintGroup,
    i: usize,
    j: usize,
    epsilon: f64,
    c_explore: f64,
) -> Result<SwapOutcome>
where
    E: Environment<Action = PandoraAction>,
{
    let pol = swap_policy(group, i, j)?;
    let nf = group.n() as f64;
    let m = rounds(c_explore * log_horizon(env.horizon()) / (nf * nf * epsilon * epsilon));
    let r_first = average(env, &pol.first, m)?;
    let r_second = average(env, &pol.second, m)?;
    let mut out = SwapOutcome { pair: (i, j), added: None, lowered: Vec::new(), r_first, r_second, rounds: 2 * m };
    if (r_first - r_second).abs() > 40.0 * nf * epsilon {
        let (a, b) = if r_first > r_second { (i, j) } else { (j, i) };
        out.lowered = group.add_constraint(a, b)?;
        out.added = Some((a, b));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanAlgReport {
    pub group: ConstraintGroup,
    pub pbisa: Vec<PbisaReport>,
    pub swaps: Vec<SwapOutcome>,
    pub swaptests: usize,
    /// Constraints added in this phase, in order.
    pub added: Vec<(usize, usize)>,
    pub flags: Vec<Flag>,
}

/// One constraint-updating phase: fresh estimates and interval shrinking
/// for every box, then swap tests over the unordered pairs until the queue
/// drains.
#[allow(clippy::too_many_arguments)]
pub fn pan_alg<E>(
    env: &mut E,
    group: &ConstraintGroup,
    costs: &[f64],
    epsilon: f64,
    consts: &Constants,
    mode: SearchMode,
    generation: &mut u64,
    phase: u32,
) -> Result<PanAlgReport>
where
    E: Environment<Action = PandoraAction>,
{
    let n = group.n();
    let nf = n as f64;
    let t = env.horizon();
    let count = rounds(consts.c_estimate * nf * nf * log_horizon(t) / epsilon);
    let mut refined = group.clone();
    let mut reports = Vec::with_capacity(n);
    let mut flags = Vec::new();
    for i in 0..n {
        env.note(PhaseNote { phase, epsilon, kind: RoundKind::Estimate });
        *generation += 1;
        let est = estimate_cdfs(env, costs, count, *generation)?;
        env.note(PhaseNote { phase, epsilon, kind: RoundKind::Explore });
        let rep = pbisa(env, group, i, epsilon, consts.c_explore, est, mode)?;
        refined.set_interval(i, rep.refined.0, rep.refined.1);
        flags.extend(rep.flags.iter().cloned());
        reports.push(rep);
    }
    refined.tighten()?;
    let mut added = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if refined.unordered(i, j) && refined.lower(i) > refined.upper(j) {
                refined.add_constraint(i, j)?;
                added.push((i, j));
            }
        }
    }
    env.note(PhaseNote { phase, epsilon, kind: RoundKind::Swap });
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    for i in 0..n {
        for j in i + 1..n {
            if refined.unordered(i, j) {
                queue.push_back((i, j));
            }
        }
    }
    let limit = 4 * n * n * n;
    let mut swaps = Vec::new();
    let mut tests = 0;
    while let Some((i, j)) = queue.pop_front() {
        if !refined.unordered(i, j) {
            continue;
        }
        let lowered = if refined.lower(i) > refined.upper(j) || refined.lower(j) > refined.upper(i) {
            let (a, b) = if refined.lower(i) > refined.upper(j) { (i, j) } else { (j, i) };
            added.push((a, b));
            refined.add_constraint(a, b)?
        } else {
            tests += 1;
            if tests > limit {
                return Err(Error::Invariant(format!("more than {limit} swap tests in one phase")));
            }
            let out = swaptest(env, &mut refined, i, j, epsilon, consts.c_explore)?;
            if let Some(e) = out.added {
                added.push(e);
            }
            let l = out.lowered.clone();
            swaps.push(out);
            l
        };
        for &k in &lowered {
            for k2 in 0..n {
                let p = (k.min(k2), k.max(k2));
                if refined.unordered(k, k2) && !queue.contains(&p) {
                    queue.push_back(p);
                }
            }
        }
    }
    refined.check()?;
    Ok(PanAlgReport { group: refined, pbisa: reports, swaps, swaptests: tests, added, flags })
}

/// One step of a policy conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyOp {
    /// Set the threshold of `index` to `to`.
    Move { index: usize, to: f64 },
    /// Exchange two adjacent boxes; `front` is the one currently ahead.
    Swap { front: usize, back: usize },
}

pub fn apply_op(policy: &PandoraAction, op: PolicyOp) -> Result<PandoraAction> {
    let mut p = policy.clone();
    match op {
        PolicyOp::Move { index, to } => p.thresholds[index] = to,
        PolicyOp::Swap { front, back } => {
            let x = p.order.iter().position(|&b| b == front);
            match x {
                Some(x) if x + 1 < p.order.len() && p.order[x + 1] == back => p.order.swap(x, x + 1),
                _ => return Err(Error::Precondition(format!("boxes {front} and {back} are not adjacent"))),
            }
        }
    }
    Ok(p)
}

/// An explicit sequence of moves and swaps with every intermediate policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Conversion {
    pub ops: Vec<PolicyOp>,
    /// `policies[0]` is the start and `policies[k+1]` follows `ops[k]`.
    pub policies: Vec<PandoraAction>,
}

impl Conversion {
    pub fn moves(&self) -> usize {
        self.ops.iter().filter(|o| matches!(o, PolicyOp::Move { .. })).count()
    }

    pub fn swaps(&self) -> usize {
        self.ops.len() - self.moves()
    }

    fn reversed(&self) -> Conversion {
        let mut ops = Vec::with_capacity(self.ops.len());
        for (k, op) in self.ops.iter().enumerate().rev() {
            ops.push(match *op {
                PolicyOp::Move { index, .. } => PolicyOp::Move { index, to: self.policies[k].thresholds[index] },
                PolicyOp::Swap { front, back } => PolicyOp::Swap { front: back, back: front },
            });
        }
        let mut policies = self.policies.clone();
        policies.reverse();
        Conversion { ops, policies }
    }
}

fn from_canonical(group: &ConstraintGroup, target: &PandoraAction) -> Result<Conversion> {
    let mut cur = group.canonical_policy();
    let mut conv = Conversion { ops: Vec::new(), policies: alloc::vec![cur.clone()] };
    let mut push = |cur: &mut PandoraAction, op: PolicyOp| -> Result<()> {
        *cur = apply_op(cur, op)?;
        conv.ops.push(op);
        conv.policies.push(cur.clone());
        Ok(())
    };
    for pos in 0..target.order.len() {
        let b = target.order[pos];
        let mut p = cur.order.iter().position(|&x| x == b).expect("same boxes");
        while p > pos {
            let pred = cur.order[p - 1];
            if cur.thresholds[b] != cur.thresholds[pred] {
                let to = cur.thresholds[pred];
                push(&mut cur, PolicyOp::Move { index: b, to })?;
            }
            push(&mut cur, PolicyOp::Swap { front: pred, back: b })?;
            p -= 1;
        }
        if cur.thresholds[b] != target.thresholds[b] {
            push(&mut cur, PolicyOp::Move { index: b, to: target.thresholds[b] })?;
        }
    }
    Ok(conv)
}

/// Converts a valid policy into the canonical all-lower-bounds policy with
/// at most `n²` moves and `n²` swaps.
pub fn convert_policy(group: &ConstraintGroup, policy: &PandoraAction) -> Result<Conversion> {
    if let Err(v) = validate_policy(group, policy) {
        return Err(Error::Action(format!("policy is not valid for the group: {v:?}")));
    }
    Ok(from_canonical(group, policy)?.reversed())
}

/// Path from `from` to `to` through the canonical policy.
pub fn path_between(group: &ConstraintGroup, from: &PandoraAction, to: &PandoraAction) -> Result<Conversion> {
    let mut first = convert_policy(group, from)?;
    if let Err(v) = validate_policy(group, to) {
        return Err(Error::Action(format!("policy is not valid for the group: {v:?}")));
    }
    let second = from_canonical(group, to)?;
    first.ops.extend(second.ops);
    first.policies.extend(second.policies.into_iter().skip(1));
    Ok(first)
}

/// Fixed-order two-box learner: initialization from samples of the second
/// box, then [`isa_fixed_order`] phases with fresh estimates.
#[derive(Debug, Clone)]
pub struct PandoraFixedOrder {
    costs: [f64; 2],
    consts: Constants,
    interval: ConfidenceIntervals,
    history: Vec<PhaseReport>,
}

impl PandoraFixedOrder {
    pub fn new(costs: [f64; 2], consts: Constants) -> Self {
        PandoraFixedOrder { costs, consts, interval: ConfidenceIntervals::full(1), history: Vec::new() }
    }

    pub fn interval(&self) -> &ConfidenceIntervals {
        &self.interval
    }

    pub fn history(&self) -> &[PhaseReport] {
        &self.history
    }
}

impl<E: Environment<Action = PandoraAction>> Refiner<E> for PandoraFixedOrder {
    fn size(&self) -> usize {
        2
    }

    fn initialize(&mut self, env: &mut E) -> Result<()> {
        let t = env.horizon();
        let count = rounds(self.consts.c_init * sqrt(t as f64) * log_horizon(t));
        env.note(PhaseNote { phase: 0, epsilon: 0.0, kind: RoundKind::Init });
        let f2 = harvest(env, 2, 1, self.costs[1], count)?;
        let (l, u) = gain_interval(&f2, self.costs[1], 0.5 * quarter_root(t))?;
        self.interval = ConfidenceIntervals::new(alloc::vec![(l, u)])?;
        Ok(())
    }

    fn refine(&mut self, env: &mut E, epsilon: f64, phase: u32) -> Result<PhaseSummary> {
        let count = rounds(self.consts.c_estimate_fixed * log_horizon(env.horizon()) / epsilon);
        env.note(PhaseNote { phase, epsilon, kind: RoundKind::Estimate });
        let f1 = harvest(env, 2, 0, self.costs[0], count)?;
        let f2 = harvest(env, 2, 1, self.costs[1], count)?;
        env.note(PhaseNote { phase, epsilon, kind: RoundKind::Explore });
        let rep = isa_fixed_order(env, &self.interval, &f1, &f2, epsilon, self.consts.c_explore)?;
        self.interval = rep.refined.clone();
        let flags = rep.flags.clone();
        self.history.push(rep);
        Ok(PhaseSummary { flags, ..Default::default() })
    }

    fn tail_action(&self) -> PandoraAction {
        fixed_order_action(self.interval.midpoints()[0])
    }
}

/// General learner. Works on the instance scaled by `1/(2n)`; the
/// environment it is given stays in original units.
#[derive(Debug, Clone)]
pub struct PandoraGeneral {
    costs: Vec<f64>,
    consts: Constants,
    mode: SearchMode,
    group: ConstraintGroup,
    generation: u64,
    history: Vec<PanAlgReport>,
}

impl PandoraGeneral {
    pub fn new(costs: Vec<f64>, consts: Constants, mode: SearchMode) -> Result<Self> {
        if costs.is_empty() {
            return Err(Error::arg("need at least one box"));
        }
        let n = costs.len();
        let f = 1.0 / (2.0 * n as f64);
        Ok(PandoraGeneral {
            costs: costs.iter().map(|c| c * f).collect(),
            consts,
            mode,
            group: ConstraintGroup::new(ConfidenceIntervals::full(n)),
            generation: 0,
            history: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.costs.len()
    }

    /// Current group in scaled units.
    pub fn group(&self) -> &ConstraintGroup {
        &self.group
    }

    pub fn history(&self) -> &[PanAlgReport] {
        &self.history
    }

    pub fn scale(&self) -> f64 {
        2.0 * self.n() as f64
    }
}

impl<E: Environment<Action = PandoraAction>> Refiner<E> for PandoraGeneral {
    fn size(&self) -> usize {
        self.n()
    }

    fn initialize(&mut self, env: &mut E) -> Result<()> {
        let n = self.n();
        let mut scaled = ScaledPandora::new(&mut *env, n);
        let init = init_pandora(&mut scaled, &self.costs, self.consts.c_init)?;
        let mut group = ConstraintGroup::new(init.intervals);
        group.add_disjoint()?;
        self.group = group;
        Ok(())
    }

    fn refine(&mut self, env: &mut E, epsilon: f64, phase: u32) -> Result<PhaseSummary> {
        let n = self.n();
        let mut scaled = ScaledPandora::new(&mut *env, n);
        let rep = pan_alg(
            &mut scaled,
            &self.group,
            &self.costs,
            epsilon,
            &self.consts,
            self.mode,
            &mut self.generation,
            phase,
        )?;
        self.group = rep.group.clone();
        let summary = PhaseSummary { flags: rep.flags.clone(), swaptests: rep.swaptests, ..Default::default() };
        self.history.push(rep);
        Ok(summary)
    }

    fn tail_action(&self) -> PandoraAction {
        self.group.canonical_policy().rescaled(self.scale())
    }
}
