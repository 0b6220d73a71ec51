mod common;

use std::cell::RefCell;
use std::rc::Rc;

use common::*;
use proptest::prelude::*;
use stopbandit_core::distributions::{BoundedDistribution, CdfView, LeftLimit};
use stopbandit_core::doubling::{run_doubling, Constants, DoublingConfig};
use stopbandit_core::environments::*;
use stopbandit_core::oracle::{pandora_utility, swap_difference, weitzman};
use stopbandit_core::pandora_learner::*;
use stopbandit_core::prophet_learner::ConfidenceIntervals;
use stopbandit_core::{rng_stream, uniform01, Error, Result, SimRng, ABOVE};

fn group(bounds: &[(f64, f64)], edges: &[(usize, usize)]) -> ConstraintGroup {
    ConstraintGroup::with_constraints(ConfidenceIntervals::new(bounds.to_vec()).unwrap(), edges).unwrap()
}

/// Random valid group: endpoints on a coarse lattice so ties happen, and
/// constraints only between dominating pairs.
fn random_group(r: &mut SimRng, n: usize) -> ConstraintGroup {
    let bounds: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let a = below(r, 9) as f64 / 8.0;
            let b = below(r, 9) as f64 / 8.0;
            (a.min(b), a.max(b))
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let dominates = i != j && bounds[i].0 >= bounds[j].0 && bounds[i].1 >= bounds[j].1;
            // equal intervals only one way
            let strict = bounds[i] != bounds[j] || i < j;
            if dominates && strict && uniform01(r) < 0.4 {
                edges.push((i, j));
            }
        }
    }
    group(&bounds, &edges)
}

/// Random valid policy for `g`.
fn random_policy(r: &mut SimRng, g: &ConstraintGroup) -> PandoraAction {
    let n = g.n();
    let mut tau: Vec<f64> = (0..n)
        .map(|k| {
            let (l, u) = g.intervals().get(k);
            match below(r, 3) {
                0 => l,
                1 => u,
                _ => l + (u - l) * uniform01(r),
            }
        })
        .collect();
    loop {
        let mut moved = false;
        for (a, b) in g.constraints() {
            if tau[a] < tau[b] {
                tau[b] = tau[a];
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    let preds: Vec<usize> = (0..n).map(|k| (0..n).filter(|&p| g.has(p, k)).count()).collect();
    let noise: Vec<f64> = (0..n).map(|_| uniform01(r)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        tau[b].total_cmp(&tau[a]).then(preds[a].cmp(&preds[b])).then(noise[a].total_cmp(&noise[b]))
    });
    PandoraAction::new(order, tau)
}

fn exact_views(inst: &PandoraInstance) -> Vec<LeftLimit<'_>> {
    inst.dists.iter().map(LeftLimit).collect()
}

#[test]
fn validation_reports_each_violation() {
    let g = group(&[(0.5, 0.8), (0.2, 0.6), (0.1, 0.3)], &[(0, 1)]);
    let ok = PandoraAction::new(vec![0, 1, 2], vec![0.6, 0.5, 0.2]);
    assert!(validate_policy(&g, &ok).is_ok());
    let swapped = PandoraAction::new(vec![1, 0, 2], vec![0.6, 0.6, 0.2]);
    let v = validate_policy(&g, &swapped).unwrap_err();
    assert!(v.contains(&Violation::OrderConstraint { before: 0, after: 1 }));
    let rising = PandoraAction::new(vec![0, 2, 1], vec![0.6, 0.5, 0.2]);
    let v = validate_policy(&g, &rising).unwrap_err();
    assert!(v.contains(&Violation::Increasing { earlier: 2, later: 1 }));
    let outside = PandoraAction::new(vec![0, 1, 2], vec![0.9, 0.5, 0.2]);
    assert!(matches!(validate_policy(&g, &outside).unwrap_err()[0], Violation::OutOfInterval { index: 0, .. }));
}

#[test]
fn random_policies_are_valid() {
    for seed in 0..300 {
        let mut r = rng(seed);
        let n = 2 + below(&mut r, 7);
        let g = random_group(&mut r, n);
        g.check().unwrap();
        let p = random_policy(&mut r, &g);
        assert_eq!(validate_policy(&g, &p), Ok(()), "seed {seed}");
        assert_eq!(validate_policy(&g, &g.canonical_policy()), Ok(()));
    }
}

#[test]
fn constraints_tighten_bounds() {
    let mut g = group(&[(0.1, 0.5), (0.3, 0.9)], &[]);
    let lowered = g.add_constraint(0, 1).unwrap();
    assert_eq!(g.upper(1), 0.5);
    assert_eq!(g.lower(0), 0.3);
    assert_eq!(lowered, vec![0]);
    let mut g = group(&[(0.1, 0.2), (0.5, 0.9), (0.15, 0.6)], &[]);
    g.add_disjoint().unwrap();
    assert!(g.has(1, 0));
    assert!(g.unordered(0, 2) && g.unordered(1, 2));
}

#[test]
fn problem_a_constraint_changes_optimum() {
    let free = ProblemA::new(vec![0.0, 0.5], vec![1.0, 0.5], vec![]).unwrap();
    let s = problem_a_exact(&free).unwrap();
    assert_eq!(s.set, vec![0]);
    assert_eq!(s.value, 1.0);
    let tied = ProblemA::new(vec![0.0, 0.5], vec![1.0, 0.5], vec![(0, 1)]).unwrap();
    let s = problem_a_exact(&tied).unwrap();
    assert_eq!(s.set, vec![0, 1]);
    assert_eq!(s.value, 0.5);
    assert_eq!(problem_a_approx(&tied).value, 0.5);
    assert!(ProblemA::new(vec![0.6], vec![0.5], vec![]).is_err());
    let big = ProblemA::new(vec![0.0; 21], vec![1.0; 21], vec![]).unwrap();
    assert!(matches!(problem_a_exact(&big), Err(Error::Capability(_))));
}

#[test]
fn problem_a_approx_within_factor_n() {
    for seed in 0..200 {
        let mut r = rng(seed);
        let m = 1 + below(&mut r, 12);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for _ in 0..m {
            let x = uniform01(&mut r);
            let y = uniform01(&mut r);
            a.push(x.min(y));
            b.push(x.max(y));
        }
        let imps: Vec<(usize, usize)> =
            (0..below(&mut r, 2 * m)).map(|_| (below(&mut r, m), below(&mut r, m))).collect();
        let p = ProblemA::new(a, b, imps).unwrap();
        let e = problem_a_exact(&p).unwrap();
        let ap = problem_a_approx(&p);
        assert!(ap.value <= e.value + 1e-15);
        assert!(ap.value >= e.value / m as f64 - 1e-15, "seed {seed}");
        assert!((p.value(&ap.set) - ap.value).abs() < 1e-15);
    }
}

#[test]
fn movebound_two_box_hand_case() {
    let g = group(&[(0.2, 0.6), (0.3, 0.5)], &[]);
    let u = BoundedDistribution::uniform(0.0, 1.0).unwrap();
    let views = [LeftLimit(&u), LeftLimit(&u)];
    let cdfs: Vec<&dyn CdfView> = views.iter().map(|v| v as &dyn CdfView).collect();
    for mode in [SearchMode::Exact, SearchMode::Approx] {
        let mb = find_movebound(&g, 0, &cdfs, mode).unwrap();
        assert_eq!(mb.front, vec![1]);
        assert_eq!((mb.lower, mb.upper), (0.2, 0.5));
        assert!((mb.reach_gap - 0.3).abs() < 1e-12);
        assert_eq!(mb.order, vec![1, 0]);
        assert_eq!(validate_policy(&g, &mb.policy_at(0.2)), Ok(()));
        assert_eq!(validate_policy(&g, &mb.policy_at(0.5)), Ok(()));
    }
    // a forced order leaves no admissible gap for the later box
    let g = group(&[(0.3, 0.6), (0.2, 0.5)], &[(0, 1)]);
    let mb = find_movebound(&g, 0, &cdfs, SearchMode::Exact).unwrap();
    assert!(mb.front.is_empty());
    assert_eq!(mb.reach_gap, 0.0);
}

#[test]
fn movebound_approx_within_factor_n() {
    for seed in 0..150 {
        let mut r = rng(1000 + seed);
        let n = 2 + below(&mut r, 5);
        let g = random_group(&mut r, n);
        let inst = pandora_mixed(&mut r, n);
        let views = exact_views(&inst);
        let cdfs: Vec<&dyn CdfView> = views.iter().map(|v| v as &dyn CdfView).collect();
        for i in 0..n {
            let e = find_movebound(&g, i, &cdfs, SearchMode::Exact).unwrap();
            let a = find_movebound(&g, i, &cdfs, SearchMode::Approx).unwrap();
            assert!(a.reach_gap <= e.reach_gap + 1e-12, "seed {seed} box {i}");
            assert!(a.reach_gap >= e.reach_gap / n as f64 - 1e-12, "seed {seed} box {i}");
            for mb in [&e, &a] {
                assert!(mb.lower <= mb.upper);
                assert_eq!(validate_policy(&g, &mb.policy_at(mb.lower)), Ok(()), "seed {seed} box {i}");
                assert_eq!(validate_policy(&g, &mb.policy_at(mb.upper)), Ok(()), "seed {seed} box {i}");
            }
        }
    }
}

#[test]
fn move_delta_matches_oracle_difference() {
    for seed in 0..100 {
        let mut r = rng(2000 + seed);
        let n = 2 + below(&mut r, 4);
        let g = random_group(&mut r, n);
        let inst = pandora_mixed(&mut r, n);
        let views = exact_views(&inst);
        let cdfs: Vec<&dyn CdfView> = views.iter().map(|v| v as &dyn CdfView).collect();
        let i = below(&mut r, n);
        let mb = find_movebound(&g, i, &cdfs, SearchMode::Exact).unwrap();
        if mb.lower >= mb.upper {
            continue;
        }
        let tau = mb.lower + (mb.upper - mb.lower) * uniform01(&mut r);
        let front: Vec<&dyn CdfView> = mb.front.iter().map(|&k| cdfs[k]).collect();
        let d_hat = delta_move(&front, cdfs[i], mb.lower, mb.upper, tau);
        let d_true = pandora_utility(&inst, &mb.policy_at(mb.upper)).unwrap()
            - pandora_utility(&inst, &mb.policy_at(mb.lower)).unwrap();
        // δ(τ) = D - (H(u⁻) - H(ℓ⁻)) g_i(τ)
        let identity = d_true - mb.reach_gap * inst.gain(i, tau);
        assert!((d_hat - identity).abs() < 1e-10, "seed {seed}: {d_hat} vs {identity}");
    }
}

#[test]
fn conversion_within_bounds_and_valid() {
    for seed in 0..300 {
        let mut r = rng(3000 + seed);
        let n = 1 + below(&mut r, 8);
        let g = random_group(&mut r, n);
        let p = random_policy(&mut r, &g);
        let q = random_policy(&mut r, &g);
        let c = convert_policy(&g, &p).unwrap();
        assert!(c.moves() <= n * n && c.swaps() <= n * n, "seed {seed}");
        assert_eq!(c.policies.first(), Some(&p));
        assert_eq!(c.policies.last(), Some(&g.canonical_policy()));
        assert_eq!(c.policies.len(), c.ops.len() + 1);
        for (k, op) in c.ops.iter().enumerate() {
            assert_eq!(apply_op(&c.policies[k], *op).unwrap(), c.policies[k + 1]);
        }
        for pol in &c.policies {
            assert_eq!(validate_policy(&g, pol), Ok(()), "seed {seed}");
        }
        let path = path_between(&g, &p, &q).unwrap();
        assert!(path.moves() <= 2 * n * n && path.swaps() <= 2 * n * n);
        assert_eq!(path.policies.last(), Some(&q));
        assert!(path.policies.iter().all(|pol| validate_policy(&g, pol).is_ok()));
    }
}

#[test]
fn conversion_rejects_invalid_policy() {
    let g = group(&[(0.5, 0.8), (0.2, 0.6)], &[(0, 1)]);
    let bad = PandoraAction::new(vec![1, 0], vec![0.5, 0.5]);
    assert!(convert_policy(&g, &bad).is_err());
    let canon = g.canonical_policy();
    assert!(convert_policy(&g, &canon).unwrap().ops.is_empty());
}

fn point_masses(values: &[f64], costs: &[f64]) -> PandoraInstance {
    PandoraInstance::new(values.iter().map(|&v| BoundedDistribution::atom(v).unwrap()).collect(), costs.to_vec())
        .unwrap()
}

fn sim(inst: &PandoraInstance, horizon: u64, seed: u64) -> PandoraSim {
    Simulator::new(inst.clone(), horizon, rng_stream(seed, 7))
}

#[test]
fn init_contains_sigma_and_bounds_gain() {
    for seed in 0..20 {
        let mut r = rng(4000 + seed);
        let n = 2 + below(&mut r, 3);
        let inst = pandora_atoms(&mut r, n, 4, 16);
        let sigmas = weitzman(&inst).unwrap().sigmas;
        let t = 100_000;
        let mut env = sim(&inst, t, seed);
        let init = init_pandora(&mut env, &inst.costs, 4.0).unwrap();
        let half = 0.5 * (t as f64).powf(-0.25);
        for i in 0..n {
            let (l, u) = init.intervals.get(i);
            assert!(l <= sigmas[i] && sigmas[i] <= u, "seed {seed} box {i}: {sigmas:?} {l} {u}");
            for x in [l, u] {
                assert!(gain_estimate(&init.estimates.fhat[i], inst.costs[i], x).abs() <= half + 1e-12);
            }
        }
        assert_eq!(env.played(), init.rounds);
    }
}

#[test]
fn fixed_order_without_mass_keeps_interval() {
    let x1 = BoundedDistribution::atom(0.9).unwrap();
    let x2 = BoundedDistribution::uniform(0.0, 1.0).unwrap();
    let inst = PandoraInstance::new(vec![x1.clone(), x2.clone()], vec![0.0, 0.125]).unwrap();
    let iv = ConfidenceIntervals::new(vec![(0.4, 0.6)]).unwrap();
    let mut env = sim(&inst, 100_000, 1);
    let rep = isa_fixed_order(&mut env, &iv, &LeftLimit(&x1), &LeftLimit(&x2), 0.1, 4.0).unwrap();
    assert_eq!(rep.refined.get(0), (0.4, 0.6));
    assert_eq!(env.played(), rep.rounds_used);
}

#[test]
fn fixed_order_shrinks_around_sigma() {
    let x1 = BoundedDistribution::uniform(0.0, 1.0).unwrap();
    let x2 = BoundedDistribution::uniform(0.0, 1.0).unwrap();
    let inst = PandoraInstance::new(vec![x1.clone(), x2.clone()], vec![0.0, 0.125]).unwrap();
    let iv = ConfidenceIntervals::new(vec![(0.2, 0.8)]).unwrap();
    for seed in 0..10 {
        let mut env = sim(&inst, 1_000_000, seed).with_budget(u64::MAX);
        let rep = isa_fixed_order(&mut env, &iv, &LeftLimit(&x1), &LeftLimit(&x2), 0.01, 4.0).unwrap();
        let (l, u) = rep.refined.get(0);
        assert!(l <= 0.5 && 0.5 <= u && u - l < 0.4, "seed {seed}: {l} {u}");
    }
}

#[test]
fn pbisa_on_point_masses_contains_sigma() {
    for seed in 0..30 {
        let mut r = rng(5000 + seed);
        let n = 2 + below(&mut r, 3);
        let inst = pandora_atoms(&mut r, n, 1, 16);
        let sigmas = weitzman(&inst).unwrap().sigmas;
        let t = 100_000;
        let mut env = sim(&inst, t, seed).with_budget(u64::MAX);
        let init = init_pandora(&mut env, &inst.costs, 4.0).unwrap();
        let mut g = ConstraintGroup::new(init.intervals);
        g.add_disjoint().unwrap();
        for i in 0..n {
            let est = estimate_cdfs(&mut env, &inst.costs, 50, 1).unwrap();
            let rep = pbisa(&mut env, &g, i, 0.02, 4.0, est, SearchMode::Exact).unwrap();
            let (l, u) = rep.refined;
            assert!(l <= sigmas[i] + 1e-12 && sigmas[i] <= u + 1e-12, "seed {seed} box {i}: {sigmas:?} {l} {u}");
            assert!(g.lower(i) <= l && u <= g.upper(i));
        }
    }
}

#[test]
fn swaptest_orders_separated_boxes() {
    let inst = point_masses(&[0.4, 0.8], &[0.1, 0.1]);
    for seed in 0..5 {
        let mut g = group(&[(0.2, 0.8), (0.2, 0.8)], &[]);
        let mut env = sim(&inst, 10_000, seed).with_budget(u64::MAX);
        let out = swaptest(&mut env, &mut g, 0, 1, 0.004, 4.0).unwrap();
        assert_eq!(out.added, Some((1, 0)));
        assert!((out.r_first - 0.3).abs() < 1e-9 && (out.r_second - 0.7).abs() < 1e-9, "{out:?}");
        assert!(g.has(1, 0));
        assert_eq!(env.played(), out.rounds);
        assert!(swaptest(&mut env, &mut g, 0, 1, 0.004, 4.0).is_err());
    }
}

#[test]
fn swaptest_leaves_identical_boxes_unordered() {
    let mut r = rng(6000);
    let d = mixed(&mut r);
    let inst = PandoraInstance::new(vec![d.clone(), d], vec![0.05, 0.05]).unwrap();
    for seed in 0..10 {
        let mut g = group(&[(0.1, 0.6), (0.1, 0.6)], &[]);
        let mut env = sim(&inst, 100_000, seed).with_budget(u64::MAX);
        let out = swaptest(&mut env, &mut g, 0, 1, 0.01, 4.0).unwrap();
        assert_eq!(out.added, None);
        assert!(g.unordered(0, 1));
    }
}

#[test]
fn swap_policy_matches_oracle_difference() {
    for seed in 0..100 {
        let mut r = rng(7000 + seed);
        let n = 2 + below(&mut r, 4);
        let g = random_group(&mut r, n);
        let inst = pandora_mixed(&mut r, n);
        let (i, j) = (below(&mut r, n), below(&mut r, n));
        let Ok(pol) = swap_policy(&g, i, j) else { continue };
        assert_eq!(validate_policy(&g, &pol.first), Ok(()), "seed {seed}");
        assert_eq!(validate_policy(&g, &pol.second), Ok(()), "seed {seed}");
        let d = pandora_utility(&inst, &pol.first).unwrap() - pandora_utility(&inst, &pol.second).unwrap();
        assert!((d - swap_difference(&inst, &pol.first, i, j).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn general_learner_on_point_masses() {
    for seed in 0..8 {
        let mut r = rng(8000 + seed);
        let n = 3;
        let inst = pandora_atoms(&mut r, n, 1, 16);
        let sigmas = weitzman(&inst).unwrap().sigmas;
        let scale = 2.0 * n as f64;
        let mut learner = PandoraGeneral::new(inst.costs.clone(), Constants::DESK, SearchMode::Exact).unwrap();
        let mut env = sim(&inst, 3_000_000, seed);
        let report = run_doubling(&DoublingConfig::default(), &mut env, &mut learner).unwrap();
        assert_eq!(report.total_rounds, 3_000_000);
        assert!(!report.phases.is_empty());
        for rep in learner.history() {
            assert!(rep.swaptests <= 4 * n * n * n);
            rep.group.check().unwrap();
        }
        let g = learner.group();
        for i in 0..n {
            let s = sigmas[i] / scale;
            assert!(g.lower(i) <= s + 1e-12 && s <= g.upper(i) + 1e-12, "seed {seed} box {i}");
        }
        for (a, b) in g.constraints() {
            assert!(sigmas[a] >= sigmas[b], "seed {seed}: constraint {a}->{b} against {sigmas:?}");
        }
        assert_eq!(validate_policy(g, &g.canonical_policy()), Ok(()));
    }
}

#[test]
fn fixed_order_learner_respects_horizon() {
    let x = BoundedDistribution::uniform(0.0, 1.0).unwrap();
    let inst = PandoraInstance::new(vec![x.clone(), x], vec![0.1, 0.125]).unwrap();
    for t in [1_000, 100_000] {
        let mut learner = PandoraFixedOrder::new([0.1, 0.125], Constants::DESK);
        let mut env = sim(&inst, t, 3);
        let report = run_doubling(&DoublingConfig::default(), &mut env, &mut learner).unwrap();
        assert_eq!(env.played(), t);
        assert_eq!(report.total_rounds, t);
        if !report.truncated {
            assert!(learner.interval().contains(0, 0.5));
        }
    }
}

struct Recorder<E> {
    inner: E,
    log: Rc<RefCell<Vec<PandoraAction>>>,
}

impl<E: Environment<Action = PandoraAction>> Environment for Recorder<E> {
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
        self.log.borrow_mut().push(action.clone());
        self.inner.play(action)
    }
}

// With 2n a power of two, scaling is exact and both routes see the same bits.
#[test]
fn scaled_learner_matches_native_run() {
    for (seed, n) in [(1u64, 2usize), (2, 4), (3, 2)] {
        let mut r = rng(9000 + seed);
        let inst = pandora_mixed(&mut r, n);
        let scaled = inst.scaled().unwrap();
        let t = 400_000;

        let log_a = Rc::new(RefCell::new(Vec::new()));
        let mut env_a = Recorder { inner: sim(&inst, t, seed), log: log_a.clone() };
        let mut learner = PandoraGeneral::new(inst.costs.clone(), Constants::DESK, SearchMode::Exact).unwrap();
        run_doubling(&DoublingConfig::default(), &mut env_a, &mut learner).unwrap();

        let log_b = Rc::new(RefCell::new(Vec::new()));
        let mut env_b = Recorder { inner: sim(&scaled, t, seed), log: log_b.clone() };
        let native = (|| -> Result<()> {
            let init = init_pandora(&mut env_b, &scaled.costs, Constants::DESK.c_init)?;
            let mut g = ConstraintGroup::new(init.intervals);
            g.add_disjoint()?;
            let mut generation = 0;
            for (k, eps) in DoublingConfig::default().schedule(n, t).into_iter().enumerate() {
                let rep =
                    pan_alg(&mut env_b, &g, &scaled.costs, eps, &Constants::DESK, SearchMode::Exact, &mut generation, k as u32 + 1)?;
                g = rep.group;
            }
            Ok(())
        })();
        assert!(matches!(native, Err(ref e) if e.is_horizon()) || native.is_ok());

        let a = log_a.borrow();
        let b: Vec<PandoraAction> = log_b.borrow().iter().map(|p| p.rescaled(2.0 * n as f64)).collect();
        let common = a.len().min(b.len());
        assert!(common > 100_000);
        assert!(a[..common] == b[..common], "n={n}: routes diverge");
    }
}

#[test]
fn single_open_is_valid_but_not_in_group() {
    let a = PandoraAction::single(3, 1);
    assert_eq!(a.order[0], 1);
    assert_eq!(a.thresholds[1], ABOVE);
    a.validate(3).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conversion_roundtrip(seed in any::<u64>(), n in 1usize..7) {
        let mut r = rng(seed);
        let g = random_group(&mut r, n);
        let p = random_policy(&mut r, &g);
        let c = convert_policy(&g, &p).unwrap();
        prop_assert!(c.moves() <= n * n && c.swaps() <= n * n);
        for pol in &c.policies {
            prop_assert!(validate_policy(&g, pol).is_ok());
        }
    }

    #[test]
    fn tightening_keeps_group_valid(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let mut g = random_group(&mut r, n);
        let (a, b) = (below(&mut r, n), below(&mut r, n));
        if a != b && g.unordered(a, b) {
            if g.add_constraint(a, b).is_ok() {
                prop_assert!(g.check().is_ok());
                prop_assert!(g.has(a, b));
            }
        }
    }

    #[test]
    fn gain_interval_contains_estimate_root(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = mixed(&mut r);
        let c = 0.5 * d.mean() * uniform01(&mut r);
        let xs: Vec<f64> = (0..400).map(|_| d.sample(&mut r)).collect();
        let f = stopbandit_core::distributions::EmpiricalCdf::new(xs).unwrap();
        let half = 0.05;
        let (l, u) = gain_interval(&f, c, half).unwrap();
        prop_assert!(l <= u);
        for x in [l, u] {
            prop_assert!(gain_estimate(&f, c, x).abs() <= half + 1e-9);
        }
    }
}
