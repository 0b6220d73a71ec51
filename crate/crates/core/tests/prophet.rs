mod common;

use common::*;
use stopbandit_core::concentration::dkw_radius;
use stopbandit_core::distributions::{BoundedDistribution, LeftLimit};
use stopbandit_core::doubling::{run_doubling, Constants, DoublingConfig};
use stopbandit_core::environments::{Environment, ProphetAction, ProphetInstance, ProphetSim};
use stopbandit_core::oracle::{prophet_expected_reward, prophet_opt, prophet_reward_from};
use stopbandit_core::prophet_learner::*;
use stopbandit_core::rng_stream;

fn uniform_atom() -> ProphetInstance {
    ProphetInstance::new(vec![BoundedDistribution::uniform(0.0, 1.0).unwrap(), BoundedDistribution::atom(0.5).unwrap()])
        .unwrap()
}

#[test]
fn init2_on_point_mass_second_variable() {
    let t = 1_000_000u64;
    let mut dkw_ok = 0;
    for seed in 0..100 {
        let mut sim = ProphetSim::new(uniform_atom(), t, rng_stream(seed, 1));
        let init = init2(&mut sim, 4.0).unwrap();
        let (l, u) = init.interval.get(0);
        assert!(l <= 0.5 && 0.5 <= u, "seed {seed}");
        assert!(u - l <= (t as f64).powf(-0.25) + 1e-15);
        let n = init.fhat1.count() as u64;
        if init.fhat1.sup_distance(&sim.instance().dists[0]) <= dkw_radius(n, 0.01).unwrap() {
            dkw_ok += 1;
        }
    }
    assert!(dkw_ok >= 99, "{dkw_ok}");
}

#[test]
fn isa2_with_no_mass_keeps_interval() {
    // X1 has no mass in [0.4, 0.6], so δ̂ is flat at -D̂ = 0
    let inst = ProphetInstance::new(vec![
        BoundedDistribution::discrete(&[(0.25, 0.5), (0.75, 0.5)]).unwrap(),
        BoundedDistribution::atom(0.5).unwrap(),
    ])
    .unwrap();
    let mut sim = ProphetSim::new(inst.clone(), 1_000_000, rng_stream(0, 0));
    let iv = ConfidenceIntervals::new(vec![(0.4, 0.6)]).unwrap();
    let rep = isa2(&mut sim, &iv, &LeftLimit(&inst.dists[0]), 0.05, 4.0).unwrap();
    assert_eq!(rep.refined.get(0), (0.4, 0.6));
    assert!(rep.flags.is_empty());
}

#[test]
fn isa2_contains_optimum_and_bounds_regret() {
    let inst = uniform_atom();
    let eps = 0.05;
    let opt = prophet_opt(&inst).value();
    let mut good = 0;
    for seed in 0..20 {
        let mut sim = ProphetSim::new(inst.clone(), 1_000_000, rng_stream(seed, 2)).with_budget(u64::MAX);
        let init = init2(&mut sim, 4.0).unwrap();
        let rep = isa2(&mut sim, &init.interval, &init.fhat1, eps, 4.0).unwrap();
        assert!(rep.refined.nested_in(&init.interval));
        let (l, u) = rep.refined.get(0);
        let worst = (0..=20)
            .map(|k| l + (u - l) * k as f64 / 20.0)
            .map(|t| opt - prophet_expected_reward(&inst, &ProphetAction::new(vec![t])).unwrap())
            .fold(0.0, f64::max);
        if l <= 0.5 && 0.5 <= u && worst <= 10.0 * eps {
            good += 1;
        }
    }
    assert!(good >= 19, "{good}");
}

#[test]
fn init_general_on_point_masses() {
    let t = 10_000u64;
    let n = 4;
    let inst = ProphetInstance::new(
        [0.35, 0.6, 0.45, 0.3].iter().map(|&v| BoundedDistribution::atom(v).unwrap()).collect(),
    )
    .unwrap();
    let opt = prophet_opt(&inst);
    let mut sim = ProphetSim::new(inst.clone(), t, rng_stream(1, 0)).with_budget(u64::MAX);
    let init = init_general(&mut sim, n, 4.0).unwrap();
    let w = (t as f64).powf(-0.25) / (10.0 * n as f64);
    let lowers = init.intervals.lowers();
    for i in 0..n - 1 {
        let (l, u) = init.intervals.get(i);
        // 1-based position i + 1 has width (2n - 2(i + 1)) w
        assert!((u - l - (2 * n - 2 * i - 2) as f64 * w).abs() < 1e-12, "i = {i}");
        let mut th = lowers.clone();
        for x in th.iter_mut().take(i + 1) {
            *x = stopbandit_core::ABOVE;
        }
        let alg = prophet_reward_from(&inst, &ProphetAction::new(th), i + 1).unwrap();
        assert!(l <= alg && alg <= u, "i = {i}");
        assert!(l <= opt.opt_values[i + 1] && opt.opt_values[i + 1] <= u, "i = {i}");
    }
}

#[test]
fn isa_general_reduces_to_isa2_for_two_variables() {
    let inst = uniform_atom();
    for seed in 0..5 {
        let mut a = ProphetSim::new(inst.clone(), 1_000_000, rng_stream(seed, 3)).with_budget(u64::MAX);
        let init = init2(&mut a, 4.0).unwrap();
        let mut b = a.clone();
        let est = CdfEstimates { fhat: vec![init.fhat1.clone()], product_error_budget: 0.0, generation: 0 };
        let two = isa2(&mut a, &init.interval, &init.fhat1, 0.1, 4.0).unwrap();
        let gen = isa_general(&mut b, &init.interval, &est, 0.1, 4.0).unwrap();
        assert_eq!(two.delta_hat_trace[0].knots, gen.delta_hat_trace[0].knots);
        assert!(gen.refined.nested_in(&two.refined));
    }
}

#[test]
fn isa_general_point_masses_keep_continuation() {
    let inst = ProphetInstance::new(
        [0.7, 0.2, 0.55, 0.4].iter().map(|&v| BoundedDistribution::atom(v).unwrap()).collect(),
    )
    .unwrap();
    let n = inst.n();
    let mut sim = ProphetSim::new(inst.clone(), 10_000, rng_stream(5, 0)).with_budget(u64::MAX);
    let init = init_general(&mut sim, n, 4.0).unwrap();
    let mut iv = init.intervals.clone();
    for eps in [0.5, 0.25, 0.125] {
        let rep = isa_general(&mut sim, &iv, &init.estimates, eps, 4.0).unwrap();
        assert!(rep.refined.nested_in(&iv));
        for i in 0..n - 1 {
            let mut th = rep.refined.lowers();
            th[i] = stopbandit_core::ABOVE;
            let cont = prophet_reward_from(&inst, &ProphetAction::new(th), i + 1).unwrap();
            assert!(rep.refined.contains(i, cont), "eps {eps}, i {i}: {cont} vs {:?}", rep.refined.get(i));
        }
        iv = rep.refined;
    }
}

#[test]
fn doubling_never_exceeds_horizon() {
    for (seed, t) in [(0u64, 3_000u64), (1, 20_000), (2, 200_000)] {
        let mut r = rng(seed);
        let inst = prophet_mixed(&mut r, 2);
        let mut sim = ProphetSim::new(inst, t, rng_stream(seed, 9));
        let mut learner = ProphetTwo::new(Constants::DESK);
        let rep = run_doubling(&DoublingConfig::default(), &mut sim, &mut learner).unwrap();
        assert_eq!(rep.total_rounds, t);
        assert_eq!(sim.played(), t);
    }
    let mut r = rng(7);
    let inst = prophet_mixed(&mut r, 3);
    let mut sim = ProphetSim::new(inst, 50_000, rng_stream(7, 9));
    let mut learner = ProphetGeneral::new(3, Constants::DESK).unwrap();
    let rep = run_doubling(&DoublingConfig::default(), &mut sim, &mut learner).unwrap();
    assert!(rep.truncated);
    assert_eq!(rep.total_rounds, 50_000);
}

#[test]
fn learner_converges_on_uniform_atom() {
    let inst = uniform_atom();
    let mut sim = ProphetSim::new(inst, 1_000_000, rng_stream(3, 3));
    let mut learner = ProphetTwo::new(Constants::DESK);
    let rep = run_doubling(&DoublingConfig::default(), &mut sim, &mut learner).unwrap();
    assert!(!rep.truncated);
    assert_eq!(rep.phases.len(), 7);
    let (l, u) = learner.interval().get(0);
    assert!(l <= 0.5 && 0.5 <= u && u - l < 0.05, "{l} {u}");
    for w in learner.history().windows(2) {
        assert!(w[1].refined.nested_in(&w[0].refined));
    }
}
