mod common;

use common::*;
use stopbandit_core::distributions::{CdfView, LeftLimit};
use stopbandit_core::environments::{PandoraAction, ProphetAction};
use stopbandit_core::oracle::{pandora_utility, prophet_expected_reward, prophet_reward_from};
use stopbandit_core::pandora_learner::{
    delta_fixed_order, delta_move, find_movebound, ConstraintGroup, SearchMode,
};
use stopbandit_core::prophet_learner::{delta_general, delta_two, ConfidenceIntervals};
use stopbandit_core::{uniform01, SimRng, ABOVE};

fn three_points(r: &mut SimRng) -> (f64, f64, f64) {
    let mut v = [uniform01(r), uniform01(r), uniform01(r)];
    // sometimes land exactly on lattice points, where atoms sit
    for x in v.iter_mut() {
        if uniform01(r) < 0.3 {
            *x = below(r, 17) as f64 / 16.0;
        }
    }
    v.sort_by(f64::total_cmp);
    let tau = v[1];
    if uniform01(r) < 0.5 {
        (v[0], v[2], tau)
    } else {
        // τ outside [ℓ, u] is fine for the identity
        (v[0], v[1], v[2])
    }
}

#[test]
fn two_variable_identity_and_loss_bound() {
    for seed in 0..1000 {
        let mut r = rng(seed);
        let inst = prophet_mixed(&mut r, 2);
        let (l, u, tau) = three_points(&mut r);
        let f1 = LeftLimit(&inst.dists[0]);
        let rw = |t: f64| prophet_expected_reward(&inst, &ProphetAction::new(vec![t])).unwrap();
        let delta = delta_two(&f1, l, u, tau) - (rw(u) - rw(l));
        let want = (f1.at(u) - f1.at(l)) * (tau - inst.dists[1].mean());
        assert!((delta - want).abs() < 1e-10, "seed {seed}: {delta} vs {want}");

        let star = inst.dists[1].mean();
        if l <= star && star <= u && l <= tau && tau <= u {
            assert!(rw(star) - rw(tau) <= delta.abs() + 1e-12, "seed {seed}");
        }
    }
}

#[test]
fn general_identity_and_loss_bound() {
    for seed in 0..1000 {
        let mut r = rng(10_000 + seed);
        let n = 3 + below(&mut r, 2);
        let inst = prophet_mixed(&mut r, n);
        let i = below(&mut r, n - 1);
        let (l, u, tau) = three_points(&mut r);
        let th: Vec<f64> = (0..n - 1)
            .map(|_| if uniform01(&mut r) < 0.1 { ABOVE } else { uniform01(&mut r) })
            .collect();
        let at = |t: f64| {
            let mut x = th.clone();
            x[i] = t;
            prophet_expected_reward(&inst, &ProphetAction::new(x)).unwrap()
        };
        let reach: f64 = (0..i).map(|j| LeftLimit(&inst.dists[j]).at(th[j])).product();
        let fi = LeftLimit(&inst.dists[i]);
        let delta = delta_general(&fi, reach, l, u, tau) - (at(u) - at(l));
        let cont = prophet_reward_from(&inst, &ProphetAction::new(th.clone()), i + 1).unwrap();
        let want = reach * (fi.at(u) - fi.at(l)) * (tau - cont);
        assert!((delta - want).abs() < 1e-10, "seed {seed}: {delta} vs {want}");

        if l <= cont && cont <= u && l <= tau && tau <= u {
            let from = |t: f64| {
                let mut x = th.clone();
                x[i] = t;
                prophet_reward_from(&inst, &ProphetAction::new(x), i).unwrap()
            };
            assert!(reach * (from(cont) - from(tau)) <= delta.abs() + 1e-12, "seed {seed}");
        }
    }
}

#[test]
fn fixed_order_identity_and_loss_bound() {
    for seed in 0..1000 {
        let mut r = rng(20_000 + seed);
        let inst = pandora_mixed(&mut r, 2);
        let (l, u, tau) = three_points(&mut r);
        let (f1, f2) = (LeftLimit(&inst.dists[0]), LeftLimit(&inst.dists[1]));
        let ut = |t: f64| pandora_utility(&inst, &PandoraAction::new(vec![0, 1], vec![ABOVE, t])).unwrap();
        let delta = delta_fixed_order(&f1, &f2, l, u, tau) - (ut(u) - ut(l));
        let want = -(f1.at(u) - f1.at(l)) * inst.gain(1, tau);
        assert!((delta - want).abs() < 1e-10, "seed {seed}: {delta} vs {want}");

        let sigma = inst.dists[1].reservation_value(inst.costs[1]).unwrap();
        if l <= sigma && sigma <= u && l <= tau && tau <= u {
            assert!(ut(sigma) - ut(tau) <= delta.abs() + 1e-12, "seed {seed}");
        }
    }
}

#[test]
fn moving_difference_identity() {
    for seed in 0..1000 {
        let mut r = rng(30_000 + seed);
        let n = 2 + below(&mut r, 3);
        let inst = pandora_mixed(&mut r, n);
        let bounds: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let (a, b) = (uniform01(&mut r), uniform01(&mut r));
                (a.min(b), a.max(b))
            })
            .collect();
        let group = ConstraintGroup::new(ConfidenceIntervals::new(bounds).unwrap());
        let i = below(&mut r, n);
        let views: Vec<LeftLimit> = inst.dists.iter().map(LeftLimit).collect();
        let dyns: Vec<&dyn CdfView> = views.iter().map(|v| v as &dyn CdfView).collect();
        let mb = find_movebound(&group, i, &dyns, SearchMode::Exact).unwrap();
        let (l, u) = (mb.lower, mb.upper);
        let tau = l + (u - l) * uniform01(&mut r);
        let front: Vec<&dyn CdfView> = mb.front.iter().map(|&k| dyns[k]).collect();
        let ut = |t: f64| pandora_utility(&inst, &mb.policy_at(t)).unwrap();
        let delta = delta_move(&front, dyns[i], l, u, tau) - (ut(u) - ut(l));
        let h = |x: f64| front.iter().map(|f| f.at(x)).product::<f64>();
        let want = -(h(u) - h(l)) * inst.gain(i, tau);
        assert!((delta - want).abs() < 1e-10, "seed {seed}: {delta} vs {want}");
        assert!((mb.reach_gap - (h(u) - h(l))).abs() < 1e-15);
    }
}
