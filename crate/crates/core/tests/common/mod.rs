#![allow(dead_code)]

use stopbandit_core::distributions::{BoundedDistribution, Segment};
use stopbandit_core::environments::{PandoraInstance, ProphetInstance};
use stopbandit_core::{rng_stream, uniform01, SimRng};

pub fn rng(seed: u64) -> SimRng {
    rng_stream(seed, 0xC0DE)
}

pub fn below(rng: &mut SimRng, k: usize) -> usize {
    ((uniform01(rng) * k as f64) as usize).min(k - 1)
}

// Masses summing to exactly `total` up to rounding in the last entry.
fn masses(rng: &mut SimRng, k: usize, total: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| 0.05 + uniform01(rng)).collect();
    let s: f64 = w.iter().sum();
    let mut m: Vec<f64> = w.iter().map(|x| total * x / s).collect();
    let head: f64 = m[..k - 1].iter().sum();
    m[k - 1] = total - head;
    m
}

/// Up to `max` atoms on a `1/grid` lattice (grid 0 means anywhere).
pub fn atoms(rng: &mut SimRng, max: usize, grid: u32) -> BoundedDistribution {
    let k = 1 + below(rng, max);
    let mut locs: Vec<f64> = Vec::new();
    while locs.len() < k {
        let x = if grid == 0 {
            uniform01(rng)
        } else {
            below(rng, grid as usize + 1) as f64 / grid as f64
        };
        if !locs.contains(&x) {
            locs.push(x);
        }
    }
    locs.sort_by(f64::total_cmp);
    let m = masses(rng, k, 1.0);
    BoundedDistribution::new(locs.into_iter().zip(m).collect(), Vec::new()).unwrap()
}

/// Atoms on a 1/16 lattice plus piecewise-constant density.
pub fn mixed(rng: &mut SimRng) -> BoundedDistribution {
    let n_atoms = below(rng, 3);
    let n_segs = 1 + below(rng, 3);
    let atom_mass = if n_atoms == 0 { 0.0 } else { 0.2 + 0.5 * uniform01(rng) };
    let mut locs: Vec<f64> = Vec::new();
    while locs.len() < n_atoms {
        let x = below(rng, 17) as f64 / 16.0;
        if !locs.contains(&x) {
            locs.push(x);
        }
    }
    locs.sort_by(f64::total_cmp);
    let atoms: Vec<(f64, f64)> = if n_atoms == 0 {
        Vec::new()
    } else {
        locs.into_iter().zip(masses(rng, n_atoms, atom_mass)).collect()
    };
    let mut cuts: Vec<f64> = (0..n_segs - 1).map(|_| uniform01(rng)).collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let k = cuts.len() - 1;
    let seg_mass = masses(rng, k, 1.0 - atom_mass);
    let segments = (0..k)
        .filter(|&j| cuts[j + 1] > cuts[j])
        .map(|j| Segment::new(cuts[j], cuts[j + 1], seg_mass[j] / (cuts[j + 1] - cuts[j])))
        .collect();
    BoundedDistribution::new(atoms, segments).unwrap()
}

pub fn prophet_atoms(rng: &mut SimRng, n: usize, max: usize) -> ProphetInstance {
    ProphetInstance::new((0..n).map(|_| atoms(rng, max, 16)).collect()).unwrap()
}

pub fn prophet_mixed(rng: &mut SimRng, n: usize) -> ProphetInstance {
    ProphetInstance::new((0..n).map(|_| mixed(rng)).collect()).unwrap()
}

/// Costs drawn below each mean so every reservation value is nonnegative.
pub fn costs_for(rng: &mut SimRng, dists: &[BoundedDistribution]) -> Vec<f64> {
    dists.iter().map(|d| 0.9 * d.mean() * uniform01(rng)).collect()
}

pub fn pandora_atoms(rng: &mut SimRng, n: usize, max: usize, grid: u32) -> PandoraInstance {
    let dists: Vec<_> = (0..n).map(|_| atoms(rng, max, grid)).collect();
    let costs = costs_for(rng, &dists);
    PandoraInstance::new(dists, costs).unwrap()
}

pub fn pandora_mixed(rng: &mut SimRng, n: usize) -> PandoraInstance {
    let dists: Vec<_> = (0..n).map(|_| mixed(rng)).collect();
    let costs = costs_for(rng, &dists);
    PandoraInstance::new(dists, costs).unwrap()
}

/// A random permutation of `0..n`.
pub fn permutation(rng: &mut SimRng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for k in (1..n).rev() {
        p.swap(k, below(rng, k + 1));
    }
    p
}

pub fn footnote() -> ProphetInstance {
    ProphetInstance::new(vec![
        BoundedDistribution::discrete(&[(0.25, 0.5), (0.75, 0.5)]).unwrap(),
        BoundedDistribution::atom(0.5).unwrap(),
    ])
    .unwrap()
}
