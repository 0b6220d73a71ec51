use alloc::vec::Vec;

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// `ceil(x)` as a round count, at least 1.
pub(crate) fn rounds(x: f64) -> u64 {
    let c = ceil(x);
    if c < 1.0 {
        1
    } else if c >= u64::MAX as f64 {
        u64::MAX
    } else {
        c as u64
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(points: usize) -> (Vec<f64>, Vec<f64>) {
    let m = points.max(1);
    let mut nodes = alloc::vec![0.0; m];
    let mut weights = alloc::vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..m {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = m as f64 * (z * p0 - p1) / (z * z - 1.0);
            let step = p0 / dp;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[m - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// Continuous piecewise-linear function on `[knots[0].0, knots[last].0]`,
/// assumed nondecreasing. Used to solve the level-set problems
/// `{ x : lo <= f(x) <= hi }` in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
}

/// Result of a level-set solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSet {
    pub lo: f64,
    pub hi: f64,
    /// The level set was empty and the interval collapsed onto the zero
    /// crossing.
    pub degenerate: bool,
}

impl PiecewiseLinear {
    /// Builds from knots sorted by `x`. Values are replaced by their running
    /// maximum so tiny floating-point dips cannot break monotonicity; the
    /// largest dip is returned alongside.
    pub fn monotone(mut knots: Vec<(f64, f64)>) -> (Self, f64) {
        let mut dip: f64 = 0.0;
        for k in 1..knots.len() {
            if knots[k].1 < knots[k - 1].1 {
                dip = dip.max(knots[k - 1].1 - knots[k].1);
                knots[k].1 = knots[k - 1].1;
            }
        }
        (PiecewiseLinear { knots }, dip)
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        if x <= k[0].0 {
            return k[0].1;
        }
        for w in k.windows(2) {
            if x <= w[1].0 {
                return interp(w[0], w[1], x);
            }
        }
        k[k.len() - 1].1
    }

    /// Smallest `x` with `f(x) >= level`.
    pub fn first_at_least(&self, level: f64) -> Option<f64> {
        let k = &self.knots;
        if k[0].1 >= level {
            return Some(k[0].0);
        }
        for w in k.windows(2) {
            if w[1].1 >= level {
                return Some(solve(w[0], w[1], level));
            }
        }
        None
    }

    /// Largest `x` with `f(x) <= level`.
    pub fn last_at_most(&self, level: f64) -> Option<f64> {
        let k = &self.knots;
        if k[k.len() - 1].1 <= level {
            return Some(k[k.len() - 1].0);
        }
        for w in k.windows(2).rev() {
            if w[0].1 <= level {
                return Some(solve(w[0], w[1], level));
            }
        }
        None
    }

    /// `{ x : lo <= f(x) <= hi }`, or the clamped zero crossing when empty.
    pub fn level_set(&self, lo: f64, hi: f64) -> LevelSet {
        match (self.first_at_least(lo), self.last_at_most(hi)) {
            (Some(a), Some(b)) if a <= b => LevelSet { lo: a, hi: b, degenerate: false },
            _ => {
                let k = &self.knots;
                let z = if k[0].1 >= 0.0 {
                    k[0].0
                } else {
                    self.first_at_least(0.0).unwrap_or(k[k.len() - 1].0)
                };
                LevelSet { lo: z, hi: z, degenerate: true }
            }
        }
    }
}

fn interp(a: (f64, f64), b: (f64, f64), x: f64) -> f64 {
    if b.0 == a.0 {
        return b.1;
    }
    a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
}

// Crossing of `level` on the segment a-b, where a.1 < level <= b.1 or
// a.1 <= level < b.1.
fn solve(a: (f64, f64), b: (f64, f64), level: f64) -> f64 {
    let dy = b.1 - a.1;
    if dy <= 0.0 {
        return if level <= a.1 { a.0 } else { b.0 };
    }
    let x = a.0 + (level - a.1) * (b.0 - a.0) / dy;
    x.clamp(a.0, b.0)
}

/// Sorts box indices by decreasing threshold; equal thresholds are ordered
/// topologically by `before(a, b)` (a must precede b) and then by index.
pub(crate) fn order_by_threshold(
    boxes: &[usize],
    threshold: impl Fn(usize) -> f64,
    before: impl Fn(usize, usize) -> bool,
) -> Vec<usize> {
    let mut sorted: Vec<usize> = boxes.to_vec();
    sorted.sort_by(|&a, &b| threshold(b).total_cmp(&threshold(a)).then(a.cmp(&b)));
    let mut out = Vec::with_capacity(sorted.len());
    let mut start = 0;
    while start < sorted.len() {
        let t = threshold(sorted[start]);
        let mut end = start;
        while end < sorted.len() && threshold(sorted[end]) == t {
            end += 1;
        }
        let mut group: Vec<usize> = sorted[start..end].to_vec();
        while !group.is_empty() {
            let pick = (0..group.len())
                .find(|&p| !group.iter().any(|&q| q != group[p] && before(q, group[p])))
                .unwrap_or(0);
            out.push(group.remove(pick));
        }
        start = end;
    }
    out
}
