//! Exact laws on `[0, 1]` (atoms plus piecewise-constant densities) and
//! empirical CDFs.

use alloc::format;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::{uniform01, Error, Result};

const MASS_TOLERANCE: f64 = 1e-12;

/// Piece of constant density `density` on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub density: f64,
}

impl Segment {
    pub fn new(lo: f64, hi: f64, density: f64) -> Self {
        Segment { lo, hi, density }
    }

    fn mass(&self) -> f64 {
        self.density * (self.hi - self.lo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Piece {
    Atom { at: f64 },
    Span { lo: f64, hi: f64, density: f64 },
}

/// A probability law on `[0, 1]` described by finitely many atoms and
/// constant-density segments.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawDistribution", into = "RawDistribution"))]
pub struct BoundedDistribution {
    atoms: Vec<(f64, f64)>,
    segments: Vec<Segment>,
    // sampling table: pieces in increasing position with cumulative mass
    pieces: Vec<(Piece, f64)>,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct RawDistribution {
    atoms: Vec<(f64, f64)>,
    segments: Vec<Segment>,
}

#[cfg(feature = "serde")]
impl TryFrom<RawDistribution> for BoundedDistribution {
    type Error = Error;
    fn try_from(raw: RawDistribution) -> Result<Self> {
        BoundedDistribution::new(raw.atoms, raw.segments)
    }
}

#[cfg(feature = "serde")]
impl From<BoundedDistribution> for RawDistribution {
    fn from(d: BoundedDistribution) -> Self {
        RawDistribution { atoms: d.atoms, segments: d.segments }
    }
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain { value: x, domain: "[0, 1]" })
    }
}

impl BoundedDistribution {
    /// Validates and builds a distribution. Atoms must have strictly
    /// increasing locations; segments must be sorted and disjoint.
    pub fn new(atoms: Vec<(f64, f64)>, segments: Vec<Segment>) -> Result<Self> {
        let bad = |msg: alloc::string::String| Err(Error::Distribution(msg));
        for (k, &(at, mass)) in atoms.iter().enumerate() {
            if !(0.0..=1.0).contains(&at) {
                return bad(format!("atom location {at} outside [0, 1]"));
            }
            if !(mass > 0.0 && mass <= 1.0) {
                return bad(format!("atom mass {mass} outside (0, 1]"));
            }
            if k > 0 && atoms[k - 1].0 >= at {
                return bad(format!("atom locations not strictly increasing at {at}"));
            }
        }
        for (k, s) in segments.iter().enumerate() {
            if !(0.0 <= s.lo && s.lo < s.hi && s.hi <= 1.0) {
                return bad(format!("segment [{}, {}] invalid", s.lo, s.hi));
            }
            if !(s.density >= 0.0 && s.density.is_finite()) {
                return bad(format!("segment density {} negative", s.density));
            }
            if k > 0 && segments[k - 1].hi > s.lo {
                return bad(format!("segments overlap at {}", s.lo));
            }
        }
        let total: f64 =
            atoms.iter().map(|a| a.1).sum::<f64>() + segments.iter().map(Segment::mass).sum::<f64>();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return bad(format!("total mass {total} differs from 1"));
        }
        let pieces = sampling_table(&atoms, &segments);
        Ok(BoundedDistribution { atoms, segments, pieces })
    }

    /// Point mass at `at`.
    pub fn atom(at: f64) -> Result<Self> {
        Self::new(alloc::vec![(at, 1.0)], Vec::new())
    }

    /// Finite law from `(location, mass)` pairs in any order; repeated
    /// locations are merged.
    pub fn discrete(points: &[(f64, f64)]) -> Result<Self> {
        let mut pts: Vec<(f64, f64)> = points.to_vec();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
        for (at, mass) in pts {
            match atoms.last_mut() {
                Some(last) if last.0 == at => last.1 += mass,
                _ => atoms.push((at, mass)),
            }
        }
        Self::new(atoms, Vec::new())
    }

    /// Uniform law on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::Distribution(format!("empty uniform support [{lo}, {hi}]")));
        }
        Self::new(Vec::new(), alloc::vec![Segment::new(lo, hi, 1.0 / (hi - lo))])
    }

    /// Law of a `{0, 1}` variable with `P(1) = p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Distribution(format!("bernoulli parameter {p}")));
        }
        let pts: Vec<(f64, f64)> =
            [(0.0, 1.0 - p), (1.0, p)].into_iter().filter(|a| a.1 > 0.0).collect();
        Self::new(pts, Vec::new())
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_discrete(&self) -> bool {
        self.segments.iter().all(|s| s.density == 0.0)
    }

    /// Law of `factor * X`, `factor` in `(0, 1]`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor <= 1.0) {
            return Err(Error::arg(format!("scale factor {factor} outside (0, 1]")));
        }
        let atoms = self.atoms.iter().map(|&(a, m)| (a * factor, m)).collect();
        let segments = self
            .segments
            .iter()
            .map(|s| Segment::new(s.lo * factor, s.hi * factor, s.density / factor))
            .collect();
        Self::new(atoms, segments)
    }

    /// Every location where the CDF changes slope or jumps, plus 0 and 1.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = alloc::vec![0.0, 1.0];
        b.extend(self.atoms.iter().map(|a| a.0));
        for s in &self.segments {
            b.push(s.lo);
            b.push(s.hi);
        }
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Largest point of the support.
    pub fn support_max(&self) -> f64 {
        let a = self.atoms.last().map_or(0.0, |a| a.0);
        let s = self.segments.iter().rev().find(|s| s.density > 0.0).map_or(0.0, |s| s.hi);
        a.max(s)
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        Ok(self.cdf_ext(x))
    }

    /// `P(X < x)`.
    pub fn cdf_left(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        Ok(self.cdf_left_ext(x))
    }

    /// `P(X <= x)` for any real `x`, including infinities.
    pub fn cdf_ext(&self, x: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().take_while(|a| a.0 <= x).map(|a| a.1).sum();
        (atoms + self.continuous_mass_below(x)).min(1.0)
    }

    /// `P(X < x)` for any real `x`, including infinities.
    pub fn cdf_left_ext(&self, x: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().take_while(|a| a.0 < x).map(|a| a.1).sum();
        (atoms + self.continuous_mass_below(x)).min(1.0)
    }

    /// Density at `x` (right-continuous within segments; atoms ignored).
    pub fn density_at(&self, x: f64) -> f64 {
        self.segments.iter().find(|s| s.lo <= x && x < s.hi).map_or(0.0, |s| s.density)
    }

    fn continuous_mass_below(&self, x: f64) -> f64 {
        self.segments
            .iter()
            .take_while(|s| s.lo < x)
            .map(|s| s.density * (x.min(s.hi) - s.lo))
            .sum()
    }

    /// `E[X]`.
    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|&(a, m)| a * m).sum::<f64>()
            + self
                .segments
                .iter()
                .map(|s| s.density * (s.hi * s.hi - s.lo * s.lo) / 2.0)
                .sum::<f64>()
    }

    /// `E[X 1{X >= tau}]`, atoms at `tau` included.
    pub fn partial_mean_above(&self, tau: f64) -> Result<f64> {
        check_unit(tau)?;
        Ok(self.partial_mean_above_ext(tau, true))
    }

    /// `E[X 1{X >= tau}]` (`inclusive`) or `E[X 1{X > tau}]` for any real
    /// `tau`.
    pub fn partial_mean_above_ext(&self, tau: f64, inclusive: bool) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| if inclusive { a.0 >= tau } else { a.0 > tau })
            .map(|&(a, m)| a * m)
            .sum();
        let cont: f64 = self
            .segments
            .iter()
            .filter(|s| s.hi > tau)
            .map(|s| {
                let lo = s.lo.max(tau);
                s.density * (s.hi * s.hi - lo * lo) / 2.0
            })
            .sum();
        atoms + cont
    }

    /// `∫_a^b F(x) dx`, exact.
    pub fn integral_cdf(&self, a: f64, b: f64) -> Result<f64> {
        check_unit(a)?;
        check_unit(b)?;
        if a > b {
            return Err(Error::arg(format!("integral bounds reversed: {a} > {b}")));
        }
        Ok(self.integral_cdf_ext(a, b))
    }

    // ∫_a^b P(X <= x) dx = E[(b - max(X, a))^+], valid for a <= b.
    pub(crate) fn integral_cdf_ext(&self, a: f64, b: f64) -> f64 {
        if a >= b {
            return 0.0;
        }
        let atoms: f64 =
            self.atoms.iter().take_while(|p| p.0 <= b).map(|&(x, m)| m * (b - x.max(a))).sum();
        let mut cont = 0.0;
        for s in self.segments.iter().take_while(|s| s.lo < b) {
            let hi = s.hi.min(b);
            // part of the segment below a contributes (b - a) per unit mass
            let below = (a.min(hi) - s.lo).max(0.0);
            cont += s.density * below * (b - a);
            let lo = s.lo.max(a);
            if hi > lo {
                cont += s.density * ((b - lo) * (b - lo) - (b - hi) * (b - hi)) / 2.0;
            }
        }
        atoms + cont
    }

    /// `E[(X - v)^+]` for any real `v`, by direct summation over pieces.
    pub fn expected_excess(&self, v: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().filter(|a| a.0 > v).map(|&(x, m)| m * (x - v)).sum();
        let cont: f64 = self
            .segments
            .iter()
            .filter(|s| s.hi > v)
            .map(|s| {
                let lo = s.lo.max(v);
                s.density * ((s.hi - v) * (s.hi - v) - (lo - v) * (lo - v)) / 2.0
            })
            .sum();
        atoms + cont
    }

    /// Gain of opening this box holding value `v` at cost `c`:
    /// `g(v) = -c + (1 - v) - ∫_v^1 F`. Outside `[0, 1]` the equivalent
    /// `E[(X - v)^+] - c` is used.
    pub fn gain(&self, v: f64, c: f64) -> f64 {
        if (0.0..=1.0).contains(&v) {
            -c + (1.0 - v) - self.integral_cdf_ext(v, 1.0)
        } else {
            self.expected_excess(v) - c
        }
    }

    /// Reservation value: the `σ` solving `E[(X - σ)^+] = c`.
    pub fn reservation_value(&self, c: f64) -> Result<f64> {
        if !(c > 0.0) {
            return Err(Error::arg(format!("cost {c} must be positive")));
        }
        let top = self.expected_excess(0.0);
        if c > top {
            return Err(Error::NoRoot(format!("cost {c} exceeds E[X] = {top}")));
        }
        let b = self.breakpoints();
        let h: Vec<f64> = b.iter().map(|&v| self.expected_excess(v)).collect();
        for k in 0..b.len() - 1 {
            if h[k] >= c && c >= h[k + 1] {
                if h[k] == c {
                    return Ok(b[k]);
                }
                let root = self.root_on_piece(b[k], b[k + 1], c);
                return Ok(root);
            }
        }
        // h(1) = 0 < c, so some piece brackets the root
        Err(Error::NoRoot(format!("cost {c} not bracketed")))
    }

    // On (lo, hi) with no breakpoints inside, E[(X - v)^+] = A + B v + C v^2.
    fn root_on_piece(&self, lo: f64, hi: f64, c: f64) -> f64 {
        let mid = 0.5 * (lo + hi);
        let (mut a0, mut a1, mut a2) = (0.0, 0.0, 0.0);
        for &(x, m) in &self.atoms {
            if x > mid {
                a0 += m * x;
                a1 -= m;
            }
        }
        for s in &self.segments {
            if s.lo >= hi {
                a0 += s.density * (s.hi * s.hi - s.lo * s.lo) / 2.0;
                a1 -= s.density * (s.hi - s.lo);
            } else if s.lo <= lo && s.hi >= hi {
                // d (hi_s - v)^2 / 2
                a0 += s.density * s.hi * s.hi / 2.0;
                a1 -= s.density * s.hi;
                a2 += s.density / 2.0;
            }
        }
        let (qa, qb, qc) = (a2, a1, a0 - c);
        let x = if qa == 0.0 {
            -qc / qb
        } else {
            let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
            let sq = crate::sqrt(disc);
            // numerically stable pair of roots; keep the one inside the piece
            let q = -0.5 * (qb + if qb >= 0.0 { sq } else { -sq });
            let r1 = q / qa;
            let r2 = if q != 0.0 { qc / q } else { r1 };
            let inside = |r: f64| r >= lo - 1e-12 && r <= hi + 1e-12;
            if inside(r1) && (!inside(r2) || (r1 - mid).abs() <= (r2 - mid).abs()) {
                r1
            } else {
                r2
            }
        };
        let mut x = x.clamp(lo, hi);
        // one Newton step on the exact function removes cancellation error
        let slope = -(1.0 - self.cdf_ext(x));
        if slope < 0.0 {
            let step = (self.expected_excess(x) - c) / slope;
            if step.is_finite() {
                x = (x - step).clamp(lo, hi);
            }
        }
        x
    }

    /// Inverse-CDF draw.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = uniform01(rng);
        let idx = self.pieces.partition_point(|p| p.1 <= u).min(self.pieces.len() - 1);
        let (piece, cum) = self.pieces[idx];
        match piece {
            Piece::Atom { at } => at,
            Piece::Span { lo, hi, density } => {
                let start = cum - density * (hi - lo);
                (lo + (u - start) / density).clamp(lo, hi)
            }
        }
    }
}

fn sampling_table(atoms: &[(f64, f64)], segments: &[Segment]) -> Vec<(Piece, f64)> {
    // (position, order, piece, mass); atoms at a segment's lower end sort first
    let mut items: Vec<(f64, u8, Piece, f64)> = Vec::new();
    for &(at, m) in atoms {
        items.push((at, 0, Piece::Atom { at }, m));
    }
    for s in segments.iter().filter(|s| s.density > 0.0) {
        let mut cuts: Vec<f64> = alloc::vec![s.lo];
        cuts.extend(atoms.iter().map(|a| a.0).filter(|&a| a > s.lo && a < s.hi));
        cuts.push(s.hi);
        for w in cuts.windows(2) {
            let p = Piece::Span { lo: w[0], hi: w[1], density: s.density };
            items.push((w[0], 1, p, s.density * (w[1] - w[0])));
        }
    }
    items.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut cum = 0.0;
    items
        .into_iter()
        .map(|(_, _, p, m)| {
            cum += m;
            (p, cum)
        })
        .collect()
}

/// Right-continuous step CDF of a sample.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EmpiricalCdf {
    samples: Vec<f64>,
    // prefix[k] = sum of the k smallest samples
    #[cfg_attr(feature = "serde", serde(skip))]
    prefix: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::arg("empirical CDF needs at least one sample"));
        }
        if let Some(&x) = samples.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain { value: x, domain: "finite samples" });
        }
        samples.sort_by(f64::total_cmp);
        let mut prefix = Vec::with_capacity(samples.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for &x in &samples {
            acc += x;
            prefix.push(acc);
        }
        Ok(EmpiricalCdf { samples, prefix })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    fn n(&self) -> f64 {
        self.samples.len() as f64
    }

    fn count_le(&self, x: f64) -> usize {
        self.samples.partition_point(|&s| s <= x)
    }

    /// Fraction of samples `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.count_le(x) as f64 / self.n()
    }

    /// Fraction of samples `< x`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s < x) as f64 / self.n()
    }

    pub fn mean(&self) -> f64 {
        self.prefix[self.samples.len()] / self.n()
    }

    /// Signed `∫_a^b F̂(x) dx`, exact.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if a > b {
            return -self.integral(b, a);
        }
        let ka = self.count_le(a);
        let kb = self.count_le(b);
        let inner = (kb - ka) as f64 * b - (self.prefix[kb] - self.prefix[ka]);
        (ka as f64 * (b - a) + inner) / self.n()
    }

    /// Sample points strictly inside `(a, b)`.
    pub fn jumps_between(&self, a: f64, b: f64) -> &[f64] {
        let lo = self.count_le(a);
        let hi = self.samples.partition_point(|&s| s < b).max(lo);
        &self.samples[lo..hi]
    }

    /// Sup-norm distance to a reference law, evaluated at every jump from
    /// both sides and at the reference's breakpoints.
    pub fn sup_distance(&self, d: &BoundedDistribution) -> f64 {
        let mut worst: f64 = 0.0;
        for &x in self.samples.iter().chain(d.breakpoints().iter()) {
            worst = worst.max((self.cdf(x) - d.cdf_ext(x)).abs());
            worst = worst.max((self.cdf_left(x) - d.cdf_left_ext(x)).abs());
        }
        worst
    }
}

#[cfg(feature = "serde")]
impl EmpiricalCdf {
    /// Rebuilds derived fields after deserialization.
    pub fn rebuilt(self) -> Result<Self> {
        Self::new(self.samples)
    }
}

/// Read-only view of a CDF used by the bounding-function formulas, so the
/// same code runs on empirical estimates and on exact laws.
pub trait CdfView {
    /// Probability of passing a threshold at `x` without stopping, `P(X < x)`.
    fn at(&self, x: f64) -> f64;
    /// Signed `∫_a^b F(x) dx`.
    fn integral(&self, a: f64, b: f64) -> f64;
    /// Points in `(a, b)` where the CDF may jump or change slope.
    fn cuts(&self, a: f64, b: f64, out: &mut Vec<f64>);
}

impl CdfView for EmpiricalCdf {
    fn at(&self, x: f64) -> f64 {
        self.cdf_left(x)
    }
    fn integral(&self, a: f64, b: f64) -> f64 {
        EmpiricalCdf::integral(self, a, b)
    }
    fn cuts(&self, a: f64, b: f64, out: &mut Vec<f64>) {
        out.extend_from_slice(self.jumps_between(a, b));
    }
}

/// Exact law seen through its left limits `P(X < x)`, the form that makes
/// the bounding-function identities exact under `>=` acceptance.
#[derive(Debug, Clone, Copy)]
pub struct LeftLimit<'a>(pub &'a BoundedDistribution);

impl CdfView for LeftLimit<'_> {
    fn at(&self, x: f64) -> f64 {
        self.0.cdf_left_ext(x)
    }
    fn integral(&self, a: f64, b: f64) -> f64 {
        if a > b {
            -self.0.integral_cdf_ext(b, a)
        } else {
            self.0.integral_cdf_ext(a, b)
        }
    }
    fn cuts(&self, a: f64, b: f64, out: &mut Vec<f64>) {
        out.extend(self.0.breakpoints().into_iter().filter(|&x| x > a && x < b));
    }
}

/// `∫_a^b h(F_1(x), …, F_k(x)) dx` where `h` is a polynomial of degree at
/// most `k + 1` in its arguments. Exact: each `F` is affine between cuts.
pub fn integrate_product(a: f64, b: f64, cdfs: &[&dyn CdfView], h: impl Fn(&[f64]) -> f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let mut cuts: Vec<f64> = alloc::vec![a, b];
    for f in cdfs {
        f.cuts(a, b, &mut cuts);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let (nodes, weights) = crate::numeric::gauss_legendre(cdfs.len() / 2 + 2);
    let mut vals = alloc::vec![0.0; cdfs.len()];
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        for (z, wt) in nodes.iter().zip(&weights) {
            let x = mid + half * z;
            for (v, f) in vals.iter_mut().zip(cdfs) {
                *v = f.at(x);
            }
            total += wt * half * h(&vals);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn uniform_integral_pieces() {
        let u = BoundedDistribution::uniform(0.0, 1.0).unwrap();
        assert!((u.integral_cdf(0.2, 0.7).unwrap() - (0.49 - 0.04) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn atom_inside_segment_sampling_table() {
        let d = BoundedDistribution::new(vec![(0.5, 0.5)], vec![Segment::new(0.0, 1.0, 0.5)]).unwrap();
        let kinds: Vec<_> = d.pieces.iter().map(|p| p.0).collect();
        assert_eq!(kinds.len(), 3);
        assert_eq!(kinds[1], Piece::Atom { at: 0.5 });
        assert!((d.pieces[2].1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empirical_signed_integral() {
        let e = EmpiricalCdf::new(vec![0.2, 0.4]).unwrap();
        assert!((e.integral(0.0, 1.0) - (0.5 * 0.2 + 0.6)).abs() < 1e-15);
        assert!((e.integral(1.0, 0.0) + e.integral(0.0, 1.0)).abs() < 1e-15);
        assert_eq!(e.jumps_between(0.2, 0.5), &[0.4]);
    }
}
