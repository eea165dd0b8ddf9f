//! Strict sublevel sets of quadratic minorants and the intersection property.
//!
//! Two minorants have the intersection property at level `α` on a set `Z` when
//! `Z ∩ [φ₁ < α] ∩ [φ₂ < α]` is empty. On the whole space this is decided by
//! an exact case table; on a closed ball it is reduced to at most two
//! effective coordinates and settled by branch and bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use crate::error::{Error, Result};
use crate::primitives::{dot, norm_sq, Grid, QuadMinorant, SampledFunction, Vector};

/// Default slack band for the ball decider.
pub const DEFAULT_BALL_MARGIN: f64 = 1e-6;

const ANTI_PARALLEL_TOL: f64 = 1e-10;
const GAP_ROUNDING: f64 = 1e-12;
const BALL_NODE_BUDGET: usize = 400_000;

/// Exact shape of `{x : φ(x) < α}`.
#[derive(Debug, Clone, PartialEq)]
pub enum SublevelGeom {
    Empty,
    All,
    PuncturedSpace { center: Vector },
    /// `{x : ⟨normal, x⟩ < bound}`.
    OpenHalfspace { normal: Vector, bound: f64 },
    /// `{x : ‖x - center‖ > radius}`.
    BallExterior { center: Vector, radius: f64 },
}

impl SublevelGeom {
    pub fn is_empty(&self) -> bool {
        matches!(self, SublevelGeom::Empty)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            SublevelGeom::Empty => false,
            SublevelGeom::All => true,
            SublevelGeom::PuncturedSpace { center } => {
                crate::primitives::dist_sq(x, center.as_slice()) > 0.0
            }
            SublevelGeom::OpenHalfspace { normal, bound } => dot(normal.as_slice(), x) < *bound,
            SublevelGeom::BallExterior { center, radius } => {
                crate::primitives::dist_sq(x, center.as_slice()).sqrt() > *radius
            }
        }
    }

    /// Short name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            SublevelGeom::Empty => "empty",
            SublevelGeom::All => "all",
            SublevelGeom::PuncturedSpace { .. } => "punctured-space",
            SublevelGeom::OpenHalfspace { .. } => "open-halfspace",
            SublevelGeom::BallExterior { .. } => "ball-exterior",
        }
    }
}

/// Case analysis of `[φ < α]`.
pub fn classify_strict_sublevel(phi: &QuadMinorant, alpha: f64, n: usize) -> Result<SublevelGeom> {
    phi.slope().check_dim(n)?;
    if !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("level {alpha} must be finite")));
    }
    let (a, l, c) = (phi.curvature(), phi.slope(), phi.offset());
    if a == 0.0 {
        if l.is_zero() {
            return Ok(if c < alpha { SublevelGeom::All } else { SublevelGeom::Empty });
        }
        return Ok(SublevelGeom::OpenHalfspace {
            normal: l.clone(),
            bound: alpha - c,
        });
    }
    let center = l.scale(1.0 / (2.0 * a));
    let r2 = (c - alpha) / a + l.norm_sq() / (4.0 * a * a);
    Ok(if r2 < 0.0 {
        SublevelGeom::All
    } else if r2 == 0.0 {
        SublevelGeom::PuncturedSpace { center }
    } else {
        SublevelGeom::BallExterior {
            center,
            radius: r2.sqrt(),
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Undecided,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "Holds",
            Verdict::Fails => "Fails",
            Verdict::Undecided => "Undecided",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of an intersection-property decision.
///
/// `margin` is the smallest strict slack at the witness for `Fails`, the
/// certified gap below zero for `Holds` (zero for exact case-table answers),
/// and the unresolved band for `Undecided`.
#[derive(Debug, Clone, PartialEq)]
pub struct IPDecision {
    pub verdict: Verdict,
    pub witness: Option<Vector>,
    pub certificate: String,
    pub margin: f64,
}

impl IPDecision {
    fn holds(certificate: &str, margin: f64) -> Self {
        IPDecision {
            verdict: Verdict::Holds,
            witness: None,
            certificate: certificate.to_string(),
            margin,
        }
    }

    fn fails(certificate: &str, witness: Vector, margin: f64) -> Self {
        IPDecision {
            verdict: Verdict::Fails,
            witness: Some(witness),
            certificate: certificate.to_string(),
            margin,
        }
    }

    pub fn holds_verdict(&self) -> bool {
        self.verdict == Verdict::Holds
    }
}

/// `min(α - φ₁(x), α - φ₂(x))`; positive iff `x` lies in both strict sublevel sets.
pub fn common_slack(phi1: &QuadMinorant, phi2: &QuadMinorant, alpha: f64, x: &[f64]) -> f64 {
    (alpha - phi1.eval_slice(x)).min(alpha - phi2.eval_slice(x))
}

/// Re-checks a witness: strict membership in both sets (and the ball if given).
pub fn verify_witness(
    phi1: &QuadMinorant,
    phi2: &QuadMinorant,
    alpha: f64,
    ball: Option<f64>,
    w: &Vector,
) -> bool {
    phi1.dim() == w.dim()
        && phi2.dim() == w.dim()
        && common_slack(phi1, phi2, alpha, w.as_slice()) > 0.0
        && ball.is_none_or(|g| w.norm() <= g)
}

fn check_pair(phi1: &QuadMinorant, phi2: &QuadMinorant, alpha: f64, n: usize) -> Result<()> {
    phi1.slope().check_dim(n)?;
    phi2.slope().check_dim(n)?;
    if !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("level {alpha} must be finite")));
    }
    Ok(())
}

fn unit(n: usize, d: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[d] = 1.0;
    e
}

fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|c| c * s).collect()
}

fn axpy(x: &[f64], s: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + s * b).collect()
}

/// Some point of a non-empty sublevel set, with a little room to spare.
fn point_in(g: &SublevelGeom, n: usize) -> Vec<f64> {
    match g {
        SublevelGeom::Empty | SublevelGeom::All => vec![0.0; n],
        SublevelGeom::PuncturedSpace { center } => axpy(center.as_slice(), 1.0, &unit(n, 0)),
        SublevelGeom::OpenHalfspace { normal, bound } => {
            let nn = normal.norm();
            scaled(normal.as_slice(), (bound / nn - 1.0) / nn)
        }
        SublevelGeom::BallExterior { center, radius } => {
            axpy(center.as_slice(), radius + 1.0, &unit(n, 0))
        }
    }
}

/// Radius beyond which a point escapes the excluded bounded region of `g`.
fn excluded_radius(g: &SublevelGeom) -> f64 {
    match g {
        SublevelGeom::PuncturedSpace { center } => center.norm(),
        SublevelGeom::BallExterior { center, radius } => center.norm() + radius,
        _ => 0.0,
    }
}

fn is_bounded_complement(g: &SublevelGeom) -> bool {
    matches!(
        g,
        SublevelGeom::All | SublevelGeom::PuncturedSpace { .. } | SublevelGeom::BallExterior { .. }
    )
}

/// Exact decision of the intersection property on the whole space.
pub fn ip_decide_fullspace(
    phi1: &QuadMinorant,
    phi2: &QuadMinorant,
    alpha: f64,
    n: usize,
) -> Result<IPDecision> {
    check_pair(phi1, phi2, alpha, n)?;
    let g1 = classify_strict_sublevel(phi1, alpha, n)?;
    let g2 = classify_strict_sublevel(phi2, alpha, n)?;
    if g1.is_empty() || g2.is_empty() {
        return Ok(IPDecision::holds("empty-sublevel", 0.0));
    }

    // (certificate, primary candidate)
    let (tag, candidate): (&str, Vec<f64>) = match (&g1, &g2) {
        (SublevelGeom::All, other) | (other, SublevelGeom::All) => ("full-sublevel", point_in(other, n)),
        (a, b) if is_bounded_complement(a) && is_bounded_complement(b) => {
            let t = 1.0 + excluded_radius(a) + excluded_radius(b);
            ("escaping-ray", scaled(&unit(n, 0), t))
        }
        (SublevelGeom::OpenHalfspace { normal, bound }, other)
        | (other, SublevelGeom::OpenHalfspace { normal, bound }) if is_bounded_complement(other) => {
            let h = SublevelGeom::OpenHalfspace {
                normal: normal.clone(),
                bound: *bound,
            };
            let x0 = point_in(&h, n);
            let nn = normal.norm();
            let t = 1.0 + excluded_radius(other) + norm_sq(&x0).sqrt();
            ("escaping-ray", axpy(&x0, -t / nn, normal.as_slice()))
        }
        (
            SublevelGeom::OpenHalfspace { normal: n1, bound: b1 },
            SublevelGeom::OpenHalfspace { normal: n2, bound: b2 },
        ) => {
            let (m1, m2) = (n1.norm(), n2.norm());
            let u1 = scaled(n1.as_slice(), 1.0 / m1);
            let u2 = scaled(n2.as_slice(), 1.0 / m2);
            let (c1, c2) = (b1 / m1, b2 / m2);
            let cos = dot(&u1, &u2);
            if cos <= -1.0 + ANTI_PARALLEL_TOL {
                // A gap below rounding level cannot host a verifiable common point.
                if c1 + c2 <= GAP_ROUNDING * (1.0 + c1.abs() + c2.abs()) {
                    return Ok(IPDecision::holds("anti-parallel-halfspaces", 0.0));
                }
                ("anti-parallel-overlap", scaled(&u1, (c1 - c2) / 2.0))
            } else {
                // Both normals have a negative component along -(u1 + u2).
                let sum: Vec<f64> = u1.iter().zip(&u2).map(|(a, b)| a + b).collect();
                let ns = norm_sq(&sum).sqrt();
                let d = scaled(&sum, -1.0 / ns);
                let k = ((1.0 + cos) / 2.0).sqrt();
                let t = (-c1 / k).max(-c2 / k).max(0.0) + 1.0 / k;
                ("halfspace-pair", scaled(&d, t))
            }
        }
        _ => unreachable!("empty sublevel sets are handled above"),
    };

    if let Some((w, s)) = confirm(phi1, phi2, alpha, &candidate, &g1, &g2, n) {
        return Ok(IPDecision::fails(tag, w, s));
    }
    Err(Error::InternalConsistency(format!(
        "could not realize a common point of [{phi1} < {alpha}] and [{phi2} < {alpha}]"
    )))
}

/// Verifies the candidate, trying scaled and axis-aligned rays if rounding spoils it.
fn confirm(
    phi1: &QuadMinorant,
    phi2: &QuadMinorant,
    alpha: f64,
    candidate: &[f64],
    g1: &SublevelGeom,
    g2: &SublevelGeom,
    n: usize,
) -> Option<(Vector, f64)> {
    let ok = |x: &[f64]| -> Option<(Vector, f64)> {
        let s = common_slack(phi1, phi2, alpha, x);
        (s > 0.0 && x.iter().all(|c| c.is_finite())).then(|| (Vector::from_slice_unchecked(x), s))
    };
    if let Some(hit) = ok(candidate) {
        return Some(hit);
    }
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for g in [g1, g2] {
        if let SublevelGeom::OpenHalfspace { normal, .. } = g {
            dirs.push(scaled(normal.as_slice(), -1.0 / normal.norm()));
        }
    }
    for d in 0..n {
        dirs.push(unit(n, d));
        dirs.push(scaled(&unit(n, d), -1.0));
    }
    let base = [point_in(g1, n), point_in(g2, n), vec![0.0; n]];
    for b in &base {
        for d in &dirs {
            let mut t = 1.0;
            for _ in 0..80 {
                if let Some(hit) = ok(&axpy(b, t, d)) {
                    return Some(hit);
                }
                t *= 2.0;
            }
        }
    }
    None
}

/// Orthonormal basis of `span{l₁, l₂}` plus what is left of each slope outside it.
struct Reduction {
    basis: Vec<Vec<f64>>,
    coords: [Vec<f64>; 2],
    residual: [f64; 2],
}

fn gram_schmidt(v: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut r = v.to_vec();
    for _ in 0..2 {
        for b in basis {
            let p = dot(&r, b);
            r = axpy(&r, -p, b);
        }
    }
    r
}

fn reduce(l1: &[f64], l2: &[f64]) -> Reduction {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for l in [l1, l2] {
        let scale = norm_sq(l).sqrt();
        if scale == 0.0 || basis.len() == l.len() {
            continue;
        }
        let r = gram_schmidt(l, &basis);
        let rn = norm_sq(&r).sqrt();
        if rn > 1e-12 * scale {
            basis.push(scaled(&r, 1.0 / rn));
        }
    }
    let project = |l: &[f64]| -> (Vec<f64>, f64) {
        let c: Vec<f64> = basis.iter().map(|b| dot(l, b)).collect();
        let rest = gram_schmidt(l, &basis);
        (c, norm_sq(&rest).sqrt())
    };
    let (c1, r1) = project(l1);
    let (c2, r2) = project(l2);
    Reduction {
        basis,
        coords: [c1, c2],
        residual: [r1, r2],
    }
}

/// A unit vector orthogonal to `basis` (exists when `basis.len() < n`).
fn orthogonal_unit(basis: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut best = vec![0.0; n];
    let mut best_norm = 0.0;
    for d in 0..n {
        let r = gram_schmidt(&unit(n, d), basis);
        let rn = norm_sq(&r).sqrt();
        if rn > best_norm {
            best_norm = rn;
            best = r;
        }
    }
    scaled(&best, 1.0 / best_norm)
}

#[derive(Debug, Clone, Copy)]
struct Node {
    ub: f64,
    center: [f64; 2],
    half: f64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ub
            .total_cmp(&other.ub)
            .then_with(|| other.center[0].total_cmp(&self.center[0]))
            .then_with(|| other.center[1].total_cmp(&self.center[1]))
    }
}

/// Decides the intersection property on the closed ball `‖x‖ <= γ`.
///
/// A full-space `Holds` carries over by restriction. Otherwise the common
/// slack is maximized over the ball in the coordinates spanned by the two
/// slopes; every other direction only enters through `‖x‖²`, which is best
/// pushed to `γ²`. `Fails` needs a witness with slack above `margin`,
/// `Holds` needs a certified upper bound below `-margin`.
pub fn ip_decide_ball(
    phi1: &QuadMinorant,
    phi2: &QuadMinorant,
    alpha: f64,
    gamma: f64,
    margin: f64,
) -> Result<IPDecision> {
    let n = phi1.dim();
    check_pair(phi1, phi2, alpha, n)?;
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidInput(format!("ball radius {gamma} must be > 0")));
    }
    if !(margin.is_finite() && margin > 0.0) {
        return Err(Error::InvalidInput(format!("margin {margin} must be > 0")));
    }
    let full = ip_decide_fullspace(phi1, phi2, alpha, n)?;
    if full.verdict == Verdict::Holds {
        return Ok(IPDecision::holds(&format!("restricted-{}", full.certificate), 0.0));
    }
    if let Some(w) = &full.witness {
        if w.norm() <= gamma && full.margin > margin {
            return Ok(IPDecision::fails("ball-member", w.clone(), full.margin));
        }
    }

    let red = reduce(phi1.slope().as_slice(), phi2.slope().as_slice());
    let k = red.basis.len();
    let free = n > k;
    let e_perp = free.then(|| orthogonal_unit(&red.basis, n));
    let phis = [phi1, phi2];
    let slop = (red.residual[0] + red.residual[1]) * gamma
        + 1e-12 * (1.0 + alpha.abs() + phi1.offset().abs() + phi2.offset().abs());

    // Reduced slack h_i(u) = α + a_i (‖u‖² + t²) - ⟨l̃_i, u⟩ - c_i.
    let h = |i: usize, u: &[f64]| -> f64 {
        let p = phis[i];
        let uu = norm_sq(u);
        let rad = if free { gamma * gamma } else { uu };
        alpha + p.curvature() * rad - dot(&red.coords[i], u) - p.offset()
    };
    let upper = |u: &[f64], delta: f64| -> f64 {
        (0..2)
            .map(|i| {
                let p = phis[i];
                let a_eff = if free { 0.0 } else { p.curvature() };
                let grad: Vec<f64> = u
                    .iter()
                    .zip(&red.coords[i])
                    .map(|(uj, lj)| 2.0 * a_eff * uj - lj)
                    .collect();
                h(i, u) + norm_sq(&grad).sqrt() * delta + a_eff * delta * delta
            })
            .fold(f64::INFINITY, f64::min)
            + slop
    };
    let embed = |u: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (j, b) in red.basis.iter().enumerate() {
            x = axpy(&x, u[j], b);
        }
        if let Some(e) = &e_perp {
            let t2 = (gamma * gamma - norm_sq(u)).max(0.0);
            x = axpy(&x, t2.sqrt(), e);
        }
        let nx = norm_sq(&x).sqrt();
        if nx > gamma {
            x = scaled(&x, gamma / nx * (1.0 - 4.0 * f64::EPSILON));
        }
        x
    };
    let project = |c: &[f64]| -> Vec<f64> {
        let nc = norm_sq(c).sqrt();
        if nc > gamma {
            scaled(c, gamma / nc)
        } else {
            c.to_vec()
        }
    };

    let mut best_lb = f64::NEG_INFINITY;
    let mut best_x: Vec<f64> = vec![0.0; n];
    let consider = |u: &[f64], best_lb: &mut f64, best_x: &mut Vec<f64>| {
        let x = embed(&project(u));
        let s = common_slack(phi1, phi2, alpha, &x);
        if s > *best_lb && norm_sq(&x).sqrt() <= gamma {
            *best_lb = s;
            *best_x = x;
        }
    };

    if k == 0 {
        consider(&[], &mut best_lb, &mut best_x);
        let ub = upper(&[], 0.0);
        return Ok(finish(best_lb, best_x, ub, false, margin));
    }

    let root = [0.0; 2];
    let mut heap = BinaryHeap::new();
    let delta0 = gamma * (k as f64).sqrt();
    heap.push(Node {
        ub: upper(&root[..k], delta0),
        center: root,
        half: gamma,
    });
    consider(&root[..k], &mut best_lb, &mut best_x);
    let mut band = false;
    let mut expanded = 0usize;
    let mut pruned_max = f64::NEG_INFINITY;
    while let Some(node) = heap.pop() {
        if best_lb > margin || node.ub < -margin {
            heap.push(node);
            break;
        }
        expanded += 1;
        if expanded > BALL_NODE_BUDGET {
            heap.push(node);
            band = true;
            break;
        }
        if node.half < 1e-10 * gamma {
            band = true;
            continue;
        }
        let half = node.half / 2.0;
        let delta = half * (k as f64).sqrt();
        let signs: &[[f64; 2]] = if k == 1 {
            &[[-1.0, 0.0], [1.0, 0.0]]
        } else {
            &[[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]]
        };
        for s in signs {
            let c = [node.center[0] + s[0] * half, node.center[1] + s[1] * half];
            if norm_sq(&c[..k]).sqrt() - delta > gamma {
                continue;
            }
            consider(&c[..k], &mut best_lb, &mut best_x);
            let ub = upper(&c[..k], delta);
            if ub >= -margin {
                heap.push(Node { ub, center: c, half });
            } else {
                pruned_max = pruned_max.max(ub);
            }
        }
    }
    let ub = heap.peek().map_or(pruned_max, |n| n.ub);
    Ok(finish(best_lb, best_x, ub, band, margin))
}

fn finish(best_lb: f64, best_x: Vec<f64>, ub: f64, band: bool, margin: f64) -> IPDecision {
    if best_lb > margin {
        return IPDecision::fails("ball-search", Vector::from_slice_unchecked(&best_x), best_lb);
    }
    if !band && ub < -margin {
        return IPDecision::holds("ball-bound", -ub);
    }
    IPDecision {
        verdict: Verdict::Undecided,
        witness: None,
        certificate: "ball-band".to_string(),
        margin,
    }
}

/// Grid scan for a common strict-membership point, optionally inside a ball.
pub fn ip_brute_force(
    phi1: &QuadMinorant,
    phi2: &QuadMinorant,
    alpha: f64,
    grid: &Grid,
    ball: Option<f64>,
) -> Result<IPDecision> {
    check_pair(phi1, phi2, alpha, grid.dim())?;
    for x in grid.points() {
        if let Some(g) = ball {
            if norm_sq(x).sqrt() > g {
                continue;
            }
        }
        let s = common_slack(phi1, phi2, alpha, x);
        if s > 0.0 {
            return Ok(IPDecision::fails("grid-scan", Vector::from_slice_unchecked(x), s));
        }
    }
    Ok(IPDecision::holds("grid-scan", 0.0))
}

/// Where a touching minorant is allowed to touch a sampled 1-D function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Touch {
    /// The samples are a window of a function on the whole line: touching
    /// points must be interior grid points, and chord slopes are constrained
    /// from both sides.
    Interior,
    /// The function is `+∞` outside the box: every grid point may touch.
    Closed,
}

/// Extreme crossing point of `[φ < α]` for increasing affine touching minorants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayBound {
    /// Infimum of the crossing points `τ` with `[φ < α] = (-∞, τ)`.
    pub value: f64,
    pub attained: bool,
}

/// What one sampled 1-D function offers to an intersection-property pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TouchSummary1d {
    /// Some touching constant is `>= α`, i.e. has empty sublevel set.
    pub constant_empty: bool,
    /// The function has a touching minorant at an admissible point.
    pub touchable: bool,
    /// Over increasing affine touching minorants: `inf τ`.
    pub increasing: Option<RayBound>,
    /// Over decreasing affine touching minorants, `[φ < α] = (τ, ∞)`: `sup τ`.
    pub decreasing: Option<RayBound>,
}

fn chord_intervals(xs: &[f64], vs: &[Option<f64>]) -> Vec<Option<(f64, f64)>> {
    let n = xs.len();
    (0..n)
        .map(|i| {
            let fi = vs[i]?;
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            for j in 0..n {
                let Some(fj) = vs[j] else { continue };
                if j < i {
                    lo = lo.max((fi - fj) / (xs[i] - xs[j]));
                } else if j > i {
                    hi = hi.min((fj - fi) / (xs[j] - xs[i]));
                }
            }
            let slack = 1e-9 * (1.0 + lo.abs().min(hi.abs()));
            if lo > hi + slack {
                None
            } else {
                let mid = if lo > hi { (lo + hi) / 2.0 } else { f64::NAN };
                Some(if mid.is_nan() { (lo, hi) } else { (mid, mid) })
            }
        })
        .collect()
}

fn better_inf(cur: Option<RayBound>, cand: RayBound) -> Option<RayBound> {
    Some(match cur {
        None => cand,
        Some(c) if cand.value < c.value || (cand.value == c.value && cand.attained) => cand,
        Some(c) => c,
    })
}

/// `inf τ` over increasing affine minorants touching at admissible points.
fn increasing_bound(xs: &[f64], vs: &[Option<f64>], alpha: f64, touch: Touch) -> Option<RayBound> {
    let n = xs.len();
    let chords = chord_intervals(xs, vs);
    let mut best: Option<RayBound> = None;
    for i in 0..n {
        if touch == Touch::Interior && (i == 0 || i + 1 == n) {
            continue;
        }
        let (Some(fi), Some((lo, hi))) = (vs[i], chords[i]) else { continue };
        if hi <= 0.0 {
            continue;
        }
        let x0 = xs[i];
        let d = alpha - fi;
        let tau = |s: f64| x0 + d / s;
        let cand = if d == 0.0 {
            RayBound { value: x0, attained: true }
        } else if d < 0.0 {
            // τ grows with s: smallest admissible slope wins.
            if lo > 0.0 {
                RayBound { value: tau(lo), attained: true }
            } else {
                RayBound { value: f64::NEG_INFINITY, attained: false }
            }
        } else if hi.is_finite() {
            RayBound { value: tau(hi), attained: true }
        } else {
            RayBound { value: x0, attained: false }
        };
        best = better_inf(best, cand);
    }
    best
}

/// Summarizes the touching minorants of a sampled 1-D function at level `α`.
pub fn touch_summary_1d(f: &SampledFunction, alpha: f64, touch: Touch) -> Result<TouchSummary1d> {
    if f.dim() != 1 {
        return Err(Error::Unsupported(format!(
            "one-dimensional certificate requested for dimension {}",
            f.dim()
        )));
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("level {alpha} must be finite")));
    }
    let xs: Vec<f64> = f.grid().axis(0).to_vec();
    let vs: Vec<Option<f64>> = f.values().iter().map(|v| v.finite()).collect();
    let n = xs.len();
    let admissible = |i: usize| touch == Touch::Closed || (i > 0 && i + 1 < n);

    let (_, min) = f.min();
    let constant_empty =
        min >= alpha && (0..n).any(|i| admissible(i) && vs[i] == Some(min));
    let touchable = (0..n).any(|i| admissible(i) && vs[i].is_some());

    let increasing = increasing_bound(&xs, &vs, alpha, touch);
    let rx: Vec<f64> = xs.iter().rev().map(|x| -x).collect();
    let rv: Vec<Option<f64>> = vs.iter().rev().copied().collect();
    let decreasing = increasing_bound(&rx, &rv, alpha, touch).map(|b| RayBound {
        value: -b.value,
        attained: b.attained,
    });
    Ok(TouchSummary1d {
        constant_empty,
        touchable,
        increasing,
        decreasing,
    })
}

fn rays_disjoint(inc: Option<RayBound>, dec: Option<RayBound>) -> bool {
    match (inc, dec) {
        (Some(i), Some(d)) => i.value < d.value || (i.value == d.value && i.attained && d.attained),
        _ => false,
    }
}

/// Whether two summaries admit a touching pair with the intersection property on the line.
pub fn pair_exists_1d(s1: &TouchSummary1d, s2: &TouchSummary1d) -> bool {
    (s1.constant_empty && s2.touchable)
        || (s2.constant_empty && s1.touchable)
        || rays_disjoint(s1.increasing, s2.decreasing)
        || rays_disjoint(s2.increasing, s1.decreasing)
}

/// True iff no touching minorant pair of `f` and `g` has the intersection
/// property on the whole line at level `α`, with the given touching rule.
pub fn ip_no_witness_certificate_1d_with(
    f: &SampledFunction,
    g: &SampledFunction,
    alpha: f64,
    touch: Touch,
) -> Result<bool> {
    let s1 = touch_summary_1d(f, alpha, touch)?;
    let s2 = touch_summary_1d(g, alpha, touch)?;
    Ok(!pair_exists_1d(&s1, &s2))
}

/// [`ip_no_witness_certificate_1d_with`] for samples taken from functions on the whole line.
///
/// Only two kinds of pairs can have disjoint strict sublevel sets on the line:
/// a constant at or above `α`, or two affine functions of opposite slope
/// whose crossing points do not overlap. Both are decided exactly from the
/// chord-slope intervals of the samples.
pub fn ip_no_witness_certificate_1d(f: &SampledFunction, g: &SampledFunction, alpha: f64) -> Result<bool> {
    ip_no_witness_certificate_1d_with(f, g, alpha, Touch::Interior)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    fn q(a: f64, l: &[f64], c: f64) -> QuadMinorant {
        QuadMinorant::new(a, v(l), c).unwrap()
    }

    fn sampled(lo: f64, hi: f64, step: f64, f: impl Fn(f64) -> f64) -> SampledFunction {
        let g = Arc::new(Grid::cube(1, lo, hi, step).unwrap());
        SampledFunction::from_real_fn(g, |x| f(x[0])).unwrap()
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_strict_sublevel(&q(0.0, &[0.0], 0.0), 0.0, 1).unwrap(), SublevelGeom::Empty);
        assert_eq!(
            classify_strict_sublevel(&q(1.0, &[0.0], 0.0), -1.0, 1).unwrap(),
            SublevelGeom::BallExterior { center: v(&[0.0]), radius: 1.0 }
        );
        assert_eq!(
            classify_strict_sublevel(&q(0.0, &[1.0], 0.0), 0.0, 1).unwrap(),
            SublevelGeom::OpenHalfspace { normal: v(&[1.0]), bound: 0.0 }
        );
        assert_eq!(
            classify_strict_sublevel(&q(1.0, &[2.0], -1.0), 0.0, 1).unwrap(),
            SublevelGeom::PuncturedSpace { center: v(&[1.0]) }
        );
        assert_eq!(classify_strict_sublevel(&q(1.0, &[0.0], -1.0), 0.0, 1).unwrap(), SublevelGeom::All);
        assert_eq!(classify_strict_sublevel(&q(0.0, &[0.0], -1.0), 0.0, 1).unwrap(), SublevelGeom::All);
    }

    #[test]
    fn classification_matches_pointwise_evaluation() {
        let phis = [q(0.5, &[1.0, -2.0], 0.3), q(0.0, &[0.0, 1.0], 2.0), q(2.0, &[0.0, 0.0], 1.0)];
        let grid = Grid::cube(2, -3.0, 3.0, 0.25).unwrap();
        for phi in &phis {
            for alpha in [-2.0, 0.0, 1.0, 4.0] {
                let geom = classify_strict_sublevel(phi, alpha, 2).unwrap();
                for x in grid.points() {
                    assert_eq!(geom.contains(x), phi.eval_slice(x) < alpha, "{phi} {alpha} {x:?}");
                }
            }
        }
    }

    #[test]
    fn fullspace_examples() {
        let d = ip_decide_fullspace(&q(0.0, &[0.0], 0.0), &q(3.0, &[1.0], 7.0), 0.0, 1).unwrap();
        assert_eq!(d.verdict, Verdict::Holds);

        let p1 = q(0.0, &[1.0], 0.0);
        let p2 = q(0.0, &[-1.0], 0.0);
        assert_eq!(ip_decide_fullspace(&p1, &p2, 0.0, 1).unwrap().verdict, Verdict::Holds);
        let d = ip_decide_fullspace(&p1, &p2, 1.0, 1).unwrap();
        assert_eq!(d.verdict, Verdict::Fails);
        assert_eq!(d.witness.unwrap().as_slice(), &[0.0]);

        let p1 = q(1.0, &[0.0], 0.0);
        let p2 = q(1.0, &[4.0], 0.0);
        let d = ip_decide_fullspace(&p1, &p2, -1.0, 1).unwrap();
        assert_eq!(d.verdict, Verdict::Fails);
        assert!(verify_witness(&p1, &p2, -1.0, None, d.witness.as_ref().unwrap()));
        let grid = Grid::cube(1, -10.0, 10.0, 0.01).unwrap();
        assert_eq!(ip_brute_force(&p1, &p2, -1.0, &grid, None).unwrap().verdict, Verdict::Fails);
    }

    #[test]
    fn fullspace_witnesses_in_higher_dimension() {
        let cases = [
            (q(0.0, &[1.0, 0.0, 0.0], 0.0), q(0.0, &[0.0, 1.0, 0.0], 0.0)),
            (q(0.0, &[1.0, 1.0, 0.0], 5.0), q(2.0, &[1.0, 0.0, 3.0], 1.0)),
            (q(0.0, &[1.0, 0.0, 0.0], 0.0), q(0.0, &[-1.0, 1e-3, 0.0], 0.0)),
            (q(0.1, &[1.0, 0.0, 0.0], 9.0), q(0.3, &[0.0, 0.0, -3.0], 4.0)),
        ];
        for (p1, p2) in &cases {
            let d = ip_decide_fullspace(p1, p2, 0.0, 3).unwrap();
            assert_eq!(d.verdict, Verdict::Fails, "{p1} {p2}");
            assert!(verify_witness(p1, p2, 0.0, None, d.witness.as_ref().unwrap()));
        }
    }

    #[test]
    fn ball_examples() {
        let zero = q(0.0, &[0.0], 0.0);
        for g in [0.5, 3.0, 100.0] {
            let d = ip_decide_ball(&zero, &q(1.0, &[2.0], -5.0), 0.0, g, DEFAULT_BALL_MARGIN).unwrap();
            assert_eq!(d.verdict, Verdict::Holds);
        }
        let p = q(1.0, &[0.0], 0.0);
        let d = ip_decide_ball(&p, &p, -1.0, 0.5, DEFAULT_BALL_MARGIN).unwrap();
        assert_eq!(d.verdict, Verdict::Holds);
        let d = ip_decide_ball(&p, &p, -1.0, 2.0, DEFAULT_BALL_MARGIN).unwrap();
        assert_eq!(d.verdict, Verdict::Fails);
        let w = d.witness.unwrap();
        assert!(w.norm() <= 2.0 && -w[0] * w[0] < -1.0);
        assert!(ip_decide_ball(&p, &p, -1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn ball_decider_in_two_and_three_dimensions() {
        let p1 = q(1.0, &[1.0, 0.0], 0.0);
        let p2 = q(0.5, &[0.0, -1.0], 0.5);
        for n_case in 0..2 {
            let (a, b) = if n_case == 0 {
                (p1.clone(), p2.clone())
            } else {
                (q(1.0, &[1.0, 0.0, 0.0], 0.0), q(0.5, &[0.0, -1.0, 0.0], 0.5))
            };
            let n = a.dim();
            let grid = Grid::cube(n, -2.0, 2.0, if n == 2 { 0.02 } else { 0.1 }).unwrap();
            for gamma in [0.2, 0.7, 1.5] {
                for alpha in [-1.0, -0.2, 0.3] {
                    let d = ip_decide_ball(&a, &b, alpha, gamma, DEFAULT_BALL_MARGIN).unwrap();
                    let bf = ip_brute_force(&a, &b, alpha, &grid, Some(gamma)).unwrap();
                    if d.verdict == Verdict::Holds {
                        assert_eq!(bf.verdict, Verdict::Holds, "{gamma} {alpha}");
                    }
                    if d.verdict == Verdict::Fails {
                        assert!(verify_witness(&a, &b, alpha, Some(gamma), d.witness.as_ref().unwrap()));
                    }
                    if bf.verdict == Verdict::Fails {
                        assert_eq!(d.verdict, Verdict::Fails, "{gamma} {alpha}");
                    }
                }
            }
        }
    }

    #[test]
    fn certificate_examples() {
        let exp = sampled(-10.0, 10.0, 0.01, f64::exp2);
        let tent = sampled(-10.0, 10.0, 0.01, |x| -x.abs() + 2.0);
        assert!(ip_no_witness_certificate_1d(&exp, &tent, 0.0).unwrap());
        // With closed touching the left endpoint of 2^x carries a constant.
        assert!(!ip_no_witness_certificate_1d_with(&exp, &tent, 0.0, Touch::Closed).unwrap());

        let sq = sampled(-3.0, 3.0, 0.01, |x| x * x);
        assert!(!ip_no_witness_certificate_1d(&sq, &sq, -1.0).unwrap());
        let t1 = q(0.0, &[2.0], -1.0);
        let t2 = q(0.0, &[-2.0], -1.0);
        assert_eq!(ip_decide_fullspace(&t1, &t2, -1.0, 1).unwrap().verdict, Verdict::Holds);

        let five = sampled(-1.0, 1.0, 0.1, |_| 5.0);
        assert!(!ip_no_witness_certificate_1d(&five, &five, 0.0).unwrap());
    }

    #[test]
    fn certificate_gap_instance() {
        let f = sampled(-2.0, 2.0, 0.01, |x| -(x + 1.0) * (x + 1.0));
        let g = sampled(-2.0, 2.0, 0.01, |x| -(x - 1.0) * (x - 1.0));
        assert!(ip_no_witness_certificate_1d_with(&f, &g, -3.0, Touch::Closed).unwrap());
        // Far below every value a constant works.
        assert!(!ip_no_witness_certificate_1d_with(&f, &g, -10.0, Touch::Closed).unwrap());
    }

    #[test]
    fn certificate_tangent_pair() {
        let f = sampled(-3.0, 3.0, 0.01, |x| x * x);
        let g = sampled(-3.0, 3.0, 0.01, |x| (x - 2.0) * (x - 2.0));
        assert!(!ip_no_witness_certificate_1d(&f, &g, 1.0).unwrap());
        assert!(ip_no_witness_certificate_1d(&f, &g, 1.5).unwrap());
    }

    #[test]
    fn rejects_higher_dimension() {
        let g = Arc::new(Grid::cube(2, -1.0, 1.0, 0.5).unwrap());
        let f = SampledFunction::from_real_fn(g, |x| x[0]).unwrap();
        assert!(matches!(
            ip_no_witness_certificate_1d(&f, &f, 0.0),
            Err(Error::Unsupported(_))
        ));
    }
}
