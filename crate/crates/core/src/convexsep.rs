//! Separation of touching sublevel sets of convex functions and the affine
//! subgradient pairs it produces.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::intersection::{ip_decide_fullspace, IPDecision, Verdict};
use crate::primitives::{dist_sq, dot, norm_sq, ExtReal, QuadMinorant, SampledFunction, Vector, DEFAULT_TOL};
use crate::subdiff::{subdiff_membership, SubdiffQuery};

/// A common sublevel point and a functional separating the two sublevel sets there.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationResult {
    pub x_bar: Vector,
    pub ell: Vector,
    /// Scaling with `ℓ/k` a subgradient of `f` at `x̄`.
    pub k: f64,
    /// Scaling with `-ℓ/λ` a subgradient of `g` at `x̄`.
    pub lam: f64,
    /// Some strict sublevel set was empty on the grid, so `ℓ` comes from
    /// finite differences (or a coordinate axis) rather than a closest pair.
    pub degenerate: bool,
    /// Tolerance used when checking `sup ⟨ℓ̂, [f <= α]⟩ <= ⟨ℓ̂, x̄⟩ <= inf ⟨ℓ̂, [g <= α]⟩`.
    pub tol: f64,
}

fn unit_directions(n: usize) -> Vec<Vec<isize>> {
    let mut out = Vec::new();
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let d: Vec<isize> = (0..n)
            .map(|_| {
                let v = (c % 3) as isize - 1;
                c /= 3;
                v
            })
            .collect();
        if d.iter().find(|&&v| v != 0) == Some(&1) {
            out.push(d);
        }
    }
    out
}

/// Midpoint convexity on every axis-aligned and diagonal grid triple.
pub fn is_discretely_convex(f: &SampledFunction, tol: f64) -> bool {
    let grid = f.grid();
    let dirs = unit_directions(grid.dim());
    (0..grid.len()).into_par_iter().all(|i| {
        let Some(mid) = f.value(i).finite() else { return true };
        dirs.iter().all(|d| {
            let back: Vec<isize> = d.iter().map(|v| -v).collect();
            match (grid.offset(i, d), grid.offset(i, &back)) {
                (Some(p), Some(m)) => {
                    let (Some(a), Some(b)) = (f.value(p).finite(), f.value(m).finite()) else {
                        return false;
                    };
                    a + b - 2.0 * mid >= -tol * (1.0 + a.abs() + b.abs() + mid.abs())
                }
                _ => true,
            }
        })
    })
}

/// Central (one-sided at the boundary) finite-difference gradient.
pub fn finite_difference_gradient(f: &SampledFunction, i: usize) -> Result<Vector> {
    let grid = f.grid();
    let n = grid.dim();
    let h = grid.step();
    let fi = f.value(i).finite().ok_or(Error::Improper)?;
    let mut g = vec![0.0; n];
    for (d, gd) in g.iter_mut().enumerate() {
        let mut e = vec![0isize; n];
        e[d] = 1;
        let plus = grid.offset(i, &e).and_then(|j| f.value(j).finite());
        e[d] = -1;
        let minus = grid.offset(i, &e).and_then(|j| f.value(j).finite());
        *gd = match (plus, minus) {
            (Some(p), Some(m)) => (p - m) / (2.0 * h),
            (Some(p), None) => (p - fi) / h,
            (None, Some(m)) => (fi - m) / h,
            (None, None) => 0.0,
        };
    }
    Vector::new(g)
}

fn check_hypotheses(f: &SampledFunction, g: &SampledFunction, alpha: f64) -> Result<()> {
    if !f.same_grid(g) {
        return Err(Error::InvalidInput("f and g must share one grid".into()));
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("level {alpha} must be finite")));
    }
    for (name, h) in [("f", f), ("g", g)] {
        if h.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition(format!("{name} must be finite on the whole box")));
        }
        if !is_discretely_convex(h, 1e-9) {
            return Err(Error::Precondition(format!("{name} fails the discrete convexity check")));
        }
    }
    let both = f
        .values()
        .iter()
        .zip(g.values())
        .position(|(a, b)| ExtReal::lt(*a, alpha) && ExtReal::lt(*b, alpha));
    if let Some(i) = both {
        return Err(Error::Precondition(format!(
            "f and g are both below {alpha} at {}",
            f.grid().point_vector(i)
        )));
    }
    Ok(())
}

fn common_point(f: &SampledFunction, g: &SampledFunction, alpha: f64) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for i in 0..f.len() {
        let (Some(a), Some(b)) = (f.value(i).finite(), g.value(i).finite()) else { continue };
        if a <= alpha && b <= alpha {
            let m = a.max(b);
            if best.is_none_or(|(_, bm)| m < bm) {
                best = Some((i, m));
            }
        }
    }
    best.map(|(i, _)| i).ok_or_else(|| {
        Error::Precondition(format!("[f <= {alpha}] and [g <= {alpha}] do not meet on the grid"))
    })
}

fn level_points(h: &SampledFunction, alpha: f64, strict: bool) -> Vec<usize> {
    (0..h.len())
        .filter(|&i| if strict { h.value(i).lt(alpha) } else { h.value(i).le(alpha) })
        .collect()
}

/// Grid points of the set that have an axis neighbour outside it.
fn boundary(h: &SampledFunction, members: &[usize]) -> Vec<usize> {
    let grid = h.grid();
    let n = grid.dim();
    let mut inside = vec![false; grid.len()];
    for &i in members {
        inside[i] = true;
    }
    members
        .iter()
        .copied()
        .filter(|&i| {
            (0..n).any(|d| {
                [-1isize, 1].iter().any(|&s| {
                    let mut e = vec![0isize; n];
                    e[d] = s;
                    grid.offset(i, &e).is_none_or(|j| !inside[j])
                })
            })
        })
        .collect()
}

fn closest_pair(h: &SampledFunction, a: &[usize], b: &[usize]) -> Option<(usize, usize)> {
    let grid = h.grid();
    a.par_iter()
        .filter_map(|&i| {
            b.iter()
                .map(|&j| (dist_sq(grid.point(i), grid.point(j)), i, j))
                .min_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))))
        })
        .min_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))))
        .map(|(_, i, j)| (i, j))
}

fn separates(h_f: &[&[f64]], h_g: &[&[f64]], ell: &[f64], x_bar: &[f64], tol: f64) -> bool {
    let nl = norm_sq(ell).sqrt();
    let u: Vec<f64> = ell.iter().map(|c| c / nl).collect();
    let at = dot(&u, x_bar);
    let sup_f = h_f.iter().map(|y| dot(&u, y)).fold(f64::NEG_INFINITY, f64::max);
    let inf_g = h_g.iter().map(|z| dot(&u, z)).fold(f64::INFINITY, f64::min);
    sup_f <= at + tol && inf_g >= at - tol
}

fn affine_pair(
    sep: &SeparationResult,
    f_at: f64,
    g_at: f64,
) -> Result<(QuadMinorant, QuadMinorant)> {
    let x = sep.x_bar.as_slice();
    let s1 = sep.ell.scale(1.0 / sep.k);
    let s2 = sep.ell.scale(-1.0 / sep.lam);
    let c1 = f_at - dot(s1.as_slice(), x);
    let c2 = g_at - dot(s2.as_slice(), x);
    Ok((QuadMinorant::affine(s1, c1)?, QuadMinorant::affine(s2, c2)?))
}

fn is_subgradient(h: &SampledFunction, i: usize, phi: &QuadMinorant) -> Result<bool> {
    subdiff_membership(&SubdiffQuery::at_index(h, i, 0.0, DEFAULT_TOL)?, phi)
}

/// Finds `x̄ ∈ [f <= α] ∩ [g <= α]` and `ℓ ≠ 0` with
/// `sup ⟨ℓ, [f <= α]⟩ = ⟨ℓ, x̄⟩ = inf ⟨ℓ, [g <= α]⟩`.
///
/// Candidate directions, in order: the closest pair between the sampled
/// strict sublevel sets, the finite-difference gradient of `f` at `x̄`, and
/// minus that of `g`. Among candidates passing the separation check within
/// one grid step, the first whose scaled affine pair consists of exact
/// subgradients is preferred.
pub fn separate_sublevel_sets(f: &SampledFunction, g: &SampledFunction, alpha: f64) -> Result<SeparationResult> {
    check_hypotheses(f, g, alpha)?;
    let grid = f.grid();
    let n = grid.dim();
    let xi = common_point(f, g, alpha)?;
    let x_bar = grid.point_vector(xi);
    let d_f = finite_difference_gradient(f, xi)?;
    let d_g = finite_difference_gradient(g, xi)?;

    let strict_f = level_points(f, alpha, true);
    let strict_g = level_points(g, alpha, true);
    let degenerate = strict_f.is_empty() || strict_g.is_empty();

    let mut candidates: Vec<Vec<f64>> = Vec::new();
    if !degenerate {
        let bf = boundary(f, &strict_f);
        let bg = boundary(g, &strict_g);
        if let Some((i, j)) = closest_pair(f, &bf, &bg) {
            let d: Vec<f64> = grid.point(j).iter().zip(grid.point(i)).map(|(a, b)| a - b).collect();
            candidates.push(d);
        }
    }
    candidates.push(d_f.as_slice().to_vec());
    candidates.push(d_g.scale(-1.0).into_vec());
    if degenerate {
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        candidates.push(e);
    }

    let closed_f = level_points(f, alpha, false);
    let closed_g = level_points(g, alpha, false);
    let pts_f: Vec<&[f64]> = boundary(f, &closed_f).into_iter().map(|i| grid.point(i)).collect();
    let pts_g: Vec<&[f64]> = boundary(g, &closed_g).into_iter().map(|i| grid.point(i)).collect();
    let tol = grid.step();
    let f_at = f.value(xi).finite().ok_or(Error::Improper)?;
    let g_at = g.value(xi).finite().ok_or(Error::Improper)?;

    let mut fallback: Option<SeparationResult> = None;
    for ell in candidates {
        let nl = norm_sq(&ell).sqrt();
        if nl == 0.0 || !separates(&pts_f, &pts_g, &ell, x_bar.as_slice(), tol) {
            continue;
        }
        // ℓ = k·s for a subgradient s, so k = ‖ℓ‖/‖s‖ with s estimated by finite differences.
        let ratio = |d: &Vector| {
            let r = nl / d.norm();
            if r > 0.0 && r.is_finite() { r } else { 1.0 }
        };
        let sep = SeparationResult {
            x_bar: x_bar.clone(),
            ell: Vector::new(ell.clone())?,
            k: ratio(&d_f),
            lam: ratio(&d_g),
            degenerate,
            tol,
        };
        let sep = rescale_if_needed(f, g, xi, sep, f_at, g_at)?;
        let (p1, p2) = affine_pair(&sep, f_at, g_at)?;
        if is_subgradient(f, xi, &p1)? && is_subgradient(g, xi, &p2)? {
            return Ok(sep);
        }
        fallback.get_or_insert(sep);
    }
    fallback.ok_or_else(|| {
        Error::VerificationFailed(format!(
            "no separating direction found at {x_bar} (gradients {d_f} and {d_g})"
        ))
    })
}

/// Falls back to `k = λ = 1` when the gradient-based scalings do not give subgradients.
fn rescale_if_needed(
    f: &SampledFunction,
    g: &SampledFunction,
    xi: usize,
    sep: SeparationResult,
    f_at: f64,
    g_at: f64,
) -> Result<SeparationResult> {
    let (p1, p2) = affine_pair(&sep, f_at, g_at)?;
    if is_subgradient(f, xi, &p1)? && is_subgradient(g, xi, &p2)? {
        return Ok(sep);
    }
    let unit = SeparationResult {
        k: 1.0,
        lam: 1.0,
        ..sep.clone()
    };
    let (q1, q2) = affine_pair(&unit, f_at, g_at)?;
    if is_subgradient(f, xi, &q1)? && is_subgradient(g, xi, &q2)? {
        return Ok(unit);
    }
    Ok(sep)
}

/// Affine subgradients of `f` and `g` with the intersection property at level `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvPair {
    pub x1: Vector,
    pub phi1: QuadMinorant,
    pub x2: Vector,
    pub phi2: QuadMinorant,
    pub decision: IPDecision,
    pub degenerate: bool,
    pub separation: Option<SeparationResult>,
}

fn constant_at_min(h: &SampledFunction) -> Result<(usize, QuadMinorant)> {
    let (i, m) = h.min();
    Ok((i, QuadMinorant::constant(h.dim(), m)?))
}

/// Builds the affine subgradient pair for touching sublevel sets.
///
/// If `[f < α]` (or `[g < α]`) is empty on the grid, the constant `α` touches
/// that function at the common sublevel point and any subgradient of the other
/// function completes the pair. Otherwise the pair comes from
/// [`separate_sublevel_sets`]: `φ₁ = ⟨ℓ, x - x̄⟩/k + f(x̄)` and
/// `φ₂ = -⟨ℓ, x - x̄⟩/λ + g(x̄)`. Both members are verified as exact subgradients
/// and a full-space verdict other than `Holds` is reported as
/// [`Error::TheoremViolation`].
pub fn conv_subgradient_ip_pair(f: &SampledFunction, g: &SampledFunction, alpha: f64) -> Result<ConvPair> {
    check_hypotheses(f, g, alpha)?;
    let grid = f.grid();
    let n = grid.dim();
    let xi = common_point(f, g, alpha)?;
    let f_empty = level_points(f, alpha, true).is_empty();
    let g_empty = level_points(g, alpha, true).is_empty();

    let (i1, phi1, i2, phi2, separation) = if f_empty || g_empty {
        let level = QuadMinorant::constant(n, alpha)?;
        let (other, oi) = if f_empty { (g, 0) } else { (f, 1) };
        let (mi, mphi) = constant_at_min(other)?;
        if oi == 0 {
            (xi, level, mi, mphi, None)
        } else {
            (mi, mphi, xi, level, None)
        }
    } else {
        let sep = separate_sublevel_sets(f, g, alpha)?;
        let f_at = f.value(xi).finite().ok_or(Error::Improper)?;
        let g_at = g.value(xi).finite().ok_or(Error::Improper)?;
        let (p1, p2) = affine_pair(&sep, f_at, g_at)?;
        (xi, p1, xi, p2, Some(sep))
    };

    for (h, i, phi) in [(f, i1, &phi1), (g, i2, &phi2)] {
        if !is_subgradient(h, i, phi)? {
            return Err(Error::VerificationFailed(format!(
                "{phi} is not a subgradient at {}",
                grid.point_vector(i)
            )));
        }
    }
    let decision = ip_decide_fullspace(&phi1, &phi2, alpha, n)?;
    if decision.verdict != Verdict::Holds {
        return Err(Error::TheoremViolation(format!(
            "affine subgradients {phi1} and {phi2} lack the intersection property at {alpha}"
        )));
    }
    Ok(ConvPair {
        x1: grid.point_vector(i1),
        phi1,
        x2: grid.point_vector(i2),
        phi2,
        decision,
        degenerate: f_empty || g_empty,
        separation,
    })
}
