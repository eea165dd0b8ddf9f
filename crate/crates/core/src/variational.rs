//! Borwein–Preiss points, the Brønsted–Rockafellar perturbation and the
//! transfer of the intersection property to exact subgradients on a ball.

use crate::error::{Error, Result};
use crate::intersection::{ip_decide_ball, ip_decide_fullspace, IPDecision, Verdict, DEFAULT_BALL_MARGIN};
use crate::primitives::{
    argmin_first, dist_sq, norm_sq, support_membership, QuadMinorant, SampledFunction,
    Vector, DEFAULT_TOL,
};
use crate::subdiff::{eps_subgradient_from_support, normalized_shift, subdiff_membership, EpsSubgradient, SubdiffQuery};

const BP_RESTARTS: usize = 10;

/// How a Borwein–Preiss point was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpRoute {
    /// Fixed point of the proximal map started at `y`.
    FixedPoint { restarts: usize },
    /// Exhaustive scan of the grid points within `λ` of `y`.
    Scan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpPoint {
    pub z: Vector,
    pub z_index: usize,
    pub route: BpRoute,
    pub iterations: usize,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidInput(format!("{name} {v} must be > 0")));
    }
    Ok(())
}

/// First grid argmin of `f(x) + κ‖x - center‖²`.
fn prox_argmin(f: &SampledFunction, kappa: f64, center: &[f64]) -> (usize, f64) {
    argmin_first(f.domain().map(|(i, x, v)| (i, v + kappa * dist_sq(x, center))))
        .expect("proper functions have a finite value")
}

/// `f(z) <= f(x) + κ‖x - z‖²` for every grid point of `dom f`.
fn penalized_minimum(f: &SampledFunction, kappa: f64, z_index: usize) -> bool {
    let Some(fz) = f.value(z_index).finite() else { return false };
    let z = f.grid().point(z_index);
    f.domain().all(|(_, x, v)| fz <= v + kappa * dist_sq(x, z))
}

/// Runs the proximal iteration `z ← argmin f + κ‖· - z‖²` from `start`.
fn proximal_fixed_point(f: &SampledFunction, kappa: f64, start: usize) -> (usize, usize) {
    let grid = f.grid();
    let mut z = start;
    let mut iterations = 0;
    loop {
        let fz = f.value(z).finite().expect("iterates stay in dom f");
        // Stopping on `f(next) >= f(z)` rather than on the penalized value lets
        // ties move on to the prox point; either way z then satisfies the
        // penalized inequality, and f strictly decreases along the way.
        let (next, _) = prox_argmin(f, kappa, grid.point(z));
        if f.value(next).finite().expect("argmin lies in dom f") >= fz {
            return (z, iterations);
        }
        z = next;
        iterations += 1;
    }
}

/// A grid point `z` with `‖z - y‖ <= λ` and `f(z) <= f(x) + (ε/λ²)‖x - z‖²` for all grid `x`.
///
/// The proximal iteration from `y` is tried first, then with doubled penalties
/// (whose fixed points drift less but must still pass the original
/// inequality), and finally every grid point within `λ` of `y` is checked.
/// The inequality and the distance are verified exhaustively before
/// returning. If no grid point qualifies, [`Error::NoAdmissiblePoint`] is
/// returned: for such instances the statement itself fails on the grid.
pub fn borwein_preiss_point(f: &SampledFunction, y: &Vector, epsilon: f64, lambda: f64) -> Result<BpPoint> {
    check_positive("epsilon", epsilon)?;
    check_positive("lambda", lambda)?;
    y.check_dim(f.dim())?;
    let grid = f.grid();
    let y_index = grid
        .locate(y)?
        .ok_or_else(|| Error::NotOnGrid(format!("{y} lies outside the grid box")))?;
    let fy = f
        .value(y_index)
        .finite()
        .ok_or_else(|| Error::Precondition(format!("{y} is not in dom f")))?;
    let (_, min) = f.min();
    if fy > min + epsilon + DEFAULT_TOL * (1.0 + min.abs()) {
        return Err(Error::Precondition(format!(
            "f({y}) = {fy} exceeds inf f + epsilon = {}",
            min + epsilon
        )));
    }
    let kappa = epsilon / (lambda * lambda);
    let y_s = grid.point(y_index);
    let within = |i: usize| dist_sq(grid.point(i), y_s).sqrt() <= lambda;

    let mut total_iterations = 0;
    let mut penalty = kappa;
    for restarts in 0..=BP_RESTARTS {
        let (z, it) = proximal_fixed_point(f, penalty, y_index);
        total_iterations += it;
        if within(z) && penalized_minimum(f, kappa, z) {
            return Ok(BpPoint {
                z: grid.point_vector(z),
                z_index: z,
                route: BpRoute::FixedPoint { restarts },
                iterations: total_iterations,
            });
        }
        penalty *= 2.0;
    }

    let mut candidates: Vec<(f64, usize)> = f
        .domain()
        .filter(|(i, _, _)| within(*i))
        .map(|(i, _, v)| (v, i))
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for (_, i) in candidates {
        if penalized_minimum(f, kappa, i) {
            return Ok(BpPoint {
                z: grid.point_vector(i),
                z_index: i,
                route: BpRoute::Scan,
                iterations: total_iterations,
            });
        }
    }
    Err(Error::NoAdmissiblePoint(format!(
        "no grid point within {lambda} of {y} satisfies f(z) <= f(x) + {kappa}|x - z|^2 for all x"
    )))
}

/// [`borwein_preiss_point`] returning only the point.
pub fn borwein_preiss(f: &SampledFunction, y: &Vector, epsilon: f64, lambda: f64) -> Result<Vector> {
    Ok(borwein_preiss_point(f, y, epsilon, lambda)?.z)
}

/// Certified coefficient drift of a Brønsted–Rockafellar perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct BRBounds {
    /// `‖y - ȳ‖`.
    pub dist: f64,
    /// `‖ℓ - ℓ̄‖`.
    pub slope_change: f64,
    /// `(2ε/λ²)(λ + ‖y‖)`.
    pub slope_bound: f64,
    /// `ā - a`.
    pub curv_change: f64,
    /// `ε/λ²`.
    pub curv_target: f64,
    /// `c - c̄`.
    pub offset_change: f64,
    /// `(ε/λ²)‖ȳ‖²`.
    pub offset_bound: f64,
}

/// How the perturbation center was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrRoute {
    /// Penalty centred at the Borwein–Preiss point `ȳ` itself.
    ClosedForm,
    /// Penalty centred at another grid point; used when no Borwein–Preiss
    /// point lies within `λ` of `y`.
    ShiftedCenter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BRResult {
    pub y_bar: Vector,
    pub phi_bar: QuadMinorant,
    /// The ε-subgradient the perturbation starts from: the input itself when it
    /// lies in `supp f`, otherwise its normalized shift.
    pub phi_base: QuadMinorant,
    /// Center `v` of the penalty `-(ε/λ²)‖x - v‖²`.
    pub center: Vector,
    pub route: BrRoute,
    pub bounds: BRBounds,
}

fn check_bounds(b: &BRBounds, lambda: f64) -> Result<()> {
    let mut bad = Vec::new();
    if b.dist > lambda * (1.0 + 1e-12) {
        bad.push(format!("dist {} > lambda {lambda}", b.dist));
    }
    if b.slope_change > b.slope_bound + 1e-9 {
        bad.push(format!("slope change {} > {}", b.slope_change, b.slope_bound));
    }
    if (b.curv_change - b.curv_target).abs() > 1e-12 {
        bad.push(format!("curvature change {} != {}", b.curv_change, b.curv_target));
    }
    if b.offset_change > b.offset_bound + 1e-9 {
        bad.push(format!("offset change {} > {}", b.offset_change, b.offset_bound));
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::VerificationFailed(bad.join("; ")))
    }
}

/// `base - κ‖x - v‖² + d`, with `d` chosen so the result touches `f` at `z`.
fn perturb(
    f: &SampledFunction,
    base: &QuadMinorant,
    kappa: f64,
    v: &[f64],
    z_index: usize,
) -> Result<QuadMinorant> {
    let z = f.grid().point(z_index);
    let fz = f.value(z_index).finite().ok_or(Error::Improper)?;
    let slack = fz - base.eval_slice(z);
    let slope: Vec<f64> = base
        .slope()
        .as_slice()
        .iter()
        .zip(v)
        .map(|(l, vi)| l + 2.0 * kappa * vi)
        .collect();
    let offset = base.offset() - kappa * norm_sq(v) + slack + kappa * dist_sq(z, v);
    QuadMinorant::new(base.curvature() + kappa, Vector::new(slope)?, offset)
}

/// Assembles and verifies a candidate; the inner error names the failed check.
#[allow(clippy::too_many_arguments)]
fn certify(
    f: &SampledFunction,
    base: &QuadMinorant,
    y: &[f64],
    epsilon: f64,
    lambda: f64,
    v: &[f64],
    z_index: usize,
    route: BrRoute,
) -> Result<std::result::Result<BRResult, Error>> {
    let kappa = epsilon / (lambda * lambda);
    let phi_bar = perturb(f, base, kappa, v, z_index)?;
    let z = f.grid().point_vector(z_index);
    let slope_change = phi_bar.slope().sub(base.slope()).norm();
    let bounds = BRBounds {
        dist: dist_sq(y, z.as_slice()).sqrt(),
        slope_change,
        slope_bound: 2.0 * kappa * (lambda + norm_sq(y).sqrt()),
        curv_change: phi_bar.curvature() - base.curvature(),
        curv_target: kappa,
        offset_change: base.offset() - phi_bar.offset(),
        offset_bound: kappa * z.norm_sq(),
    };
    if let Err(e) = check_bounds(&bounds, lambda) {
        return Ok(Err(e));
    }
    let q = SubdiffQuery::at_index(f, z_index, 0.0, DEFAULT_TOL)?;
    if !subdiff_membership(&q, &phi_bar)? {
        return Ok(Err(Error::VerificationFailed(format!(
            "{phi_bar} is not a subgradient at {z}"
        ))));
    }
    Ok(Ok(BRResult {
        y_bar: z,
        phi_bar,
        phi_base: base.clone(),
        center: Vector::from_slice_unchecked(v),
        route,
        bounds,
    }))
}

/// Trades an ε-subgradient at `y` for an exact subgradient at a nearby `ȳ`.
///
/// With `W = f + a‖·‖² - ⟨ℓ, ·⟩` and a Borwein–Preiss point `ȳ` of `W`, the
/// perturbation `φ̄ = φ - (ε/λ²)‖· - ȳ‖² + f(ȳ) - φ(ȳ)` touches `f` at `ȳ`.
/// All drift bounds and the subgradient property are verified before
/// returning.
pub fn bronsted_rockafellar(
    f: &SampledFunction,
    y: &Vector,
    phi: &QuadMinorant,
    epsilon: f64,
    lambda: f64,
) -> Result<BRResult> {
    check_positive("epsilon", epsilon)?;
    check_positive("lambda", lambda)?;
    let q = SubdiffQuery::new(f, y, epsilon, DEFAULT_TOL)?;
    if !subdiff_membership(&q, phi)? {
        return Err(Error::Precondition(format!(
            "{phi} is not an {epsilon}-subgradient at {y}"
        )));
    }
    let base = if support_membership(f, phi, DEFAULT_TOL)?.member {
        phi.clone()
    } else {
        normalized_shift(&q, phi)
    };
    let w = f.map_finite(|x, v| v - base.eval_slice(x) + base.offset())?;
    let kappa = epsilon / (lambda * lambda);
    let y_s = f.grid().point(q.x_index()).to_vec();

    let last_failure: Option<Error>;
    match borwein_preiss_point(&w, y, epsilon, lambda) {
        Ok(bp) => {
            let z = f.grid().point(bp.z_index).to_vec();
            match certify(f, &base, &y_s, epsilon, lambda, &z, bp.z_index, BrRoute::ClosedForm)? {
                Ok(r) => return Ok(r),
                Err(e) => last_failure = Some(e),
            }
        }
        Err(Error::NoAdmissiblePoint(msg)) => last_failure = Some(Error::NoAdmissiblePoint(msg)),
        Err(e) => return Err(e),
    }

    let grid = f.grid();
    let reach = lambda + norm_sq(&y_s).sqrt();
    let mut centers: Vec<(f64, usize)> = (0..grid.len())
        .filter(|&i| norm_sq(grid.point(i)).sqrt() <= reach)
        .map(|i| (dist_sq(grid.point(i), &y_s), i))
        .collect();
    centers.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for (_, vi) in centers {
        let v = grid.point(vi);
        let (z_index, _) = prox_argmin(&w, kappa, v);
        if dist_sq(grid.point(z_index), &y_s).sqrt() > lambda {
            continue;
        }
        if let Ok(r) = certify(f, &base, &y_s, epsilon, lambda, v, z_index, BrRoute::ShiftedCenter)? {
            return Ok(r);
        }
    }
    Err(Error::NoAdmissiblePoint(format!(
        "no perturbation of {phi} at {y} meets all drift bounds with lambda {lambda} ({})",
        last_failure.map_or_else(String::new, |e| e.to_string())
    )))
}

/// `1 + sqrt(1 + 2‖x‖ + γ + ‖x‖²/γ)`.
pub fn transfer_lambda(x_norm: f64, gamma: f64) -> f64 {
    1.0 + (1.0 + 2.0 * x_norm + gamma + x_norm * x_norm / gamma).sqrt()
}

/// One leg of the transfer: ε-subgradient, then exact subgradient nearby.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferLeg {
    pub eps: EpsSubgradient,
    pub lambda: f64,
    pub br: BRResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferResult {
    pub epsilon: f64,
    pub level: f64,
    pub gamma: f64,
    pub leg1: TransferLeg,
    pub leg2: TransferLeg,
    pub decision: IPDecision,
}

fn transfer_leg(f: &SampledFunction, phi: &QuadMinorant, epsilon: f64, gamma: f64) -> Result<TransferLeg> {
    let eps = eps_subgradient_from_support(f, phi, epsilon)?;
    let lambda = transfer_lambda(eps.x1.norm(), gamma);
    let br = bronsted_rockafellar(f, &eps.x1, &eps.phi_bar, epsilon, lambda)?;
    Ok(TransferLeg { eps, lambda, br })
}

/// From support members with the intersection property on the whole space at
/// `α`, builds exact subgradients whose strict sublevel sets at `α - η` are
/// disjoint inside the ball `‖x‖ <= γ`.
///
/// Uses `ε = η/γ` and `λᵢ = 1 + sqrt(1 + 2‖xᵢ‖ + γ + ‖xᵢ‖²/γ)`. A `Fails`
/// verdict on the ball is reported as [`Error::TheoremViolation`].
pub fn ip_transfer_to_ball(
    f: &SampledFunction,
    g: &SampledFunction,
    phi1: &QuadMinorant,
    phi2: &QuadMinorant,
    alpha: f64,
    gamma: f64,
    eta: f64,
) -> Result<TransferResult> {
    check_positive("gamma", gamma)?;
    check_positive("eta", eta)?;
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: g.dim(),
        });
    }
    for (h, phi) in [(f, phi1), (g, phi2)] {
        if !support_membership(h, phi, DEFAULT_TOL)?.member {
            return Err(Error::Precondition(format!("{phi} is not a support member")));
        }
    }
    let full = ip_decide_fullspace(phi1, phi2, alpha, f.dim())?;
    if full.verdict != Verdict::Holds {
        return Err(Error::Precondition(format!(
            "{phi1} and {phi2} do not have the intersection property at level {alpha}"
        )));
    }
    let epsilon = eta / gamma;
    let (leg1, leg2) = rayon::join(
        || transfer_leg(f, phi1, epsilon, gamma),
        || transfer_leg(g, phi2, epsilon, gamma),
    );
    let (leg1, leg2) = (leg1?, leg2?);
    let level = alpha - eta;
    let decision = ip_decide_ball(&leg1.br.phi_bar, &leg2.br.phi_bar, level, gamma, DEFAULT_BALL_MARGIN)?;
    if decision.verdict == Verdict::Fails {
        return Err(Error::TheoremViolation(format!(
            "transferred subgradients {} and {} intersect inside the ball of radius {gamma} at level {level}",
            leg1.br.phi_bar, leg2.br.phi_bar
        )));
    }
    Ok(TransferResult {
        epsilon,
        level,
        gamma,
        leg1,
        leg2,
        decision,
    })
}

/// Values of `f` shifted by a minorant, `f - φ`, kept for diagnostics.
pub fn slack_function(f: &SampledFunction, phi: &QuadMinorant) -> Result<SampledFunction> {
    phi.slope().check_dim(f.dim())?;
    f.map_finite(|x, v| v - phi.eval_slice(x))
}
