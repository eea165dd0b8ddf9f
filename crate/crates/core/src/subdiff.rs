//! Φ-subdifferential and Φ-ε-subdifferential membership and search.
//!
//! The ε-subgradient inequality `φ(x) - φ(x̄) - ε <= f(x) - f(x̄)` does not see
//! vertical shifts of `φ`. Its support-set form therefore applies to the
//! normalized minorant `φ - φ(x̄) + f(x̄) - ε`, which touches `f` at `x̄` with
//! gap exactly `ε`.

use crate::error::{Error, Result};
use crate::primitives::{
    support_membership, QuadMinorant, SampledFunction, Vector, DEFAULT_TOL,
};
use crate::support::MinorantDictionary;

/// A point `x̄` of `dom f` together with the slack `ε` and a comparison tolerance.
#[derive(Debug, Clone, Copy)]
pub struct SubdiffQuery<'a> {
    f: &'a SampledFunction,
    x_index: usize,
    f_at: f64,
    epsilon: f64,
    tol: f64,
}

impl<'a> SubdiffQuery<'a> {
    pub fn new(f: &'a SampledFunction, x_bar: &Vector, epsilon: f64, tol: f64) -> Result<Self> {
        x_bar.check_dim(f.dim())?;
        let x_index = f.grid().locate(x_bar)?.ok_or_else(|| {
            Error::NotOnGrid(format!("{x_bar} lies outside the grid box"))
        })?;
        Self::at_index(f, x_index, epsilon, tol)
    }

    pub fn at_index(f: &'a SampledFunction, x_index: usize, epsilon: f64, tol: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::InvalidInput(format!("epsilon {epsilon} must be >= 0")));
        }
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(Error::InvalidInput(format!("tolerance {tol} must be >= 0")));
        }
        if x_index >= f.len() {
            return Err(Error::InvalidInput(format!("grid index {x_index} out of range")));
        }
        let f_at = f.value(x_index).finite().ok_or_else(|| {
            Error::Precondition(format!(
                "{} is not in dom f",
                f.grid().point_vector(x_index)
            ))
        })?;
        Ok(SubdiffQuery {
            f,
            x_index,
            f_at,
            epsilon,
            tol,
        })
    }

    pub fn function(&self) -> &'a SampledFunction {
        self.f
    }

    pub fn x_bar(&self) -> Vector {
        self.f.grid().point_vector(self.x_index)
    }

    pub fn x_index(&self) -> usize {
        self.x_index
    }

    pub fn f_at(&self) -> f64 {
        self.f_at
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    fn phi_at(&self, phi: &QuadMinorant) -> f64 {
        phi.eval_slice(self.f.grid().point(self.x_index))
    }
}

/// Outcome of both membership tests for one candidate minorant.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport {
    pub member: bool,
    /// `min_x [f(x) - f(x̄)] - [φ(x) - φ(x̄)] + ε` over `dom f`.
    pub definitional_margin: f64,
    /// `φ - φ(x̄) + f(x̄) - ε`, the support-set representative of `φ`.
    pub normalized: QuadMinorant,
    /// Smallest slack of `normalized` against `f`.
    pub normalized_min_slack: f64,
    /// `φ` itself lies in `supp f` and `|f(x̄) - φ(x̄) - ε| <= tol`.
    pub literal_characterization: bool,
}

fn definitional_margin(q: &SubdiffQuery<'_>, phi: &QuadMinorant) -> f64 {
    let phi_x = q.phi_at(phi);
    q.f.domain()
        .map(|(_, x, v)| (v - q.f_at) - (phi.eval_slice(x) - phi_x) + q.epsilon)
        .fold(f64::INFINITY, f64::min)
}

/// `φ(x) - φ(x̄) - ε <= f(x) - f(x̄) + tol` for every grid point of `dom f`.
pub fn definitional_test(q: &SubdiffQuery<'_>, phi: &QuadMinorant) -> Result<bool> {
    phi.slope().check_dim(q.f.dim())?;
    Ok(definitional_margin(q, phi) >= -q.tol)
}

/// The support-set form: `φ ∈ supp f` and `f(x̄) = φ(x̄) + ε` within `tol`.
pub fn characterization_test(q: &SubdiffQuery<'_>, phi: &QuadMinorant) -> Result<bool> {
    let rep = support_membership(q.f, phi, q.tol)?;
    Ok(rep.member && (q.f_at - q.phi_at(phi) - q.epsilon).abs() <= q.tol)
}

/// The unique vertical shift of `φ` with `f(x̄) = φ(x̄) + ε`.
pub fn normalized_shift(q: &SubdiffQuery<'_>, phi: &QuadMinorant) -> QuadMinorant {
    phi.shift(q.f_at - q.epsilon - q.phi_at(phi))
}

/// Runs both tests and cross-checks them; see [`subdiff_membership`].
pub fn membership_report(q: &SubdiffQuery<'_>, phi: &QuadMinorant) -> Result<MembershipReport> {
    phi.slope().check_dim(q.f.dim())?;
    let margin = definitional_margin(q, phi);
    let by_definition = margin >= -q.tol;

    let normalized = normalized_shift(q, phi);
    let rep = support_membership(q.f, &normalized, q.tol)?;
    let touch_gap = (q.f_at - q.phi_at(&normalized) - q.epsilon).abs();
    let by_characterization = rep.member && touch_gap <= q.tol;

    // Both margins are the same quantity computed in two orders; they may only
    // disagree about the tolerance boundary through rounding.
    let scale = 1.0 + q.f_at.abs() + q.phi_at(phi).abs() + q.epsilon;
    let rounding = 64.0 * f64::EPSILON * scale;
    if by_definition != by_characterization
        && ((margin - rep.min_slack).abs() > rounding || touch_gap > q.tol)
    {
        return Err(Error::InternalConsistency(format!(
            "membership tests disagree for {phi} at {}: definitional margin {margin}, \
             normalized slack {}",
            q.x_bar(),
            rep.min_slack
        )));
    }

    let literal = characterization_test(q, phi)?;
    if literal && !by_definition {
        return Err(Error::InternalConsistency(format!(
            "{phi} is a touching support member at {} but fails the subgradient inequality",
            q.x_bar()
        )));
    }

    Ok(MembershipReport {
        member: by_characterization,
        definitional_margin: margin,
        normalized,
        normalized_min_slack: rep.min_slack,
        literal_characterization: literal,
    })
}

/// Whether `φ ∈ ∂^ε_Φ f(x̄)`.
///
/// The definitional inequality and the support-set characterization (applied to
/// the normalized shift of `φ`) are both evaluated; a disagreement beyond
/// rounding is reported as [`Error::InternalConsistency`].
pub fn subdiff_membership(q: &SubdiffQuery<'_>, phi: &QuadMinorant) -> Result<bool> {
    Ok(membership_report(q, phi)?.member)
}

/// ε-subgradient obtained by lifting a support member to its tight offset.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsSubgradient {
    pub x1: Vector,
    pub x1_index: usize,
    /// Smallest slack `inf f - φ`.
    pub c1: f64,
    pub phi_bar: QuadMinorant,
}

/// Lifts `φ ∈ supp f` by its smallest slack `c₁`; the lifted minorant is an
/// ε-subgradient at the (first) grid point achieving that slack.
pub fn eps_subgradient_from_support(
    f: &SampledFunction,
    phi: &QuadMinorant,
    epsilon: f64,
) -> Result<EpsSubgradient> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon {epsilon} must be > 0")));
    }
    let rep = support_membership(f, phi, DEFAULT_TOL)?;
    if !rep.member {
        return Err(Error::Precondition(format!(
            "{phi} is not in supp f (min slack {})",
            rep.min_slack
        )));
    }
    let c1 = rep.min_slack;
    let x1_index = rep.argmin_index;
    let slack = f.value(x1_index).finite().ok_or(Error::Improper)? - phi.eval_slice(f.grid().point(x1_index));
    if slack.is_nan() || slack >= c1 + epsilon {
        return Err(Error::NoAdmissiblePoint(format!(
            "no grid point has slack below {}",
            c1 + epsilon
        )));
    }
    let phi_bar = phi.shift(c1);
    let q = SubdiffQuery::at_index(f, x1_index, epsilon, DEFAULT_TOL)?;
    if !subdiff_membership(&q, &phi_bar)? {
        return Err(Error::VerificationFailed(format!(
            "lifted minorant {phi_bar} is not an {epsilon}-subgradient at {}",
            rep.argmin
        )));
    }
    Ok(EpsSubgradient {
        x1: rep.argmin,
        x1_index,
        c1,
        phi_bar,
    })
}

/// Exact subgradients at `x̄` among the dictionary directions, in dictionary order.
///
/// For each `(a, l)` the offset is forced so that the candidate touches `f` at
/// `x̄`; the candidate is kept iff it minorizes `f` within [`DEFAULT_TOL`].
pub fn subgradient_search(
    f: &SampledFunction,
    x_bar: &Vector,
    dict: &MinorantDictionary,
) -> Result<Vec<QuadMinorant>> {
    let q = SubdiffQuery::new(f, x_bar, 0.0, DEFAULT_TOL)?;
    search_at(&q, dict, usize::MAX)
}

fn search_at(q: &SubdiffQuery<'_>, dict: &MinorantDictionary, limit: usize) -> Result<Vec<QuadMinorant>> {
    if dict.dim() != q.f.dim() {
        return Err(Error::DimensionMismatch {
            expected: q.f.dim(),
            got: dict.dim(),
        });
    }
    let x = q.f.grid().point(q.x_index);
    let nx = crate::primitives::norm_sq(x);
    let mut out: Vec<QuadMinorant> = Vec::new();
    for (a, l) in dict.pairs() {
        let c = q.f_at + a * nx - crate::primitives::dot(l.as_slice(), x);
        let phi = QuadMinorant::new(a, l.clone(), c)?;
        if !support_membership(q.f, &phi, q.tol)?.member {
            continue;
        }
        if out.iter().any(|p| p.approx_eq(&phi, 1e-12)) {
            continue;
        }
        out.push(phi);
        if out.len() >= limit {
            break;
        }
    }
    Ok(out)
}

/// Grid points of `dom f` at which [`subgradient_search`] finds a subgradient.
pub fn subdiff_domain(f: &SampledFunction, dict: &MinorantDictionary) -> Result<Vec<Vector>> {
    use rayon::prelude::*;
    let idx: Vec<usize> = f.domain().map(|(i, _, _)| i).collect();
    let hits: Vec<Option<Vector>> = idx
        .par_iter()
        .map(|&i| {
            let q = SubdiffQuery::at_index(f, i, 0.0, DEFAULT_TOL)?;
            Ok((!search_at(&q, dict, 1)?.is_empty()).then(|| f.grid().point_vector(i)))
        })
        .collect::<Result<_>>()?;
    Ok(hits.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::primitives::Grid;

    fn s(x: f64) -> Vector {
        Vector::scalar(x).unwrap()
    }

    fn sampled(lo: f64, hi: f64, step: f64, f: impl Fn(f64) -> f64) -> SampledFunction {
        let g = Arc::new(Grid::cube(1, lo, hi, step).unwrap());
        SampledFunction::from_real_fn(g, |x| f(x[0])).unwrap()
    }

    #[test]
    fn membership_examples() {
        let sq = sampled(-2.0, 2.0, 0.01, |x| x * x);
        let zero = QuadMinorant::constant(1, 0.0).unwrap();
        let q = SubdiffQuery::new(&sq, &s(0.0), 0.0, DEFAULT_TOL).unwrap();
        assert!(subdiff_membership(&q, &zero).unwrap());
        let q = SubdiffQuery::new(&sq, &s(1.0), 1.0, DEFAULT_TOL).unwrap();
        let rep = membership_report(&q, &zero).unwrap();
        assert!(rep.member && rep.literal_characterization);

        let exp = sampled(-10.0, 10.0, 0.01, f64::exp2);
        for xb in [-3.0, 0.0, 4.5] {
            let q = SubdiffQuery::new(&exp, &s(xb), 0.0, DEFAULT_TOL).unwrap();
            let phi = QuadMinorant::constant(1, q.f_at()).unwrap();
            assert!(!subdiff_membership(&q, &phi).unwrap());
        }
    }

    #[test]
    fn membership_ignores_vertical_shift() {
        let sq = sampled(-2.0, 2.0, 0.05, |x| x * x);
        let q = SubdiffQuery::new(&sq, &s(1.0), 0.0, DEFAULT_TOL).unwrap();
        let tangent = QuadMinorant::affine(s(2.0), -1.0).unwrap();
        for delta in [-3.0, 0.0, 2.5] {
            let rep = membership_report(&q, &tangent.shift(delta)).unwrap();
            assert!(rep.member);
            assert_eq!(rep.literal_characterization, delta == 0.0);
        }
    }

    #[test]
    fn rejects_points_off_grid_or_outside_domain() {
        let sq = sampled(-2.0, 2.0, 0.5, |x| x * x);
        assert!(matches!(
            SubdiffQuery::new(&sq, &s(0.3), 0.0, 1e-9),
            Err(Error::NotOnGrid(_))
        ));
        let g = Arc::new(Grid::cube(1, -1.0, 1.0, 0.5).unwrap());
        let f = SampledFunction::from_real_fn(g, |x| {
            if x[0] < 0.0 { f64::INFINITY } else { x[0] }
        })
        .unwrap();
        assert!(matches!(
            SubdiffQuery::new(&f, &s(-0.5), 0.0, 1e-9),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn eps_subgradient_examples() {
        let sq = sampled(-2.0, 2.0, 0.01, |x| x * x);
        let out = eps_subgradient_from_support(&sq, &QuadMinorant::constant(1, -1.0).unwrap(), 0.5).unwrap();
        assert_eq!(out.c1, 1.0);
        assert_eq!(out.x1.as_slice(), &[0.0]);
        assert_eq!(out.phi_bar, QuadMinorant::constant(1, 0.0).unwrap());

        let exp = sampled(-10.0, 10.0, 0.01, f64::exp2);
        let out = eps_subgradient_from_support(&exp, &QuadMinorant::constant(1, 0.0).unwrap(), 0.01).unwrap();
        assert_eq!(out.x1.as_slice(), &[-10.0]);
        assert_eq!(out.phi_bar.offset(), (-10.0f64).exp2());

        let g = Arc::new(Grid::cube(1, -2.0, 2.0, 0.1).unwrap());
        let own = QuadMinorant::new(0.5, s(1.0), 2.0).unwrap();
        let f = SampledFunction::from_real_fn(g, |x| own.eval_slice(x)).unwrap();
        let out = eps_subgradient_from_support(&f, &own, 0.3).unwrap();
        assert_eq!(out.c1, 0.0);
        assert_eq!(out.phi_bar, own);
    }

    #[test]
    fn eps_subgradient_requires_support_member() {
        let sq = sampled(-1.0, 1.0, 0.1, |x| x * x);
        let bad = QuadMinorant::constant(1, 0.5).unwrap();
        assert!(matches!(
            eps_subgradient_from_support(&sq, &bad, 0.1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn subgradient_search_examples() {
        let sq = sampled(-2.0, 2.0, 0.01, |x| x * x);
        let dict = MinorantDictionary::new(vec![0.0], vec![s(0.0)]).unwrap();
        let found = subgradient_search(&sq, &s(0.0), &dict).unwrap();
        assert_eq!(found, vec![QuadMinorant::constant(1, 0.0).unwrap()]);

        let exp = sampled(-10.0, 10.0, 0.01, f64::exp2);
        let ln2 = std::f64::consts::LN_2;
        let dict = MinorantDictionary::new(vec![0.0, 1.0], vec![s(0.0), s(ln2)]).unwrap();
        let found = subgradient_search(&exp, &s(0.0), &dict).unwrap();
        let target = QuadMinorant::new(1.0, s(ln2), 1.0).unwrap();
        assert!(found.iter().any(|p| p.approx_eq(&target, 1e-12)));

        let tent = sampled(-10.0, 10.0, 0.01, |x| -x.abs() + 2.0);
        let dict = MinorantDictionary::lattice(vec![0.0], &[3.0], 0.25).unwrap();
        assert!(subgradient_search(&tent, &s(0.0), &dict).unwrap().is_empty());
    }

    #[test]
    fn subdiff_domain_excludes_spike() {
        let g = Arc::new(Grid::cube(1, -1.0, 1.0, 0.1).unwrap());
        let base = SampledFunction::from_real_fn(g.clone(), |x| x[0] * x[0]).unwrap();
        let mut values = base.values().to_vec();
        values[7] = values[7] + 0.5;
        let spiked = SampledFunction::from_values(g, values).unwrap();
        let dict = MinorantDictionary::default_for(&spiked).unwrap();
        let dom = subdiff_domain(&spiked, &dict).unwrap();
        let spike = spiked.grid().point_vector(7);
        assert!(!dom.contains(&spike));
        assert!(dom.len() >= 15);

        let full = subdiff_domain(&base, &MinorantDictionary::default_for(&base).unwrap()).unwrap();
        assert_eq!(full.len(), base.len());
    }
}
