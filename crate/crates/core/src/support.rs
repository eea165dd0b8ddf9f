//! Support sets, tight offsets and Φ-envelopes over a finite minorant dictionary.
//!
//! The largest offset `c` for which `-a‖x‖² + ⟨l, x⟩ + c` stays below `f` is
//! `inf_x f(x) + a‖x‖² - ⟨l, x⟩`; the envelope is the pointwise maximum of
//! these tight minorants over the dictionary. All completeness statements
//! (gap ≈ 0, envelope = f) are relative to the dictionary in use.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::primitives::{argmin_first, dot, norm_sq, ExtReal, QuadMinorant, SampledFunction, Vector};

/// Upper bound on dictionary slopes produced by [`MinorantDictionary::default_for`].
pub const MAX_DEFAULT_SLOPES: usize = 4096;

/// Finite stand-in for the index set `(a, l)` of the minorant class.
#[derive(Debug, Clone, PartialEq)]
pub struct MinorantDictionary {
    curvatures: Vec<f64>,
    slopes: Vec<Vector>,
}

impl MinorantDictionary {
    pub fn new(curvatures: Vec<f64>, slopes: Vec<Vector>) -> Result<Self> {
        if curvatures.is_empty() || slopes.is_empty() {
            return Err(Error::InvalidInput("dictionary must be non-empty".into()));
        }
        if curvatures.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::InvalidInput("curvatures must be finite and >= 0".into()));
        }
        if curvatures.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("curvatures must be strictly ascending".into()));
        }
        if curvatures[0] != 0.0 {
            return Err(Error::InvalidInput("dictionary must contain curvature 0".into()));
        }
        let n = slopes[0].dim();
        for s in &slopes {
            s.check_dim(n)?;
        }
        if !slopes.iter().any(Vector::is_zero) {
            return Err(Error::InvalidInput("dictionary must contain slope 0".into()));
        }
        Ok(MinorantDictionary { curvatures, slopes })
    }

    /// Slopes on the lattice `step·Z^n` inside `[-bound_d, bound_d]` per axis.
    pub fn lattice(curvatures: Vec<f64>, bounds: &[f64], step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidInput(format!("slope step {step} must be > 0")));
        }
        let n = bounds.len();
        let per_axis: Vec<Vec<f64>> = bounds
            .iter()
            .map(|&b| {
                let k = (b.abs() / step + 1e-9).floor() as i64;
                (-k..=k).map(|j| j as f64 * step).collect()
            })
            .collect();
        let mut slopes = vec![Vec::with_capacity(n)];
        for axis in &per_axis {
            slopes = slopes
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |&s| {
                        let mut p = prefix.clone();
                        p.push(s);
                        p
                    })
                })
                .collect();
        }
        let slopes = slopes.into_iter().map(Vector::new).collect::<Result<Vec<_>>>()?;
        Self::new(curvatures, slopes)
    }

    /// Curvatures `{0, 0.25, …, 4}` and a slope lattice of step 0.25.
    ///
    /// A member `-a‖x‖² + ⟨l, x⟩ + c` touching `f` at `x₀` has `l ≈ ∇f(x₀) + 2a·x₀`,
    /// so per axis the lattice covers the finite-difference bound plus
    /// `2·a_max·max|x_d|`. The lattice step is doubled until at most
    /// [`MAX_DEFAULT_SLOPES`] slopes remain.
    pub fn default_for(f: &SampledFunction) -> Result<Self> {
        let curvatures: Vec<f64> = (0..=16).map(|i| i as f64 * 0.25).collect();
        let a_max = 4.0;
        let grid = f.grid();
        let bounds: Vec<f64> = finite_difference_bounds(f)
            .iter()
            .enumerate()
            .map(|(d, b)| b + 2.0 * a_max * grid.low()[d].abs().max(grid.high()[d].abs()))
            .collect();
        let mut step = 0.25;
        loop {
            let count: f64 = bounds
                .iter()
                .map(|b| 2.0 * (b / step + 1e-9).floor() + 1.0)
                .product();
            if count <= MAX_DEFAULT_SLOPES as f64 {
                break;
            }
            step *= 2.0;
        }
        let bounds: Vec<f64> = bounds.iter().map(|b| (b / step).ceil() * step).collect();
        Self::lattice(curvatures, &bounds, step)
    }

    pub fn curvatures(&self) -> &[f64] {
        &self.curvatures
    }

    pub fn slopes(&self) -> &[Vector] {
        &self.slopes
    }

    pub fn dim(&self) -> usize {
        self.slopes[0].dim()
    }

    pub fn len(&self) -> usize {
        self.curvatures.len() * self.slopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All `(a, l)` pairs, curvature-major, in dictionary order.
    pub fn pairs(&self) -> impl Iterator<Item = (f64, &Vector)> + '_ {
        self.curvatures
            .iter()
            .flat_map(move |&a| self.slopes.iter().map(move |l| (a, l)))
    }

    /// Union of two dictionaries (sorted curvatures, deduplicated slopes).
    pub fn merged(&self, other: &MinorantDictionary) -> Result<Self> {
        let mut curvatures: Vec<f64> = self.curvatures.iter().chain(&other.curvatures).copied().collect();
        curvatures.sort_by(f64::total_cmp);
        curvatures.dedup();
        let mut slopes = self.slopes.clone();
        for s in &other.slopes {
            if !slopes.contains(s) {
                slopes.push(s.clone());
            }
        }
        Self::new(curvatures, slopes)
    }
}

/// Per-axis maximum of `|Δf| / step` over neighbouring finite grid values.
pub fn finite_difference_bounds(f: &SampledFunction) -> Vec<f64> {
    let grid = f.grid();
    let n = grid.dim();
    let mut bounds = vec![0.0f64; n];
    for d in 0..n {
        let mut off = vec![0isize; n];
        off[d] = 1;
        for (i, _, v) in f.domain() {
            if let Some(j) = grid.offset(i, &off) {
                if let ExtReal::Finite(w) = f.value(j) {
                    bounds[d] = bounds[d].max((w - v).abs() / grid.step());
                }
            }
        }
    }
    bounds
}

/// Largest finite-difference slope of `f` over all axes.
pub fn lipschitz_estimate(f: &SampledFunction) -> f64 {
    finite_difference_bounds(f).into_iter().fold(0.0, f64::max)
}

/// Grid-resolution tolerance `max(1e-9, L · step)` for envelope comparisons.
pub fn envelope_tolerance(f: &SampledFunction) -> f64 {
    (lipschitz_estimate(f) * f.grid().step()).max(1e-9)
}

/// Largest admissible offset for a given `(a, l)` and where it is attained.
#[derive(Debug, Clone, PartialEq)]
pub struct TightOffset {
    pub c_star: f64,
    pub argmin: Vector,
    pub argmin_index: usize,
}

impl TightOffset {
    pub fn minorant(&self, a: f64, l: &Vector) -> Result<QuadMinorant> {
        QuadMinorant::new(a, l.clone(), self.c_star)
    }
}

/// `c* = min_x f(x) + a‖x‖² - ⟨l, x⟩` over the grid; ties go to the first grid point.
pub fn tight_offset(f: &SampledFunction, a: f64, l: &Vector) -> Result<TightOffset> {
    l.check_dim(f.dim())?;
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::InvalidInput(format!("curvature {a} must be >= 0")));
    }
    let ls = l.as_slice();
    let (i, c) = argmin_first(f.domain().map(|(i, x, v)| (i, v + a * norm_sq(x) - dot(ls, x))))
        .ok_or(Error::Improper)?;
    Ok(TightOffset {
        c_star: c,
        argmin: f.grid().point_vector(i),
        argmin_index: i,
    })
}

/// All tight minorants of `f` over the dictionary, in dictionary order.
pub fn tight_minorants(f: &SampledFunction, dict: &MinorantDictionary) -> Result<Vec<QuadMinorant>> {
    if dict.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: dict.dim(),
        });
    }
    let pairs: Vec<(f64, &Vector)> = dict.pairs().collect();
    pairs
        .par_iter()
        .map(|&(a, l)| tight_offset(f, a, l)?.minorant(a, l))
        .collect()
}

/// Pointwise supremum of the tight dictionary minorants of `f`.
pub fn envelope(f: &SampledFunction, dict: &MinorantDictionary) -> Result<SampledFunction> {
    let minorants = tight_minorants(f, dict)?;
    let grid = f.grid();
    let values: Vec<ExtReal> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            let best = minorants
                .iter()
                .map(|phi| phi.eval_slice(x))
                .fold(f64::NEG_INFINITY, f64::max);
            ExtReal::Finite(best)
        })
        .collect();
    SampledFunction::from_values(grid.clone(), values)
}

/// `sup_{x ∈ dom f} f(x) - envelope(f)(x)`; zero certifies Φ-convexity relative to `dict`.
pub fn phi_convexity_gap(f: &SampledFunction, dict: &MinorantDictionary) -> Result<f64> {
    let env = envelope(f, dict)?;
    Ok(gap_against(f, &env))
}

pub(crate) fn gap_against(f: &SampledFunction, env: &SampledFunction) -> f64 {
    f.domain()
        .map(|(i, _, v)| v - env.value(i).finite().unwrap_or(f64::NEG_INFINITY))
        .fold(0.0, f64::max)
}

/// True iff `phi_bar(x) < f(x)` at every grid point (strict, no tolerance).
pub fn exists_strict_minorant(f: &SampledFunction, phi_bar: &QuadMinorant) -> Result<bool> {
    phi_bar.slope().check_dim(f.dim())?;
    let grid = f.grid();
    Ok(f.values()
        .iter()
        .enumerate()
        .all(|(i, v)| match v {
            ExtReal::Finite(fv) => phi_bar.eval_slice(grid.point(i)) < *fv,
            ExtReal::PlusInfinity => true,
        }))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::primitives::{support_membership, Grid, DEFAULT_TOL};

    fn line(lo: f64, hi: f64, step: f64) -> Arc<Grid> {
        Arc::new(Grid::cube(1, lo, hi, step).unwrap())
    }

    fn s(x: f64) -> Vector {
        Vector::scalar(x).unwrap()
    }

    #[test]
    fn tight_offset_examples() {
        let sq = SampledFunction::from_real_fn(line(-2.0, 2.0, 0.01), |x| x[0] * x[0]).unwrap();
        let t = tight_offset(&sq, 0.0, &s(0.0)).unwrap();
        assert_eq!(t.c_star, 0.0);
        assert_eq!(t.argmin.as_slice(), &[0.0]);

        let t = tight_offset(&sq, 0.0, &s(2.0)).unwrap();
        assert!((t.c_star + 1.0).abs() < 1e-12);
        assert!((t.argmin[0] - 1.0).abs() < 1e-12);

        let exp = SampledFunction::from_real_fn(line(-10.0, 10.0, 0.01), |x| x[0].exp2()).unwrap();
        let t = tight_offset(&exp, 0.0, &s(0.0)).unwrap();
        assert_eq!(t.c_star, (-10.0f64).exp2());
        assert_eq!(t.argmin.as_slice(), &[-10.0]);
    }

    #[test]
    fn tight_minorants_are_members_and_maximal() {
        let g = line(-2.0, 2.0, 0.05);
        let f = SampledFunction::from_real_fn(g, |x| (x[0] - 0.3).abs() + x[0].sin()).unwrap();
        let dict = MinorantDictionary::lattice(vec![0.0, 0.5, 2.0], &[2.0], 0.5).unwrap();
        for phi in tight_minorants(&f, &dict).unwrap() {
            let rep = support_membership(&f, &phi, DEFAULT_TOL).unwrap();
            assert!(rep.member);
            assert!(rep.min_slack.abs() < 1e-12);
            assert!(!support_membership(&f, &phi.shift(1e-6), DEFAULT_TOL).unwrap().member);
        }
    }

    #[test]
    fn negative_square_is_its_own_envelope() {
        let g = Arc::new(Grid::cube(2, -2.0, 2.0, 0.25).unwrap());
        let f = SampledFunction::from_real_fn(g, |x| -(x[0] * x[0] + x[1] * x[1])).unwrap();
        let dict =
            MinorantDictionary::new(vec![0.0, 1.0], vec![Vector::zeros(2).unwrap()]).unwrap();
        let env = envelope(&f, &dict).unwrap();
        for (i, _, v) in f.domain() {
            assert_eq!(env.value(i), ExtReal::Finite(v));
        }
        assert_eq!(phi_convexity_gap(&f, &dict).unwrap(), 0.0);
    }

    #[test]
    fn spike_is_not_reached() {
        let g = line(-1.0, 1.0, 0.1);
        let base = SampledFunction::from_real_fn(g.clone(), |x| x[0] * x[0]).unwrap();
        let spike_at = 10;
        let mut values = base.values().to_vec();
        values[spike_at] = values[spike_at] + 1.0;
        let spiked = SampledFunction::from_values(g, values).unwrap();
        let dict = MinorantDictionary::default_for(&spiked).unwrap();
        let env = envelope(&spiked, &dict).unwrap();
        let f_spike = spiked.value(spike_at).finite().unwrap();
        let e_spike = env.value(spike_at).finite().unwrap();
        assert!(e_spike < f_spike - 0.5);
        for (i, _, v) in spiked.domain() {
            assert!(env.value(i).finite().unwrap() <= v + 1e-12);
        }
    }

    #[test]
    fn strict_minorant_examples() {
        let exp = SampledFunction::from_real_fn(line(-10.0, 10.0, 0.01), |x| x[0].exp2()).unwrap();
        assert!(exists_strict_minorant(&exp, &QuadMinorant::constant(1, -1.0).unwrap()).unwrap());

        let sq = SampledFunction::from_real_fn(line(-2.0, 2.0, 0.01), |x| x[0] * x[0]).unwrap();
        assert!(!exists_strict_minorant(&sq, &QuadMinorant::constant(1, 0.0).unwrap()).unwrap());

        let tent =
            SampledFunction::from_real_fn(line(-10.0, 10.0, 0.01), |x| -x[0].abs() + 2.0).unwrap();
        let phi = QuadMinorant::new(1.0, s(0.0), -1.0).unwrap();
        assert!(exists_strict_minorant(&tent, &phi).unwrap());
    }

    #[test]
    fn dictionary_validation() {
        assert!(MinorantDictionary::new(vec![0.5], vec![s(0.0)]).is_err());
        assert!(MinorantDictionary::new(vec![0.0], vec![s(1.0)]).is_err());
        assert!(MinorantDictionary::new(vec![0.0, 0.0], vec![s(0.0)]).is_err());
        let d = MinorantDictionary::lattice(vec![0.0, 1.0], &[1.0, 0.5], 0.5).unwrap();
        assert_eq!(d.slopes().len(), 5 * 3);
        assert_eq!(d.len(), 30);
    }

    #[test]
    fn default_dictionary_is_capped() {
        let exp = SampledFunction::from_real_fn(line(-10.0, 10.0, 0.01), |x| x[0].exp2()).unwrap();
        let d = MinorantDictionary::default_for(&exp).unwrap();
        assert!(d.slopes().len() <= MAX_DEFAULT_SLOPES);
        assert_eq!(d.curvatures().len(), 17);
    }
}
