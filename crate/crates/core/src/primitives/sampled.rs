use std::sync::Arc;

use super::ext_real::ExtReal;
use super::minorant::QuadMinorant;
use super::vector::Vector;
use crate::error::{Error, Result};

/// Default tolerance for support-set membership.
pub const DEFAULT_TOL: f64 = 1e-9;

const MAX_GRID_POINTS: usize = 4_000_000;

/// Uniform rectangular grid over a box, endpoints included.
///
/// Points are stored in row-major order with the last axis varying fastest, so
/// flat index order coincides with lexicographic order of the coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    low: Vector,
    high: Vector,
    step: f64,
    counts: Vec<usize>,
    axes: Vec<Vec<f64>>,
    points: Vec<f64>,
}

impl Grid {
    pub fn new(low: Vector, high: Vector, step: f64) -> Result<Self> {
        let n = low.dim();
        high.check_dim(n)?;
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidInput(format!("grid step {step} must be > 0")));
        }
        let mut counts = Vec::with_capacity(n);
        let mut axes = Vec::with_capacity(n);
        for d in 0..n {
            let (lo, hi) = (low[d], high[d]);
            if lo >= hi {
                return Err(Error::InvalidInput(format!(
                    "box axis {d}: low {lo} must be < high {hi}"
                )));
            }
            let cells = (hi - lo) / step;
            let rounded = cells.round();
            if (cells - rounded).abs() > 1e-6 * rounded.max(1.0) {
                return Err(Error::InvalidInput(format!(
                    "box axis {d}: width {} is not a multiple of step {step}",
                    hi - lo
                )));
            }
            let k = rounded as usize;
            let axis: Vec<f64> = (0..=k)
                .map(|i| if i == k { hi } else { lo + (hi - lo) * (i as f64) / (k as f64) })
                .collect();
            counts.push(k + 1);
            axes.push(axis);
        }
        let total = counts
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c))
            .filter(|&t| t <= MAX_GRID_POINTS)
            .ok_or_else(|| Error::InvalidInput(format!("grid too large: counts {counts:?}")))?;
        let mut points = Vec::with_capacity(total * n);
        let mut idx = vec![0usize; n];
        for _ in 0..total {
            for d in 0..n {
                points.push(axes[d][idx[d]]);
            }
            for d in (0..n).rev() {
                idx[d] += 1;
                if idx[d] < counts[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        Ok(Grid {
            low,
            high,
            step,
            counts,
            axes,
            points,
        })
    }

    /// Cube `[low, high]^n`.
    pub fn cube(n: usize, low: f64, high: f64, step: f64) -> Result<Self> {
        Self::new(Vector::new(vec![low; n])?, Vector::new(vec![high; n])?, step)
    }

    pub fn dim(&self) -> usize {
        self.low.dim()
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn low(&self) -> &Vector {
        &self.low
    }

    pub fn high(&self) -> &Vector {
        &self.high
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn axis(&self, d: usize) -> &[f64] {
        &self.axes[d]
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let n = self.dim();
        &self.points[i * n..(i + 1) * n]
    }

    pub fn point_vector(&self, i: usize) -> Vector {
        Vector::from_slice_unchecked(self.point(i))
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.dim())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .enumerate()
            .all(|(d, &c)| c >= self.low[d] && c <= self.high[d])
    }

    /// Multi-index of the flat index `i`.
    pub fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let n = self.dim();
        let mut out = vec![0; n];
        for d in (0..n).rev() {
            out[d] = i % self.counts[d];
            i /= self.counts[d];
        }
        out
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.counts)
            .fold(0, |acc, (&i, &c)| acc * c + i)
    }

    /// Flat index of the grid point `x + offset * step` (offsets per axis), if inside.
    pub fn offset(&self, i: usize, offset: &[isize]) -> Option<usize> {
        let mut idx = self.multi_index(i);
        for d in 0..self.dim() {
            let j = idx[d] as isize + offset[d];
            if j < 0 || j as usize >= self.counts[d] {
                return None;
            }
            idx[d] = j as usize;
        }
        Some(self.flat_index(&idx))
    }

    /// True when the point is not on the boundary of the box.
    pub fn is_interior(&self, i: usize) -> bool {
        self.multi_index(i)
            .iter()
            .zip(&self.counts)
            .all(|(&j, &c)| j > 0 && j + 1 < c)
    }

    /// Flat index of `x` if it is a grid point (within a small fraction of a step).
    pub fn locate(&self, x: &Vector) -> Result<Option<usize>> {
        x.check_dim(self.dim())?;
        if !self.contains(x.as_slice()) {
            return Ok(None);
        }
        let mut idx = Vec::with_capacity(self.dim());
        for d in 0..self.dim() {
            let axis = &self.axes[d];
            let j = ((x[d] - self.low[d]) / self.step).round() as usize;
            let j = j.min(axis.len() - 1);
            if (axis[j] - x[d]).abs() > 1e-7 * self.step {
                return Err(Error::NotOnGrid(x.to_string()));
            }
            idx.push(j);
        }
        Ok(Some(self.flat_index(&idx)))
    }
}

/// An extended-real function sampled on a grid; `+∞` off the box.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Arc<Grid>,
    values: Vec<ExtReal>,
}

impl SampledFunction {
    /// Wraps grid values; fails unless at least one value is finite.
    pub fn from_values(grid: Arc<Grid>, values: Vec<ExtReal>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if !values.iter().any(|v| v.is_finite()) {
            return Err(Error::Improper);
        }
        Ok(SampledFunction { grid, values })
    }

    pub fn from_fn<F>(grid: Arc<Grid>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> ExtReal,
    {
        let values = grid.points().map(f).collect();
        Self::from_values(grid, values)
    }

    /// Samples a finite-valued closure; NaN or `-inf` results are rejected.
    pub fn from_real_fn<F>(grid: Arc<Grid>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        let values = grid
            .points()
            .map(|x| ExtReal::from_f64(f(x)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[ExtReal] {
        &self.values
    }

    pub fn value(&self, i: usize) -> ExtReal {
        self.values[i]
    }

    /// Value at `x`: `+∞` outside the box, error for an interior non-grid point.
    pub fn value_at(&self, x: &Vector) -> Result<ExtReal> {
        Ok(match self.grid.locate(x)? {
            Some(i) => self.values[i],
            None => ExtReal::PlusInfinity,
        })
    }

    /// Iterator over `(index, point, value)` for points of the effective domain.
    pub fn domain(&self) -> impl Iterator<Item = (usize, &[f64], f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(move |(i, v)| v.finite().map(|fv| (i, self.grid.point(i), fv)))
    }

    /// Smallest finite value and its first (lexicographically smallest) index.
    pub fn min(&self) -> (usize, f64) {
        argmin_first(self.domain().map(|(i, _, v)| (i, v)))
            .expect("proper function has a finite value")
    }

    /// Same grid, values transformed pointwise (for finite values).
    pub fn map_finite<F: Fn(&[f64], f64) -> f64>(&self, f: F) -> Result<SampledFunction> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| match v {
                ExtReal::Finite(fv) => ExtReal::from_f64(f(self.grid.point(i), *fv)),
                ExtReal::PlusInfinity => Ok(ExtReal::PlusInfinity),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(self.grid.clone(), values)
    }

    pub(crate) fn same_grid(&self, other: &SampledFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }
}

pub(crate) fn argmin_first<I: Iterator<Item = (usize, f64)>>(it: I) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in it {
        match best {
            Some((_, b)) if v >= b => {}
            _ => best = Some((i, v)),
        }
    }
    best
}

/// Outcome of a support-set membership test.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportReport {
    pub member: bool,
    /// Minimum over the grid of `f(x) - phi(x)`.
    pub min_slack: f64,
    pub argmin: Vector,
    pub argmin_index: usize,
}

/// Tests `phi <= f` on the grid up to `tol`.
pub fn support_membership(
    f: &SampledFunction,
    phi: &QuadMinorant,
    tol: f64,
) -> Result<SupportReport> {
    if phi.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: phi.dim(),
        });
    }
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::InvalidInput(format!("tolerance {tol} must be >= 0")));
    }
    let (i, slack) = argmin_first(f.domain().map(|(i, x, v)| (i, v - phi.eval_slice(x))))
        .expect("proper function has a finite value");
    Ok(SupportReport {
        member: slack >= -tol,
        min_slack: slack,
        argmin: f.grid().point_vector(i),
        argmin_index: i,
    })
}
