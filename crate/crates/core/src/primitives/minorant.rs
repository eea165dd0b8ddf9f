use std::fmt;

use super::vector::{dot, norm_sq, Vector};
use crate::error::{Error, Result};

/// A member of the quadratic minorant class: `x ↦ -a‖x‖² + ⟨l, x⟩ + c` with `a >= 0`.
///
/// Curvature zero is exactly the affine sub-class.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadMinorant {
    a: f64,
    l: Vector,
    c: f64,
}

impl QuadMinorant {
    pub fn new(a: f64, l: Vector, c: f64) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::InvalidInput(format!("curvature {a} must be finite and >= 0")));
        }
        if !c.is_finite() {
            return Err(Error::InvalidInput(format!("offset {c} must be finite")));
        }
        Ok(QuadMinorant { a, l, c })
    }

    /// The constant function `c` in dimension `n`.
    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(0.0, Vector::zeros(n)?, c)
    }

    /// Affine function `⟨l, x⟩ + c`.
    pub fn affine(l: Vector, c: f64) -> Result<Self> {
        Self::new(0.0, l, c)
    }

    pub fn curvature(&self) -> f64 {
        self.a
    }

    pub fn slope(&self) -> &Vector {
        &self.l
    }

    pub fn offset(&self) -> f64 {
        self.c
    }

    pub fn dim(&self) -> usize {
        self.l.dim()
    }

    pub fn is_affine(&self) -> bool {
        self.a == 0.0
    }

    pub fn is_constant(&self) -> bool {
        self.a == 0.0 && self.l.is_zero()
    }

    pub fn eval(&self, x: &Vector) -> Result<f64> {
        x.check_dim(self.dim())?;
        Ok(self.eval_slice(x.as_slice()))
    }

    /// Evaluation without the dimension check.
    pub fn eval_slice(&self, x: &[f64]) -> f64 {
        -self.a * norm_sq(x) + dot(self.l.as_slice(), x) + self.c
    }

    /// Vertical shift by `delta`; the class (affine or not) is preserved.
    pub fn shift(&self, delta: f64) -> QuadMinorant {
        QuadMinorant {
            a: self.a,
            l: self.l.clone(),
            c: self.c + delta,
        }
    }

    /// Coefficients as `[a, l1, .., ln, c]`.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim() + 2);
        out.push(self.a);
        out.extend_from_slice(self.l.as_slice());
        out.push(self.c);
        out
    }

    /// Inverse of [`QuadMinorant::coefficients`].
    pub fn from_coefficients(coeffs: &[f64]) -> Result<Self> {
        if coeffs.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "minorant needs at least 3 coefficients (a,l..,c), got {}",
                coeffs.len()
            )));
        }
        let n = coeffs.len() - 2;
        let l = Vector::new(coeffs[1..=n].to_vec())?;
        Self::new(coeffs[0], l, coeffs[n + 1])
    }

    /// Componentwise comparison of coefficients within `tol`.
    pub fn approx_eq(&self, other: &QuadMinorant, tol: f64) -> bool {
        self.dim() == other.dim()
            && self
                .coefficients()
                .iter()
                .zip(other.coefficients())
                .all(|(x, y)| (x - y).abs() <= tol)
    }
}

impl fmt::Display for QuadMinorant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(a={}, l={}, c={})", self.a, self.l, self.c)
    }
}

/// Evaluates a minorant at `x`.
pub fn eval_minorant(phi: &QuadMinorant, x: &Vector) -> Result<f64> {
    phi.eval(x)
}

/// Returns `phi + delta`.
pub fn shift(phi: &QuadMinorant, delta: f64) -> QuadMinorant {
    phi.shift(delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn eval_examples() {
        let zero = QuadMinorant::constant(1, 0.0).unwrap();
        assert_eq!(zero.eval(&v(&[123.0])).unwrap(), 0.0);
        let neg_sq = QuadMinorant::new(1.0, v(&[0.0]), 0.0).unwrap();
        assert_eq!(neg_sq.eval(&v(&[2.0])).unwrap(), -4.0);
        let phi = QuadMinorant::new(1.0, v(&[2.0]), 3.0).unwrap();
        assert_eq!(phi.eval(&v(&[1.0])).unwrap(), 4.0);
    }

    #[test]
    fn eval_rejects_dimension_mismatch() {
        let phi = QuadMinorant::constant(2, 0.0).unwrap();
        assert_eq!(
            phi.eval(&v(&[1.0])),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn shift_examples() {
        let zero = QuadMinorant::constant(1, 0.0).unwrap();
        assert_eq!(shift(&zero, 1.0), QuadMinorant::constant(1, 1.0).unwrap());
        let phi = QuadMinorant::new(1.0, v(&[2.0]), 3.0).unwrap();
        assert_eq!(shift(&phi, -3.0), QuadMinorant::new(1.0, v(&[2.0]), 0.0).unwrap());
        assert!(shift(&zero, 5.0).is_affine());
        assert!(!shift(&phi, 5.0).is_affine());
    }

    #[test]
    fn rejects_negative_curvature() {
        assert!(QuadMinorant::new(-1.0, v(&[0.0]), 0.0).is_err());
        assert!(QuadMinorant::new(0.0, v(&[0.0]), f64::NAN).is_err());
    }

    #[test]
    fn coefficients_round_trip() {
        let phi = QuadMinorant::new(0.5, v(&[1.0, -2.0]), 3.0).unwrap();
        let back = QuadMinorant::from_coefficients(&phi.coefficients()).unwrap();
        assert_eq!(phi, back);
    }
}
