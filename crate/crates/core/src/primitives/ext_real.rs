use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use crate::error::{Error, Result};

/// A value in R ∪ {+∞}. Minus infinity is not representable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PlusInfinity,
}

impl ExtReal {
    /// Wraps a float; `+inf` maps to `PlusInfinity`, NaN and `-inf` are rejected.
    pub fn from_f64(v: f64) -> Result<Self> {
        if v.is_nan() || v == f64::NEG_INFINITY {
            return Err(Error::InvalidInput(format!("{v} is not an extended real")));
        }
        Ok(if v == f64::INFINITY {
            ExtReal::PlusInfinity
        } else {
            ExtReal::Finite(v)
        })
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PlusInfinity => None,
        }
    }

    /// `self - rhs` for a finite `rhs`.
    pub fn minus(self, rhs: f64) -> ExtReal {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v - rhs),
            ExtReal::PlusInfinity => ExtReal::PlusInfinity,
        }
    }

    pub fn lt(self, rhs: f64) -> bool {
        matches!(self, ExtReal::Finite(v) if v < rhs)
    }

    pub fn le(self, rhs: f64) -> bool {
        matches!(self, ExtReal::Finite(v) if v <= rhs)
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PlusInfinity,
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: f64) -> ExtReal {
        self + ExtReal::Finite(rhs)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &ExtReal) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::PlusInfinity) => Some(Ordering::Less),
            (ExtReal::PlusInfinity, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::PlusInfinity, ExtReal::PlusInfinity) => Some(Ordering::Equal),
        }
    }
}

impl From<f64> for ExtReal {
    /// Panics on NaN or `-inf`; use [`ExtReal::from_f64`] for untrusted input.
    fn from(v: f64) -> Self {
        ExtReal::from_f64(v).expect("value is not an extended real")
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PlusInfinity => write!(f, "+inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_rules() {
        let inf = ExtReal::PlusInfinity;
        assert_eq!(inf + 1.0, inf);
        assert_eq!(ExtReal::Finite(1.0) + inf, inf);
        assert!(inf > ExtReal::Finite(f64::MAX));
        assert!(!inf.lt(f64::MAX));
        assert!(ExtReal::from_f64(f64::NEG_INFINITY).is_err());
        assert!(ExtReal::from_f64(f64::NAN).is_err());
        assert_eq!(ExtReal::from_f64(f64::INFINITY).unwrap(), inf);
    }
}
