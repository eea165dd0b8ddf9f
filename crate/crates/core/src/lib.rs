//! Abstract-convexity toolkit on sampled grids.
//!
//! Functions `f: R^n → R ∪ {+∞}` are represented by their values on a uniform
//! grid ([`SampledFunction`]); minorants are drawn from the class
//! `-a‖x‖² + ⟨l, x⟩ + c`, `a >= 0` ([`QuadMinorant`]). On top of that the crate
//! provides support sets and envelopes, Φ-subdifferentials, exact decisions of
//! the intersection property for pairs of minorants, a variational
//! perturbation pipeline, affine separation for convex pairs and minimax
//! witness searches.

pub mod convexsep;
pub mod error;
pub mod intersection;
pub mod minimax;
pub mod primitives;
pub mod subdiff;
pub mod support;
pub mod variational;

pub use error::{Error, Result};
pub use primitives::{
    eval_minorant, shift, support_membership, ExtReal, Grid, QuadMinorant, SampledFunction,
    SupportReport, Vector, DEFAULT_TOL,
};
