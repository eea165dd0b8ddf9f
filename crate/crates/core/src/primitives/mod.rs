//! Value types shared by every module: points, extended reals, quadratic
//! minorants and sampled functions.

mod ext_real;
mod minorant;
mod sampled;
mod vector;

pub use ext_real::ExtReal;
pub use minorant::{eval_minorant, shift, QuadMinorant};
pub use sampled::{support_membership, Grid, SampledFunction, SupportReport, DEFAULT_TOL};
pub use vector::{Vector, MAX_DIM};

pub(crate) use sampled::argmin_first;
pub(crate) use vector::{dist_sq, dot, norm_sq};
