//! Convex geometry: compact convex bodies given by support functions (with
//! vertex lists in the plane and in space), cones as angular arc sets, and
//! three-valued membership and inclusion tests with numeric margins.

mod body;
mod cone;
mod directions;
mod hull;
mod ops;
mod recover;

use alloc::vec::Vec;
use core::fmt;

pub use body::{ConvexBody, Exactness, Provenance, Shape, SupportFn};
pub use cone::{Arc, ConeKind, ConeSample, Label};
pub use directions::{angle_dir, angle_of, canonical_directions, fibonacci_sphere, inverse_normal, kronecker_alphas};
pub use hull::{hull2d, hull_distance, min_norm_point, nnls};
pub use ops::{
    hausdorff, included, included_in_sum_with_cone, member, member_exact, member_of_sum_with_cone, minimize_over_directions, sum_certificate,
    Certificate, CertificateTerm, Generators, Inclusion, Membership,
};
pub use recover::max_dot;

/// Three-valued outcome of a geometric test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Boundary,
}

impl Verdict {
    /// `Holds` above `tol`, `Fails` below `-tol`, `Boundary` in between.
    pub fn from_margin(margin: f64, tol: f64) -> Self {
        if margin >= tol {
            Verdict::Holds
        } else if margin <= -tol {
            Verdict::Fails
        } else {
            Verdict::Boundary
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "HOLDS",
            Verdict::Fails => "FAILS",
            Verdict::Boundary => "BOUNDARY",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeomError {
    /// Sampled subadditivity or homogeneity failed.
    NotSublinear { d1: Vec<f64>, d2: Vec<f64>, excess: f64 },
    Unbounded { direction: Vec<f64> },
    /// The oracle returned NaN.
    OracleFailure,
    /// An exact vertex answer was requested in a dimension without one.
    NoVertexForm { dim: usize },
    DimensionMismatch { expected: usize, found: usize },
    /// Hull of an empty family.
    Empty,
}

impl fmt::Display for GeomError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeomError::NotSublinear { d1, d2, excess } => {
                write!(f, "support is not sublinear: h(d1+d2) exceeds h(d1)+h(d2) by {excess:e} at d1={d1:?}, d2={d2:?}")
            }
            GeomError::Unbounded { direction } => write!(f, "support is unbounded along {direction:?}"),
            GeomError::OracleFailure => f.write_str("support oracle returned NaN"),
            GeomError::NoVertexForm { dim } => write!(f, "no exact vertex form in dimension {dim}"),
            GeomError::DimensionMismatch { expected, found } => write!(f, "expected dimension {expected}, found {found}"),
            GeomError::Empty => f.write_str("empty family of bodies"),
        }
    }
}

impl core::error::Error for GeomError {}
