//! Nonsmooth analysis for robust difference-of-tangentially-convex programs.
//!
//! The crate is `no_std` with `alloc`. Everything numeric goes through `libm`
//! so results do not depend on the platform's libm.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod convgeo;
pub mod cones;
pub mod cq;
pub mod expr;
pub mod linalg;
pub mod maxfun;
pub mod model;
pub mod optimality;
pub mod subdiff;

pub use convgeo::{ConeSample, ConvexBody, Verdict};
pub use cq::{CqReport, CqVerdict};
pub use expr::Expression;
pub use model::{builtin_example, Config, ProblemSpec};
pub use optimality::{Condition, Context, StationarityReport};
