//! Dense polyhedral primitives: the polytope type, linear programming,
//! Euclidean projection, and redundancy removal. Everything downstream
//! (solvers, scenario assembly, certificates) builds on this module.
//!
//! All operations are pure functions of their inputs; polytopes are
//! immutable after construction and safe to share across threads.

pub mod lp;
pub mod polytope;
pub mod project;
pub mod redundancy;

pub use lp::{chebyshev_center, find_feasible_point, is_bounded, lp_solve, LpResult, LpStatus, Sense};
pub use polytope::{Polytope, RowProvenance};
pub use project::{project_onto, Projector};
pub use redundancy::{is_row_redundant, minimal_representation, TOL_RED};
