//! Affine variational inequalities: representation, extragradient solving,
//! residual-based verification, and facet-restricted solves.

pub mod mapping;
pub mod solver;

pub use mapping::{AffineMapping, Monotonicity};
pub use solver::{
    extragradient_solve, is_solution, natural_residual, solve_on_facet, ExtragradientConfig,
    SolveResult, ViProblem,
};
