//! Scenario-based variational inequalities with a-posteriori probabilistic
//! feasibility certificates for the entire solution set.
//!
//! The pipeline: assemble a polytope from a deterministic base set and K
//! sampled constraint blocks, solve the VI over it with an extragradient
//! method, estimate the solution set by a verified multi-start cloud, count
//! the support subsample by facet-restricted solves over the active
//! samples, and evaluate a violation-level schedule at that count to get a
//! distribution-free certificate: with confidence at least 1 - beta, the
//! probability that a fresh realization cuts any solution away is at most
//! epsilon(s_K).

pub mod cert;
pub mod convex;
pub mod error;
pub mod experiments;
pub mod hash;
pub mod linalg;
pub mod pev;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod triangle;
pub mod vi;

pub use cert::{
    certify, epsilon_split, epsilon_wait_and_judge, log_binomial, verify_schedule, Certificate,
    CertificateMode, EpsilonSchedule,
};
pub use convex::{
    chebyshev_center, is_row_redundant, lp_solve, minimal_representation, project_onto, LpResult,
    LpStatus, Polytope, RowProvenance, Sense,
};
pub use error::{Error, Result};
pub use experiments::{
    estimate_violation, estimate_violation_repeated, run_certification_sweep, ExperimentOutcome,
    ExperimentRow, ExperimentSpec, ViolationReport,
};
pub use scenario::{
    active_samples, cloud_violates, solution_cloud, support_cardinality, v_k, CloudConfig,
    DeltaDistribution, Multisample, SampleRule, ScenarioProgram, SolutionCloud,
};
pub use vi::{
    extragradient_solve, is_solution, natural_residual, solve_on_facet, AffineMapping,
    ExtragradientConfig, Monotonicity, SolveResult, ViProblem,
};
