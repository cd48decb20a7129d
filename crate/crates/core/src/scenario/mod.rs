//! Scenario machinery: multisamples, the base-set-plus-sampled-blocks
//! program, assembly of the scenario polytope, active-sample detection via
//! minimal representation, the facet-solve support count, and solution
//! clouds that stand in for the (unavailable) exact solution set.

mod cloud;
mod program;
mod support;

pub use cloud::{cloud_survival, cloud_violates, solution_cloud, CloudConfig, SolutionCloud};
pub use program::{DeltaDistribution, Multisample, SampleRule, ScenarioProgram};
pub use support::{active_samples, support_cardinality, v_k, ActiveSamples, SupportCount};
