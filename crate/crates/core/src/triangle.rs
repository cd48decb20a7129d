//! A built-in two-dimensional demo family: a triangular base set with a
//! constant vertical mapping, and literal halfspace samples. Small enough
//! that every solution set can be written down by hand, which makes it the
//! golden instance for end-to-end tests and a convenient CLI demo.
//!
//! Base set: conv{(0,0), (1,0), (1/2,1)}. Mapping: F(x) = (0, 1), so the
//! VI solutions are the minimizers of x2 over the feasible set:
//!   - no samples: the segment x2 = 0, x1 in [0,1];
//!   - sample 1 (x1/3 + x2 >= 1/3): the vertex (1, 0);
//!   - samples 1-2 (plus x1/3 - x2 <= 1/15): the point (3/5, 2/15);
//!   - samples 1-3 (plus x2 >= 1/2): the segment x2 = 1/2, x1 in [1/4, 3/4].

use crate::convex::Polytope;
use crate::error::Result;
use crate::scenario::{Multisample, SampleRule, ScenarioProgram};
use crate::vi::AffineMapping;

/// The triangular base set conv{(0,0), (1,0), (1/2,1)}.
pub fn base_set() -> Polytope {
    Polytope::from_base_rows(
        &[vec![-2.0, 1.0], vec![2.0, 1.0], vec![0.0, -1.0]],
        vec![0.0, 2.0, 0.0],
    )
    .expect("static instance")
}

/// The three demo halfspaces, as uncertainty vectors `(a1, a2, b)` for the
/// literal-halfspace sample rule.
pub const SAMPLE_DELTAS: [[f64; 3]; 3] = [
    [-1.0 / 3.0, -1.0, -1.0 / 3.0],
    [1.0 / 3.0, -1.0, 1.0 / 15.0],
    [0.0, -1.0, -0.5],
];

pub fn program() -> Result<ScenarioProgram> {
    ScenarioProgram::new(base_set(), SampleRule::HalfspaceFromDelta { dim: 2 }, None)
}

pub fn mapping() -> AffineMapping {
    AffineMapping::constant(vec![0.0, 1.0])
}

/// The first `k` demo halfspaces (k <= 3) as a multisample.
pub fn multisample(k: usize) -> Result<Multisample> {
    assert!(k <= SAMPLE_DELTAS.len(), "only three demo samples exist");
    Multisample::new(
        SAMPLE_DELTAS[..k].iter().map(|d| d.to_vec()).collect(),
        0,
    )
}

/// Distance from `x` to the known solution set at sample count `k`.
pub fn distance_to_solution_set(k: usize, x: &[f64]) -> f64 {
    let seg = |x: &[f64], lo: f64, hi: f64, y: f64| -> f64 {
        let dx = (x[0] - x[0].clamp(lo, hi)).abs();
        let dy = x[1] - y;
        (dx * dx + dy * dy).sqrt()
    };
    match k {
        0 => seg(x, 0.0, 1.0, 0.0),
        1 => seg(x, 1.0, 1.0, 0.0),
        2 => seg(x, 0.6, 0.6, 2.0 / 15.0),
        3 => seg(x, 0.25, 0.75, 0.5),
        _ => panic!("only K <= 3 solution sets are known"),
    }
}

/// Extreme points of the known solution set at sample count `k`.
pub fn solution_extremes(k: usize) -> Vec<[f64; 2]> {
    match k {
        0 => vec![[0.0, 0.0], [1.0, 0.0]],
        1 => vec![[1.0, 0.0]],
        2 => vec![[0.6, 2.0 / 15.0]],
        3 => vec![[0.25, 0.5], [0.75, 0.5]],
        _ => panic!("only K <= 3 solution sets are known"),
    }
}
