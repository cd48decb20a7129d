//! Solution clouds: a finite, deduplicated set of verified solutions that
//! estimates the solution set of a scenario VI. An explicit representation
//! of that set is generally out of reach, so the cloud is the artifact's
//! stand-in; violation estimates over a cloud lower-bound the violation of
//! the full set.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::convex::{chebyshev_center, lp_solve, LpStatus, Sense};
use crate::error::{Error, Result};
use crate::linalg::dist2;
use crate::rng;
use crate::vi::{extragradient_solve, is_solution, ExtragradientConfig, ViProblem};

use super::program::{Multisample, ScenarioProgram};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionCloud {
    points: Vec<Vec<f64>>,
    dedupe_radius: f64,
    problem_hash: String,
}

impl SolutionCloud {
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dedupe_radius(&self) -> f64 {
        self.dedupe_radius
    }

    pub fn problem_hash(&self) -> &str {
        &self.problem_hash
    }

    /// Assemble a cloud from externally stored points. The construction
    /// invariants (every point verified, pairwise separation) are the
    /// caller's responsibility here; `solution_cloud` is the checked path.
    pub fn from_points_unchecked(
        points: Vec<Vec<f64>>,
        dedupe_radius: f64,
        problem_hash: String,
    ) -> Self {
        SolutionCloud {
            points,
            dedupe_radius,
            problem_hash,
        }
    }

    /// Merge further verified solutions (e.g. the facet hits of a support
    /// search), keeping the pairwise dedupe separation.
    pub fn merged_with<I: IntoIterator<Item = Vec<f64>>>(&self, extra: I) -> SolutionCloud {
        let mut points = self.points.clone();
        for p in extra {
            if points.iter().all(|q| dist2(q, &p) >= self.dedupe_radius) {
                points.push(p);
            }
        }
        SolutionCloud {
            points,
            dedupe_radius: self.dedupe_radius,
            problem_hash: self.problem_hash.clone(),
        }
    }

    /// One point per line, comma-separated coordinates.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            let cells: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn from_csv(text: &str, dedupe_radius: f64, problem_hash: String) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let mut row = Vec::new();
            for cell in trimmed.split(',') {
                row.push(cell.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: lineno + 1,
                    message: format!("bad real {cell:?}: {e}"),
                })?);
            }
            points.push(row);
        }
        Ok(SolutionCloud::from_points_unchecked(
            points,
            dedupe_radius,
            problem_hash,
        ))
    }
}

/// Multi-start configuration for cloud construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CloudConfig {
    pub restarts: usize,
    pub dedupe_radius: f64,
    pub solver: ExtragradientConfig,
}

impl Default for CloudConfig {
    fn default() -> Self {
        CloudConfig {
            restarts: 100,
            dedupe_radius: 1e-4,
            solver: ExtragradientConfig::default(),
        }
    }
}

/// Estimate the solution set by verified multi-start extragradient runs.
///
/// Start points alternate between uniform draws from the inscribed ball and
/// vertices of the feasible set hit by maximizing random directions; the
/// vertex starts are what lets the cloud reach extreme points of solution
/// faces, which interior descent alone never attains. Every limit is
/// verified with `is_solution` and the survivors are deduplicated at
/// `dedupe_radius` in collection order. Deterministic given the seed.
pub fn solution_cloud(
    problem: &ViProblem,
    restarts: usize,
    seed: u64,
    cfg: &CloudConfig,
) -> Result<SolutionCloud> {
    if restarts == 0 {
        return Err(Error::InvalidArgument(
            "solution_cloud needs at least one restart".into(),
        ));
    }
    let (step, tol, _) = cfg.solver.resolve(problem)?;
    let (center, radius) = chebyshev_center(problem.feasible())?;
    if radius < 0.0 {
        return Err(Error::Infeasible(
            "solution_cloud on an empty feasible set".into(),
        ));
    }
    let mut kept: Vec<Vec<f64>> = Vec::new();
    let mut verified_any = false;
    for i in 0..restarts {
        let mut stream = rng::stream(seed, "cloud-start", i as u64);
        let x0 = if i % 2 == 0 {
            rng::in_ball(&mut stream, &center, radius.max(0.0))
        } else {
            let dir = rng::unit_vector(&mut stream, problem.dim());
            let res = lp_solve(&dir, problem.feasible(), Sense::Max)?;
            match res.status {
                LpStatus::Optimal => res.point.unwrap(),
                _ => center.clone(),
            }
        };
        let run = extragradient_solve(problem, &x0, &cfg.solver)?;
        if !run.converged {
            continue;
        }
        if !is_solution(problem, &run.point, tol, step)? {
            continue;
        }
        verified_any = true;
        if kept
            .iter()
            .all(|p| dist2(p, &run.point) >= cfg.dedupe_radius)
        {
            kept.push(run.point);
        }
    }
    if !verified_any {
        return Err(Error::NoSolutions(format!(
            "no verified solutions over {restarts} restarts; the solver \
             configuration (step/tol/max_iter) is likely off for this problem"
        )));
    }
    Ok(SolutionCloud {
        points: kept,
        dedupe_radius: cfg.dedupe_radius,
        problem_hash: problem.hash_hex(),
    })
}

/// Does the realization `delta` cut at least one cloud point out of its
/// sampled constraint set? Because adding a sample can only intersect the
/// solution set with `X_delta`, this containment test is exactly the event
/// "some element of the cloud ceases to be a solution".
pub fn cloud_violates(
    cloud: &SolutionCloud,
    program: &ScenarioProgram,
    delta: &[f64],
) -> Result<bool> {
    if cloud.is_empty() {
        return Err(Error::InvalidArgument(
            "cloud_violates on an empty cloud; clouds are nonempty by construction".into(),
        ));
    }
    let set = program.rule().sample_set(delta)?;
    const TOL: f64 = 1e-9;
    Ok(cloud.points().iter().any(|p| !set.contains(p, TOL)))
}

/// Fraction of cloud points still inside every sampled set of `ms`; the
/// normalized shrinkage curve of a cloud under growing sample counts.
pub fn cloud_survival(
    cloud: &SolutionCloud,
    program: &ScenarioProgram,
    ms: &Multisample,
) -> Result<f64> {
    if cloud.is_empty() {
        return Err(Error::InvalidArgument("empty cloud".into()));
    }
    const TOL: f64 = 1e-9;
    let mut sets = Vec::with_capacity(ms.len());
    for delta in ms.iter() {
        sets.push(program.rule().sample_set(delta)?);
    }
    let surviving = cloud
        .points()
        .iter()
        .filter(|p| sets.iter().all(|s| s.contains(p, TOL)))
        .count();
    Ok(surviving as f64 / cloud.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::scenario::program::SampleRule;
    use crate::vi::AffineMapping;

    #[test]
    fn strongly_monotone_cloud_is_a_singleton() {
        let f = AffineMapping::new(Matrix::identity(2), vec![-0.3, -0.7]).unwrap();
        let sq = crate::convex::Polytope::bounding_box(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let p = ViProblem::new(f, sq).unwrap();
        let cloud = solution_cloud(&p, 40, 17, &CloudConfig::default()).unwrap();
        assert_eq!(cloud.len(), 1);
        assert!(dist2(&cloud.points()[0], &[0.3, 0.7]) < 1e-5);
    }

    #[test]
    fn clouds_are_deterministic() {
        let f = AffineMapping::constant(vec![0.0, 1.0]);
        let tri = crate::convex::testutil::triangle();
        let p = ViProblem::new(f, tri).unwrap();
        let a = solution_cloud(&p, 30, 5, &CloudConfig::default()).unwrap();
        let b = solution_cloud(&p, 30, 5, &CloudConfig::default()).unwrap();
        assert_eq!(a.points(), b.points());
        assert_eq!(a.problem_hash(), b.problem_hash());
    }

    #[test]
    fn zero_restarts_rejected() {
        let f = AffineMapping::constant(vec![0.0, 1.0]);
        let p = ViProblem::new(f, crate::convex::testutil::triangle()).unwrap();
        assert!(solution_cloud(&p, 0, 1, &CloudConfig::default()).is_err());
    }

    #[test]
    fn violation_of_a_cutting_halfspace() {
        // cloud on the bottom edge of the triangle; the halfspace
        // x2 >= 1/2 cuts all of it, x2 >= -1 cuts none of it
        let f = AffineMapping::constant(vec![0.0, 1.0]);
        let tri = crate::convex::testutil::triangle();
        let p = ViProblem::new(f, tri.clone()).unwrap();
        let prog =
            ScenarioProgram::new(tri, SampleRule::HalfspaceFromDelta { dim: 2 }, None).unwrap();
        let cloud = solution_cloud(&p, 30, 5, &CloudConfig::default()).unwrap();
        assert!(cloud_violates(&cloud, &prog, &[0.0, -1.0, -0.5]).unwrap());
        assert!(!cloud_violates(&cloud, &prog, &[0.0, -1.0, 1.0]).unwrap());
    }

    #[test]
    fn empty_cloud_is_a_contract_violation() {
        let tri = crate::convex::testutil::triangle();
        let prog =
            ScenarioProgram::new(tri, SampleRule::HalfspaceFromDelta { dim: 2 }, None).unwrap();
        let empty = SolutionCloud::from_points_unchecked(vec![], 1e-4, "x".into());
        assert!(cloud_violates(&empty, &prog, &[0.0, -1.0, 0.0]).is_err());
    }

    #[test]
    fn cloud_csv_round_trip() {
        let c = SolutionCloud::from_points_unchecked(
            vec![vec![0.1, 0.2], vec![1.0 / 3.0, -0.5]],
            1e-4,
            "h".into(),
        );
        let csv = c.to_csv();
        let back = SolutionCloud::from_csv(&csv, 1e-4, "h".into()).unwrap();
        assert_eq!(c.points(), back.points());
    }
}
