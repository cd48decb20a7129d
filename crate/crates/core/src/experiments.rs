//! Experiment harness: out-of-sample violation estimation of a solution
//! cloud against fresh draws, and the multi-K certification experiment
//! that writes a robustness table with empirical violation columns.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cert::{certificate_from_count, Certificate, CertificateMode};
use crate::convex::minimal_representation;
use crate::error::{Error, Result};
use crate::rng;
use crate::scenario::{
    cloud_survival, cloud_violates, solution_cloud, support_cardinality, CloudConfig,
    Multisample, ScenarioProgram, SolutionCloud,
};
use crate::vi::{AffineMapping, ViProblem};

/// Empirical violation of a cloud over fresh draws. A single estimate has
/// one repetition; the aggregated form carries the per-repetition list and
/// its max and mean.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ViolationReport {
    /// Fresh draws per repetition.
    pub fresh_count: usize,
    /// Violated draws in the last repetition.
    pub violated_count: usize,
    /// violated_count / fresh_count of the last repetition, exact.
    pub v_hat: f64,
    /// One empirical violation fraction per repetition.
    pub repetitions: Vec<f64>,
    pub v_max: f64,
    pub v_avg: f64,
    /// The certificate level the estimates were checked against, if any.
    pub epsilon_used: Option<f64>,
    /// Per repetition: did `v_hat <= epsilon_used` hold?
    pub bound_held: Vec<bool>,
}

impl ViolationReport {
    pub fn all_bounds_held(&self) -> bool {
        self.bound_held.iter().all(|&b| b)
    }
}

/// One repetition: draw `fresh` new realizations from the program's
/// distribution and count how many cut at least one cloud point. The draw
/// stream is derived under its own domain tag, so it is disjoint from any
/// certification multisample by construction.
pub fn estimate_violation(
    cloud: &SolutionCloud,
    program: &ScenarioProgram,
    fresh: usize,
    seed: u64,
) -> Result<ViolationReport> {
    estimate_violation_repeated(cloud, program, fresh, 1, seed, None)
}

/// `repetitions` independent fresh batches; max and mean over them.
pub fn estimate_violation_repeated(
    cloud: &SolutionCloud,
    program: &ScenarioProgram,
    fresh: usize,
    repetitions: usize,
    seed: u64,
    epsilon_used: Option<f64>,
) -> Result<ViolationReport> {
    if fresh == 0 || repetitions == 0 {
        return Err(Error::InvalidArgument(
            "violation estimation needs fresh >= 1 and repetitions >= 1".into(),
        ));
    }
    if cloud.is_empty() {
        return Err(Error::InvalidArgument(
            "violation estimation on an empty cloud".into(),
        ));
    }
    let Some(dist) = program.distribution() else {
        return Err(Error::InvalidArgument(
            "the scenario program has no sampling distribution attached".into(),
        ));
    };
    let mut fractions = Vec::with_capacity(repetitions);
    let mut last_violated = 0usize;
    for rep in 0..repetitions {
        let mut stream = rng::stream(seed, "fresh-violation", rep as u64);
        let mut violated = 0usize;
        for _ in 0..fresh {
            let delta = dist.draw_one(&mut stream);
            if cloud_violates(cloud, program, &delta)? {
                violated += 1;
            }
        }
        last_violated = violated;
        fractions.push(violated as f64 / fresh as f64);
    }
    let v_max = fractions.iter().cloned().fold(0.0, f64::max);
    let v_avg = fractions.iter().sum::<f64>() / repetitions as f64;
    let bound_held = match epsilon_used {
        Some(eps) => fractions.iter().map(|&v| v <= eps).collect(),
        None => vec![true; repetitions],
    };
    Ok(ViolationReport {
        fresh_count: fresh,
        violated_count: last_violated,
        v_hat: *fractions.last().unwrap(),
        repetitions: fractions,
        v_max,
        v_avg,
        epsilon_used,
        bound_held,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentRow {
    #[serde(rename = "K")]
    pub k: usize,
    /// |A_K|, the active-sample count.
    pub active_count: usize,
    pub s_k: usize,
    pub epsilon: f64,
    pub v_max: f64,
    pub v_avg: f64,
    /// Fraction of the deterministic-problem cloud that stays feasible for
    /// all K sampled sets; non-increasing along nested multisamples.
    pub shrink: f64,
    pub bound_held: bool,
    pub vacuous: bool,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub rows: Vec<ExperimentRow>,
    pub certificates: Vec<Certificate>,
    /// (K, diagnostic) for rows that aborted; completed rows are kept.
    pub diagnostics: Vec<(usize, String)>,
    pub files: Vec<PathBuf>,
}

pub struct ExperimentSpec<'a> {
    pub program: &'a ScenarioProgram,
    pub mapping: &'a AffineMapping,
    pub k_list: &'a [usize],
    pub beta: f64,
    pub mode: CertificateMode,
    pub repetitions: usize,
    pub fresh: usize,
    pub seed: u64,
    pub cloud: CloudConfig,
}

/// For each K in the list (nested prefixes of one master draw): certify,
/// build the scenario cloud, estimate out-of-sample violation over
/// independent fresh batches, and record the shrinkage of the K = 0 cloud.
/// Writes `table.csv` plus one certificate JSON per K under `out_dir`.
/// A failing K aborts only its own row, with a diagnostic.
pub fn run_certification_sweep(spec: &ExperimentSpec, out_dir: &Path) -> Result<ExperimentOutcome> {
    let ExperimentSpec {
        program,
        mapping,
        k_list,
        beta,
        mode,
        repetitions,
        fresh,
        seed,
        cloud,
    } = spec;
    let (beta, mode, seed) = (*beta, *mode, *seed);
    std::fs::create_dir_all(out_dir)?;
    let k_max = k_list.iter().copied().max().unwrap_or(0);
    let ms_all = program.draw(k_max, seed)?;

    // deterministic-problem cloud for the shrinkage column
    let (base_reduced, _) = minimal_representation(program.base())?;
    let base_problem = ViProblem::new_trusted((*mapping).clone(), base_reduced)?;
    let cloud0 = solution_cloud(
        &base_problem,
        cloud.restarts,
        rng::derive(seed, "cloud", 0),
        cloud,
    )?;

    let mut rows = Vec::new();
    let mut certificates = Vec::new();
    let mut diagnostics = Vec::new();
    let mut files = Vec::new();
    for &k in k_list.iter() {
        let ms = ms_all.prefix(k);
        match experiment_row(
            program,
            mapping,
            &ms,
            beta,
            mode,
            *repetitions,
            *fresh,
            seed,
            cloud,
            &cloud0,
        ) {
            Ok((row, cert)) => {
                let path = out_dir.join(format!("certificate_K{k}.json"));
                std::fs::write(&path, cert.to_json()?)?;
                files.push(path);
                rows.push(row);
                certificates.push(cert);
            }
            Err(e) => diagnostics.push((k, e.to_string())),
        }
    }
    let table = out_dir.join("table.csv");
    std::fs::write(&table, rows_to_csv(&rows))?;
    files.push(table);
    Ok(ExperimentOutcome {
        rows,
        certificates,
        diagnostics,
        files,
    })
}

#[allow(clippy::too_many_arguments)]
fn experiment_row(
    program: &ScenarioProgram,
    mapping: &AffineMapping,
    ms: &Multisample,
    beta: f64,
    mode: CertificateMode,
    repetitions: usize,
    fresh: usize,
    seed: u64,
    cloud_cfg: &CloudConfig,
    cloud0: &SolutionCloud,
) -> Result<(ExperimentRow, Certificate)> {
    let k = ms.len();
    let (cert, active_count, cloud_k) = if k == 0 {
        let cert = certificate_from_count(program, ms, mapping, beta, mode, 0)?;
        (cert, 0, cloud0.clone())
    } else {
        let count = support_cardinality(
            program,
            ms,
            mapping,
            &cloud_cfg.solver,
        )?;
        let cert = certificate_from_count(program, ms, mapping, beta, mode, count.s)?;
        let problem =
            ViProblem::new_trusted(mapping.clone(), count.active.reduced().clone())?;
        let cloud_k = solution_cloud(
            &problem,
            cloud_cfg.restarts,
            rng::derive(seed, "cloud", k as u64),
            cloud_cfg,
        )?;
        // the facet hits sit on sample boundaries, exactly where fresh
        // draws bite first; folding them in sharpens the empirical test
        let cloud_k =
            cloud_k.merged_with(count.facet_solutions.iter().map(|(_, p)| p.clone()));
        (cert, count.active.count(), cloud_k)
    };
    let violation = estimate_violation_repeated(
        &cloud_k,
        program,
        fresh,
        repetitions,
        rng::derive(seed, "fresh", k as u64),
        Some(cert.epsilon),
    )?;
    let shrink = cloud_survival(cloud0, program, ms)?;
    Ok((
        ExperimentRow {
            k,
            active_count,
            s_k: cert.s_k,
            epsilon: cert.epsilon,
            v_max: violation.v_max,
            v_avg: violation.v_avg,
            shrink,
            bound_held: violation.all_bounds_held(),
            vacuous: cert.vacuous,
        },
        cert,
    ))
}

pub fn rows_to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from("K,active_count,s_K,epsilon,v_max,v_avg,shrink,bound_held,vacuous\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.k,
            r.active_count,
            r.s_k,
            r.epsilon,
            r.v_max,
            r.v_avg,
            r.shrink,
            r.bound_held,
            r.vacuous
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::SampleRule;

    /// A fixed cap program on the unit interval in 1-D with uniform
    /// disturbances: base 0 <= x <= 1, samples x <= 0.9 - delta.
    fn cap_program() -> ScenarioProgram {
        let base = crate::convex::Polytope::bounding_box(&[0.0], &[1.0]).unwrap();
        ScenarioProgram::new(
            base,
            SampleRule::AggregateCap {
                n_agents: 1,
                horizon: 1,
                d_nom: vec![0.1],
                d_max: 1.0,
            },
            Some(crate::scenario::DeltaDistribution::UniformBox {
                half_width: vec![0.05],
            }),
        )
        .unwrap()
    }

    #[test]
    fn boundary_point_is_a_coin_flip() {
        // one cloud point exactly on the nominal cap x = 0.9: a fresh
        // draw removes it iff delta > 0, so v_hat is a fair coin
        let cloud = SolutionCloud::from_points_unchecked(vec![vec![0.9]], 1e-4, "h".into());
        let prog = cap_program();
        let rep = estimate_violation(&cloud, &prog, 10_000, 33).unwrap();
        let se = (0.25f64 / 10_000.0).sqrt();
        assert!(
            (rep.v_hat - 0.5).abs() <= 3.0 * se,
            "v_hat {} vs 0.5 +- {}",
            rep.v_hat,
            3.0 * se
        );
        assert_eq!(rep.v_hat, rep.violated_count as f64 / rep.fresh_count as f64);
    }

    #[test]
    fn strictly_feasible_cloud_never_violates() {
        let cloud = SolutionCloud::from_points_unchecked(vec![vec![0.5]], 1e-4, "h".into());
        let prog = cap_program();
        let rep = estimate_violation(&cloud, &prog, 2_000, 1).unwrap();
        assert_eq!(rep.v_hat, 0.0);
    }

    #[test]
    fn repeated_estimates_aggregate() {
        let cloud = SolutionCloud::from_points_unchecked(vec![vec![0.9]], 1e-4, "h".into());
        let prog = cap_program();
        let rep =
            estimate_violation_repeated(&cloud, &prog, 500, 4, 7, Some(0.9)).unwrap();
        assert_eq!(rep.repetitions.len(), 4);
        assert!(rep.v_max >= rep.v_avg);
        assert!(rep.all_bounds_held());
        let again = estimate_violation_repeated(&cloud, &prog, 500, 4, 7, Some(0.9)).unwrap();
        assert_eq!(rep.repetitions, again.repetitions);
    }

    #[test]
    fn sweep_aborts_only_the_failing_row() {
        use crate::vi::AffineMapping;
        // caps can go negative under large disturbances, emptying the
        // assembly for large enough K; smaller prefixes stay feasible
        let base = crate::convex::Polytope::bounding_box(&[0.0], &[1.0]).unwrap();
        let program = ScenarioProgram::new(
            base,
            SampleRule::AggregateCap {
                n_agents: 1,
                horizon: 1,
                d_nom: vec![0.4],
                d_max: 0.6,
            },
            Some(crate::scenario::DeltaDistribution::UniformBox {
                half_width: vec![0.3],
            }),
        )
        .unwrap();
        let seed = 14;
        let ms = program.draw(50, seed).unwrap();
        let bad = (1..=50)
            .find(|&k| 0.2 - ms.sample(k)[0] < 0.0)
            .expect("a cap-breaking draw among 50");
        let mapping = AffineMapping::new(crate::linalg::Matrix::identity(1), vec![-0.05]).unwrap();
        let spec = ExperimentSpec {
            program: &program,
            mapping: &mapping,
            k_list: &[0, bad - 1, bad],
            beta: 0.1,
            mode: CertificateMode::Split,
            repetitions: 1,
            fresh: 50,
            seed,
            cloud: CloudConfig {
                restarts: 6,
                dedupe_radius: 1e-4,
                solver: Default::default(),
            },
        };
        let dir = std::env::temp_dir().join(format!("vicert-abort-{}", std::process::id()));
        let out = run_certification_sweep(&spec, &dir).unwrap();
        assert_eq!(out.rows.len(), 2);
        assert_eq!(out.diagnostics.len(), 1);
        assert_eq!(out.diagnostics[0].0, bad);
        assert!(out.diagnostics[0].1.contains("empty"));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn no_distribution_is_an_error() {
        let base = crate::convex::Polytope::bounding_box(&[0.0], &[1.0]).unwrap();
        let prog = ScenarioProgram::new(
            base,
            SampleRule::HalfspaceFromDelta { dim: 1 },
            None,
        )
        .unwrap();
        let cloud = SolutionCloud::from_points_unchecked(vec![vec![0.5]], 1e-4, "h".into());
        assert!(estimate_violation(&cloud, &prog, 10, 0).is_err());
    }
}
