//! Active-sample detection and the support-subsample count.
//!
//! A sample is active when at least one of its rows survives minimal
//! representation of the assembled polytope, i.e. its boundary touches the
//! boundary of the scenario feasible set. Only those samples can support
//! the solution set, so the facet solves run over the active set alone; a
//! sample whose rows are all redundant is conclusively non-support.

use std::collections::BTreeMap;

use crate::convex::{minimal_representation, Polytope, RowProvenance};
use crate::error::{Error, Result};
use crate::vi::{solve_on_facet, AffineMapping, ExtragradientConfig, ViProblem};

use super::program::{Multisample, ScenarioProgram};

/// The active sample set `A_K` together with, per sample, its surviving
/// facet rows, plus the reduced polytope the scan produced.
#[derive(Debug, Clone)]
pub struct ActiveSamples {
    assembled: Polytope,
    reduced: Polytope,
    kept_rows: Vec<usize>,
    by_sample: BTreeMap<usize, Vec<usize>>,
}

impl ActiveSamples {
    /// Active sample indices, ascending (1-indexed).
    pub fn indices(&self) -> Vec<usize> {
        self.by_sample.keys().copied().collect()
    }

    pub fn count(&self) -> usize {
        self.by_sample.len()
    }

    /// Surviving facet rows of sample `k`, as `(normal, offset)` pairs.
    pub fn facets_of(&self, k: usize) -> Vec<(Vec<f64>, f64)> {
        self.by_sample
            .get(&k)
            .map(|rows| {
                rows.iter()
                    .map(|&i| {
                        let (a, b) = self.assembled.row(i);
                        (a.to_vec(), b)
                    })
                    .collect()
            })
            .unwrap_or_default()
    }

    /// The assembled scenario polytope (base plus all sample blocks).
    pub fn assembled(&self) -> &Polytope {
        &self.assembled
    }

    /// Minimal representation of the assembled polytope: the same set.
    pub fn reduced(&self) -> &Polytope {
        &self.reduced
    }

    /// Row indices of the assembled polytope kept by the reduction.
    pub fn kept_rows(&self) -> &[usize] {
        &self.kept_rows
    }
}

/// Identify the active samples of the assembled scenario polytope.
/// Errors when the assembly is infeasible.
pub fn active_samples(program: &ScenarioProgram, ms: &Multisample) -> Result<ActiveSamples> {
    let assembled = program.assemble(ms)?;
    let (reduced, kept) = minimal_representation(&assembled).map_err(|e| match e {
        Error::Infeasible(_) => Error::Infeasible(
            "assembled scenario polytope is empty; the nonemptiness assumption fails here".into(),
        ),
        other => other,
    })?;
    let mut by_sample: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &row in &kept {
        if let RowProvenance::Sample { sample, .. } = assembled.provenance()[row] {
            by_sample.entry(sample).or_default().push(row);
        }
    }
    Ok(ActiveSamples {
        assembled,
        reduced,
        kept_rows: kept,
        by_sample,
    })
}

/// `v_K`: the support count with respect to the feasible set, i.e. the
/// number of active samples.
pub fn v_k(program: &ScenarioProgram, ms: &Multisample) -> Result<usize> {
    Ok(active_samples(program, ms)?.count())
}

#[derive(Debug, Clone)]
pub struct SupportCount {
    /// `s_K`, the cardinality of the support subsample found.
    pub s: usize,
    /// The supporting sample indices (a subset of the active set).
    pub supporting: Vec<usize>,
    /// The active-sample analysis the count was computed from.
    pub active: ActiveSamples,
    /// Verified full-problem solutions found on supporting facets, one per
    /// supporting sample. These sit on sample boundaries, the most
    /// violation-prone part of the solution set, and are worth merging
    /// into clouds used for out-of-sample validation.
    pub facet_solutions: Vec<(usize, Vec<f64>)>,
}

/// Count the samples whose constraint boundary carries a solution of the
/// scenario VI: for every active sample and every one of its surviving
/// facet rows, solve the VI restricted to that facet and verify the
/// candidate on the full problem. A sample counts as supporting as soon as
/// one of its facets verifies. Always `s <= |A_K| <= K`.
///
/// A solver failure on any facet is an error naming the facet; an
/// undercount is never silent.
pub fn support_cardinality(
    program: &ScenarioProgram,
    ms: &Multisample,
    mapping: &AffineMapping,
    cfg: &ExtragradientConfig,
) -> Result<SupportCount> {
    let active = active_samples(program, ms)?;
    // The reduced polytope describes the same set with far fewer rows;
    // all solves and verifications run against it.
    let problem = ViProblem::new_trusted(mapping.clone(), active.reduced().clone())?;
    let mut supporting = Vec::new();
    let mut facet_solutions = Vec::new();
    for k in active.indices() {
        for (local, (normal, offset)) in active.facets_of(k).into_iter().enumerate() {
            match solve_on_facet(&problem, &normal, offset, cfg) {
                Ok(Some(point)) => {
                    supporting.push(k);
                    facet_solutions.push((k, point));
                    break;
                }
                Ok(None) => {}
                Err(e) => {
                    return Err(Error::NumericalFailure(format!(
                        "facet solve failed on sample {k}, surviving row {local}: {e}"
                    )))
                }
            }
        }
    }
    Ok(SupportCount {
        s: supporting.len(),
        supporting,
        active,
        facet_solutions,
    })
}
