//! The affine variational-inequality problem type, its extragradient
//! solver, solution verification through the natural residual, and the
//! facet-restricted solve used by the support-subsample search.

use serde::de::Error as DeError;
use serde::{Deserialize, Serialize};

use crate::convex::{find_feasible_point, is_bounded, Polytope, Projector};
use crate::error::{Error, Result};
use crate::hash::Hasher;
use crate::linalg::dist2;

use super::mapping::AffineMapping;

/// A variational inequality over a nonempty compact polytope: find
/// `x* in X` with `(y - x*)^T F(x*) >= 0` for all `y in X`.
#[derive(Debug, Clone)]
pub struct ViProblem {
    mapping: AffineMapping,
    feasible: Polytope,
    interior: Vec<f64>,
}

impl ViProblem {
    /// Validates dimensions, nonemptiness and boundedness. Unbounded sets
    /// are rejected: add explicit box bounds to the constraint system.
    pub fn new(mapping: AffineMapping, feasible: Polytope) -> Result<Self> {
        let p = Self::new_trusted(mapping, feasible)?;
        if !is_bounded(&p.feasible)? {
            return Err(Error::Unbounded(
                "the feasible polytope is unbounded; add explicit box bounds".into(),
            ));
        }
        Ok(p)
    }

    /// Same checks except boundedness; for internal pipelines where the set
    /// is an intersection of an already-validated compact set with extra
    /// halfspaces, so compactness is inherited.
    pub(crate) fn new_trusted(mapping: AffineMapping, feasible: Polytope) -> Result<Self> {
        if mapping.dim() != feasible.dim() {
            return Err(Error::DimensionMismatch {
                context: "ViProblem mapping vs polytope dimension",
                expected: feasible.dim(),
                found: mapping.dim(),
            });
        }
        let Some(interior) = find_feasible_point(&feasible)? else {
            return Err(Error::Infeasible(
                "the feasible polytope of a ViProblem must be nonempty".into(),
            ));
        };
        Ok(ViProblem {
            mapping,
            feasible,
            interior,
        })
    }

    pub fn mapping(&self) -> &AffineMapping {
        &self.mapping
    }

    pub fn feasible(&self) -> &Polytope {
        &self.feasible
    }

    pub fn dim(&self) -> usize {
        self.mapping.dim()
    }

    /// A point of the feasible set found at construction.
    pub fn feasible_point(&self) -> &[f64] {
        &self.interior
    }

    pub fn hash_hex(&self) -> String {
        let mut h = Hasher::new();
        self.mapping.feed_hash(&mut h);
        self.feasible.feed_hash(&mut h);
        h.finish_hex()
    }
}

/// Extragradient parameters. `step` must lie in `(0, 1/L)`; when absent it
/// defaults to `0.9/L`, or to 1 for a constant mapping (`L = 0`, where any
/// positive step works). `max_iter` defaults to `50 n + 10000`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtragradientConfig {
    pub step: Option<f64>,
    pub tol: f64,
    pub max_iter: Option<usize>,
}

impl Default for ExtragradientConfig {
    fn default() -> Self {
        ExtragradientConfig {
            step: None,
            tol: 1e-6,
            max_iter: None,
        }
    }
}

impl ExtragradientConfig {
    pub fn with_tol(tol: f64) -> Self {
        ExtragradientConfig {
            tol,
            ..Default::default()
        }
    }

    /// Resolve (step, tol, max_iter) for a concrete problem.
    pub fn resolve(&self, p: &ViProblem) -> Result<(f64, f64, usize)> {
        let lip = p.mapping().lipschitz_upper_bound();
        let step = match self.step {
            Some(s) => {
                if s <= 0.0 || (lip > 0.0 && s >= 1.0 / lip) {
                    return Err(Error::InvalidArgument(format!(
                        "step {s} outside the admissible interval (0, {})",
                        if lip > 0.0 { 1.0 / lip } else { f64::INFINITY }
                    )));
                }
                s
            }
            None => {
                if lip <= 1e-12 {
                    1.0
                } else {
                    0.9 / lip
                }
            }
        };
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        let max_iter = self.max_iter.unwrap_or(50 * p.dim() + 10_000);
        Ok((step, self.tol, max_iter))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResult {
    pub point: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// The two-projection extragradient iteration
/// `x_{k+1/2} = proj(x_k - step F(x_k))`,
/// `x_{k+1}   = proj(x_k - step F(x_{k+1/2}))`,
/// stopping when the natural residual `||x_k - x_{k+1/2}||` falls to `tol`.
fn extragradient_loop(
    projector: &mut Projector,
    mapping: &AffineMapping,
    x0: &[f64],
    step: f64,
    tol: f64,
    max_iter: usize,
) -> Result<SolveResult> {
    let mut x = x0.to_vec();
    let mut residual = f64::INFINITY;
    for k in 0..max_iter {
        let f = mapping.evaluate(&x)?;
        let z_half: Vec<f64> = x.iter().zip(&f).map(|(xi, fi)| xi - step * fi).collect();
        let x_half = projector.project(&z_half)?;
        residual = dist2(&x, &x_half);
        if residual <= tol {
            return Ok(SolveResult {
                point: x,
                residual,
                iterations: k,
                converged: true,
            });
        }
        let f_half = mapping.evaluate(&x_half)?;
        let z_full: Vec<f64> = x
            .iter()
            .zip(&f_half)
            .map(|(xi, fi)| xi - step * fi)
            .collect();
        x = projector.project(&z_full)?;
    }
    Ok(SolveResult {
        point: x,
        residual,
        iterations: max_iter,
        converged: false,
    })
}

/// Solve the VI from `x0` (projected first when infeasible).
pub fn extragradient_solve(
    p: &ViProblem,
    x0: &[f64],
    cfg: &ExtragradientConfig,
) -> Result<SolveResult> {
    if x0.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            context: "extragradient_solve start point",
            expected: p.dim(),
            found: x0.len(),
        });
    }
    let (step, tol, max_iter) = cfg.resolve(p)?;
    let mut projector = Projector::new(p.feasible())?;
    let start = if p.feasible().contains(x0, 0.0) {
        x0.to_vec()
    } else {
        projector.project(x0)?
    };
    extragradient_loop(&mut projector, p.mapping(), &start, step, tol, max_iter)
}

/// `||x - proj_X(x - gamma F(x))||`; zero exactly at solutions.
pub fn natural_residual(p: &ViProblem, x: &[f64], gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(
            "natural_residual needs gamma > 0".into(),
        ));
    }
    if x.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            context: "natural_residual point",
            expected: p.dim(),
            found: x.len(),
        });
    }
    let f = p.mapping().evaluate(x)?;
    let z: Vec<f64> = x.iter().zip(&f).map(|(xi, fi)| xi - gamma * fi).collect();
    let proj = crate::convex::project_onto(p.feasible(), &z)?;
    Ok(dist2(x, &proj))
}

/// Feasible within `tol` and natural residual at most `tol`, evaluated at
/// the same `gamma` the solver stepped with.
pub fn is_solution(p: &ViProblem, x: &[f64], tol: f64, gamma: f64) -> Result<bool> {
    if x.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            context: "is_solution point",
            expected: p.dim(),
            found: x.len(),
        });
    }
    if !p.feasible().contains(x, tol) {
        return Ok(false);
    }
    Ok(natural_residual(p, x, gamma)? <= tol)
}

/// Solve the VI restricted to `feasible ∩ {a^T x = b}` and verify the
/// candidate against the full problem. Returns `None` when the slice is
/// empty or when the slice solution is not a solution of the full VI; a
/// solver that fails to converge is an error, never a silent `None`.
pub fn solve_on_facet(
    p: &ViProblem,
    facet_normal: &[f64],
    facet_offset: f64,
    cfg: &ExtragradientConfig,
) -> Result<Option<Vec<f64>>> {
    let (step, tol, max_iter) = cfg.resolve(p)?;
    let Some(mut projector) = Projector::for_slice(p.feasible(), facet_normal, facet_offset)?
    else {
        return Ok(None);
    };
    let start = projector.feasible_point().to_vec();
    // solve the slice tighter than the verification tolerance
    let run = extragradient_loop(
        &mut projector,
        p.mapping(),
        &start,
        step,
        tol * 0.1,
        max_iter,
    )?;
    if !run.converged {
        return Err(Error::NumericalFailure(format!(
            "facet solve stalled at residual {:.3e} after {} iterations",
            run.residual, run.iterations
        )));
    }
    if is_solution(p, &run.point, tol, step)? {
        Ok(Some(run.point))
    } else {
        Ok(None)
    }
}

// JSON transport: {"M": [[...]], "q": [...], "polytope": {...}}. A
// deserialized problem passes the full constructor checks.
#[derive(Serialize, Deserialize)]
struct ProblemJson {
    #[serde(rename = "M")]
    m: Vec<Vec<String>>,
    q: Vec<String>,
    polytope: Polytope,
}

impl Serialize for ViProblem {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use crate::convex::polytope::f64_to_string;
        let m = (0..self.mapping.matrix().n_rows())
            .map(|i| {
                self.mapping
                    .matrix()
                    .row(i)
                    .iter()
                    .map(|&v| f64_to_string(v))
                    .collect()
            })
            .collect();
        let q = self.mapping.offset().iter().map(|&v| f64_to_string(v)).collect();
        ProblemJson {
            m,
            q,
            polytope: self.feasible.clone(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ViProblem {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use crate::convex::polytope::f64_from_string;
        let raw = ProblemJson::deserialize(de)?;
        let mut rows = Vec::with_capacity(raw.m.len());
        for r in &raw.m {
            let mut row = Vec::with_capacity(r.len());
            for s in r {
                row.push(f64_from_string(s).map_err(D::Error::custom)?);
            }
            rows.push(row);
        }
        let mut q = Vec::with_capacity(raw.q.len());
        for s in &raw.q {
            q.push(f64_from_string(s).map_err(D::Error::custom)?);
        }
        let m = crate::linalg::Matrix::from_rows(&rows).map_err(D::Error::custom)?;
        let mapping = AffineMapping::new(m, q).map_err(D::Error::custom)?;
        ViProblem::new(mapping, raw.polytope).map_err(D::Error::custom)
    }
}
