//! Dense linear programming over polytopes.
//!
//! `max c^T x  s.t.  A x <= b` with free `x` is solved through its dual in
//! standard form, `min b^T y  s.t.  A^T y = c, y >= 0`, with a two-phase
//! tableau simplex under Bland's anti-cycling rule. The primal point is
//! recovered from the simplex multipliers, which at optimality satisfy
//! `a_j^T pi <= b_j` for every row with `c^T pi` equal to the dual value.
//! Sizes here are desk scale; a dense tableau is the right tool.

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

use super::polytope::Polytope;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

/// Outcome of an LP solve. `point` and `value` are present iff `status` is
/// `Optimal`; a numerical stall is reported as an error, never as a status.
#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    pub point: Option<Vec<f64>>,
    pub value: Option<f64>,
}

impl LpResult {
    fn status_only(status: LpStatus) -> Self {
        LpResult {
            status,
            point: None,
            value: None,
        }
    }
}

const TOL_COST: f64 = 1e-9;
const TOL_PIVOT: f64 = 1e-9;
const TOL_PHASE1: f64 = 1e-8;

enum StdOutcome {
    /// Dual value plus simplex multipliers (one per equality row).
    Optimal { value: f64, multipliers: Vec<f64> },
    Infeasible,
    Unbounded,
}

/// Two-phase simplex for `min w^T y  s.t.  D y = rhs, y >= 0`.
struct StandardSimplex {
    n_eq: usize,
    width: usize, // n_var + n_eq artificials + 1 rhs column
    t: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    /// sign applied to each row to make the rhs nonnegative; the recovered
    /// multipliers refer to the flipped rows and must be unflipped
    flips: Vec<f64>,
    pivots: usize,
    max_pivots: usize,
}

impl StandardSimplex {
    fn new(d: &Matrix, rhs: &[f64], max_pivots: usize) -> Self {
        let n_eq = d.n_rows();
        let n_var = d.n_cols();
        let width = n_var + n_eq + 1;
        let mut t = vec![0.0; n_eq * width];
        let mut flips = vec![1.0; n_eq];
        for i in 0..n_eq {
            let flip = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
            flips[i] = flip;
            let row = d.row(i);
            for j in 0..n_var {
                t[i * width + j] = flip * row[j];
            }
            t[i * width + n_var + i] = 1.0;
            t[i * width + width - 1] = flip * rhs[i];
        }
        StandardSimplex {
            n_eq,
            width,
            t,
            obj: vec![0.0; width],
            basis: (0..n_eq).map(|i| n_var + i).collect(),
            flips,
            pivots: 0,
            max_pivots,
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    /// Rebuild the reduced-cost row `r_j = w_j - w_B^T B^{-1} D_j` for the
    /// given costs; the last cell holds minus the objective value.
    fn rebuild_objective(&mut self, w: impl Fn(usize) -> f64) {
        for j in 0..self.width {
            self.obj[j] = if j + 1 == self.width { 0.0 } else { w(j) };
        }
        for i in 0..self.n_eq {
            let wb = w(self.basis[i]);
            if wb == 0.0 {
                continue;
            }
            for j in 0..self.width {
                self.obj[j] -= wb * self.t[i * self.width + j];
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let d = self.t[row * w + col];
        for j in 0..w {
            self.t[row * w + j] /= d;
        }
        self.t[row * w + col] = 1.0;
        for i in 0..self.n_eq {
            if i == row {
                continue;
            }
            let f = self.t[i * w + col];
            if f == 0.0 {
                continue;
            }
            for j in 0..w {
                self.t[i * w + j] -= f * self.t[row * w + j];
            }
            self.t[i * w + col] = 0.0;
        }
        let f = self.obj[col];
        if f != 0.0 {
            for j in 0..w {
                self.obj[j] -= f * self.t[row * w + j];
            }
            self.obj[col] = 0.0;
        }
        self.basis[row] = col;
        // keep the rhs column nonnegative against rounding drift
        for i in 0..self.n_eq {
            let v = &mut self.t[i * w + w - 1];
            if *v < 0.0 && *v > -1e-9 {
                *v = 0.0;
            }
        }
    }

    /// Run Bland-rule pivoting until optimal or unbounded. `allowed` limits
    /// which columns may enter (artificials are barred in phase two).
    fn run(&mut self, n_enterable: usize) -> Result<bool> {
        loop {
            // entering: lowest index with negative reduced cost (Bland)
            let mut enter = None;
            for j in 0..n_enterable {
                if self.obj[j] < -TOL_COST {
                    enter = Some(j);
                    break;
                }
            }
            let Some(col) = enter else {
                return Ok(true);
            };
            // leaving: min ratio, ties broken by smallest basis index (Bland)
            let w = self.width;
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.n_eq {
                let piv = self.at(i, col);
                if piv <= TOL_PIVOT {
                    continue;
                }
                let ratio = self.at(i, w - 1).max(0.0) / piv;
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((best_i, best)) => {
                        if ratio < best - 1e-12
                            || ((ratio - best).abs() <= 1e-12
                                && self.basis[i] < self.basis[best_i])
                        {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Ok(false); // unbounded direction
            };
            self.pivot(row, col);
            self.pivots += 1;
            if self.pivots > self.max_pivots {
                return Err(Error::NumericalFailure(format!(
                    "simplex exceeded {} pivots",
                    self.max_pivots
                )));
            }
        }
    }

    fn objective_value(&self) -> f64 {
        -self.obj[self.width - 1]
    }
}

/// Solve `min w^T y  s.t.  D y = rhs, y >= 0`.
fn solve_standard(d: &Matrix, rhs: &[f64], w: &[f64]) -> Result<StdOutcome> {
    let n_eq = d.n_rows();
    let n_var = d.n_cols();
    debug_assert_eq!(rhs.len(), n_eq);
    debug_assert_eq!(w.len(), n_var);
    let max_pivots = 200 * (n_eq + n_var) + 10_000;
    let mut s = StandardSimplex::new(d, rhs, max_pivots);

    // Phase one: minimize the sum of artificials.
    s.rebuild_objective(|j| if j < n_var { 0.0 } else { 1.0 });
    if !s.run(n_var + n_eq)? {
        return Err(Error::NumericalFailure(
            "phase-one objective unbounded".into(),
        ));
    }
    let scale = 1.0 + rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if s.objective_value() > TOL_PHASE1 * scale {
        return Ok(StdOutcome::Infeasible);
    }
    // Drive basic artificials out where a real pivot exists. Rows that offer
    // none are dependent: they stay inert (all-zero over real columns, rhs 0),
    // and their artificial keeps multiplier slot i alive.
    for i in 0..n_eq {
        if s.basis[i] < n_var {
            continue;
        }
        let mut col = None;
        for j in 0..n_var {
            if s.at(i, j).abs() > TOL_PIVOT {
                col = Some(j);
                break;
            }
        }
        if let Some(j) = col {
            s.pivot(i, j);
        }
    }

    // Phase two with the real costs; artificial columns may not re-enter.
    s.rebuild_objective(|j| if j < n_var { w[j] } else { 0.0 });
    if !s.run(n_var)? {
        return Ok(StdOutcome::Unbounded);
    }
    let multipliers = (0..n_eq).map(|i| -s.obj[n_var + i] * s.flips[i]).collect();
    Ok(StdOutcome::Optimal {
        value: s.objective_value(),
        multipliers,
    })
}

/// Solve `max/min c^T x  s.t.  x in P` with `x` free.
pub fn lp_solve(c: &[f64], p: &Polytope, sense: Sense) -> Result<LpResult> {
    if c.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            context: "lp_solve objective length vs polytope dimension",
            expected: p.dim(),
            found: c.len(),
        });
    }
    match sense {
        Sense::Max => lp_max(c, p),
        Sense::Min => {
            let neg: Vec<f64> = c.iter().map(|v| -v).collect();
            let mut res = lp_max(&neg, p)?;
            res.value = res.value.map(|v| -v);
            Ok(res)
        }
    }
}

fn lp_max(c: &[f64], p: &Polytope) -> Result<LpResult> {
    let n = p.dim();
    let m = p.n_rows();
    if m == 0 {
        // No constraints: optimal only for the zero objective.
        return if c.iter().all(|&v| v == 0.0) {
            Ok(LpResult {
                status: LpStatus::Optimal,
                point: Some(vec![0.0; n]),
                value: Some(0.0),
            })
        } else {
            Ok(LpResult::status_only(LpStatus::Unbounded))
        };
    }
    let at = p.matrix().transpose();
    match solve_standard(&at, c, p.rhs())? {
        StdOutcome::Optimal { multipliers, .. } => {
            let value = dot(c, &multipliers);
            let feas = p.max_violation(&multipliers);
            let scale = 1.0 + p.rhs().iter().map(|v| v.abs()).fold(0.0, f64::max);
            if feas > 1e-6 * scale {
                return Err(Error::NumericalFailure(format!(
                    "simplex multiplier point violates a row by {feas:.3e}"
                )));
            }
            Ok(LpResult {
                status: LpStatus::Optimal,
                point: Some(multipliers),
                value: Some(value),
            })
        }
        // Dual unbounded below certifies primal infeasibility by weak duality.
        StdOutcome::Unbounded => Ok(LpResult::status_only(LpStatus::Infeasible)),
        StdOutcome::Infeasible => {
            // No y >= 0 with A^T y = c: the primal is unbounded if feasible.
            if polytope_is_nonempty(p)? {
                Ok(LpResult::status_only(LpStatus::Unbounded))
            } else {
                Ok(LpResult::status_only(LpStatus::Infeasible))
            }
        }
    }
}

/// Emptiness test via the "depth" LP `max t  s.t.  A x + t 1 <= b`, whose
/// dual is `min b^T y  s.t.  A^T y = 0, 1^T y = 1, y >= 0` over the unit
/// simplex. The polytope is nonempty iff that dual is infeasible or its
/// optimum is nonnegative.
fn polytope_is_nonempty(p: &Polytope) -> Result<bool> {
    let n = p.dim();
    let m = p.n_rows();
    let mut d = Matrix::zeros(0, m);
    let at = p.matrix().transpose();
    for i in 0..n {
        d.push_row(at.row(i));
    }
    d.push_row(&vec![1.0; m]);
    let mut rhs = vec![0.0; n];
    rhs.push(1.0);
    match solve_standard(&d, &rhs, p.rhs())? {
        StdOutcome::Optimal { value, .. } => {
            let scale = 1.0 + p.rhs().iter().map(|v| v.abs()).fold(0.0, f64::max);
            Ok(value >= -1e-9 * scale)
        }
        StdOutcome::Infeasible => Ok(true),
        StdOutcome::Unbounded => Err(Error::NumericalFailure(
            "simplex reported an unbounded objective over the unit simplex".into(),
        )),
    }
}

/// Some point of `P`, or `None` when `P` is empty. Works for unbounded sets.
pub fn find_feasible_point(p: &Polytope) -> Result<Option<Vec<f64>>> {
    let res = lp_solve(&vec![0.0; p.dim()], p, Sense::Max)?;
    match res.status {
        LpStatus::Optimal => Ok(res.point),
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(Error::NumericalFailure(
            "feasibility probe returned an unbounded status for a zero objective".into(),
        )),
    }
}

/// Center and radius of a largest inscribed ball, via one LP in (x, r).
/// A negative radius signals an empty polytope, zero an empty interior.
/// An unbounded inscribed ball is an error: compact feasible sets are
/// expected, so callers must include explicit box bounds.
pub fn chebyshev_center(p: &Polytope) -> Result<(Vec<f64>, f64)> {
    let n = p.dim();
    let m = p.n_rows();
    if m == 0 {
        return Err(Error::Unbounded(
            "chebyshev_center of the whole space; add box bounds".into(),
        ));
    }
    let norms = p.row_norms();
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let (a, _) = p.row(i);
        let mut row = a.to_vec();
        row.push(norms[i]);
        rows.push(row);
    }
    let ext = Polytope::from_base_rows(&rows, p.rhs().to_vec())?;
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let res = lp_solve(&c, &ext, Sense::Max)?;
    match res.status {
        LpStatus::Optimal => {
            let pt = res.point.unwrap();
            Ok((pt[..n].to_vec(), pt[n]))
        }
        LpStatus::Unbounded => Err(Error::Unbounded(
            "inscribed ball radius is unbounded; add box bounds to the polytope".into(),
        )),
        // Only reachable with a contradictory zero row; no ball of any radius.
        LpStatus::Infeasible => Ok((vec![0.0; n], f64::NEG_INFINITY)),
    }
}

/// True when `P` is bounded: no nonzero recession direction `A d <= 0`.
/// Probes the recession cone boxed to `[-1, 1]^n` along both coordinate
/// directions; any positive optimum scales to an unbounded ray.
pub fn is_bounded(p: &Polytope) -> Result<bool> {
    let n = p.dim();
    let mut rows = Vec::with_capacity(p.n_rows());
    for i in 0..p.n_rows() {
        rows.push(p.row(i).0.to_vec());
    }
    let mut rec = Polytope::from_base_rows(&rows, vec![0.0; p.n_rows()])?;
    let lo = vec![-1.0; n];
    let hi = vec![1.0; n];
    let boxp = Polytope::bounding_box(&lo, &hi)?;
    rec = rec.stacked(
        boxp.matrix(),
        boxp.rhs(),
        boxp.provenance(),
    )?;
    for j in 0..n {
        for sign in [1.0, -1.0] {
            let mut c = vec![0.0; n];
            c[j] = sign;
            let res = lp_solve(&c, &rec, Sense::Max)?;
            match res.status {
                LpStatus::Optimal => {
                    if res.value.unwrap() > 1e-7 {
                        return Ok(false);
                    }
                }
                _ => {
                    return Err(Error::NumericalFailure(
                        "recession probe LP did not solve".into(),
                    ))
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    use crate::convex::testutil::triangle;

    fn unit_box() -> Polytope {
        Polytope::bounding_box(&[0.0, 0.0], &[1.0, 1.0]).unwrap()
    }

    #[test]
    fn box_maximum() {
        let res = lp_solve(&[1.0, 1.0], &unit_box(), Sense::Max).unwrap();
        assert_eq!(res.status, LpStatus::Optimal);
        assert!((res.value.unwrap() - 2.0).abs() < 1e-9);
        let pt = res.point.unwrap();
        assert!((pt[0] - 1.0).abs() < 1e-9 && (pt[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_bounds_infeasible() {
        // x <= 0 and x >= 1
        let p = Polytope::from_base_rows(&[vec![1.0], vec![-1.0]], vec![0.0, -1.0]).unwrap();
        let res = lp_solve(&[1.0], &p, Sense::Max).unwrap();
        assert_eq!(res.status, LpStatus::Infeasible);
    }

    #[test]
    fn triangle_apex() {
        // Max x2 over the triangle; vertices are (0,0), (1,0), (1/2,1),
        // so the optimum is 1 at the apex.
        let res = lp_solve(&[0.0, 1.0], &triangle(), Sense::Max).unwrap();
        assert_eq!(res.status, LpStatus::Optimal);
        assert!((res.value.unwrap() - 1.0).abs() < 1e-7);
        let pt = res.point.unwrap();
        assert!((pt[0] - 0.5).abs() < 1e-7 && (pt[1] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn min_sense_flips() {
        let res = lp_solve(&[1.0, 0.0], &unit_box(), Sense::Min).unwrap();
        assert_eq!(res.status, LpStatus::Optimal);
        assert!(res.value.unwrap().abs() < 1e-9);
    }

    #[test]
    fn halfspace_unbounded() {
        let p = Polytope::from_base_rows(&[vec![-1.0]], vec![0.0]).unwrap(); // x >= 0
        let res = lp_solve(&[1.0], &p, Sense::Max).unwrap();
        assert_eq!(res.status, LpStatus::Unbounded);
        // but minimizing is fine
        let res = lp_solve(&[1.0], &p, Sense::Min).unwrap();
        assert_eq!(res.status, LpStatus::Optimal);
        assert!(res.value.unwrap().abs() < 1e-9);
    }

    #[test]
    fn feasible_point_probe() {
        assert!(find_feasible_point(&unit_box()).unwrap().is_some());
        let empty =
            Polytope::from_base_rows(&[vec![1.0], vec![-1.0]], vec![0.0, -1.0]).unwrap();
        assert!(find_feasible_point(&empty).unwrap().is_none());
        // unbounded but nonempty
        let half = Polytope::from_base_rows(&[vec![-1.0, 0.0]], vec![0.0]).unwrap();
        let pt = find_feasible_point(&half).unwrap().unwrap();
        assert!(pt[0] >= -1e-9);
    }

    #[test]
    fn chebyshev_of_box() {
        let (c, r) = chebyshev_center(&unit_box()).unwrap();
        assert!((r - 0.5).abs() < 1e-8);
        assert!((c[0] - 0.5).abs() < 1e-8 && (c[1] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn chebyshev_flags_infeasible() {
        let empty =
            Polytope::from_base_rows(&[vec![1.0], vec![-1.0]], vec![0.0, -1.0]).unwrap();
        let (_, r) = chebyshev_center(&empty).unwrap();
        assert!(r < 0.0);
    }

    #[test]
    fn chebyshev_of_triangle_matches_incircle() {
        // Area 1/2, semiperimeter (1 + sqrt(5))/2, so r = 1/(1 + sqrt(5)).
        let r_expect = 1.0 / (1.0 + 5f64.sqrt());
        let (c, r) = chebyshev_center(&triangle()).unwrap();
        assert!((r - r_expect).abs() < 1e-8, "r = {r}");
        assert!((c[0] - 0.5).abs() < 1e-8);
        assert!((c[1] - r_expect).abs() < 1e-8);
    }

    #[test]
    fn chebyshev_unbounded_errors() {
        let half = Polytope::from_base_rows(&[vec![-1.0, 0.0]], vec![0.0]).unwrap();
        assert!(matches!(
            chebyshev_center(&half),
            Err(Error::Unbounded(_))
        ));
    }

    #[test]
    fn boundedness_probe() {
        assert!(is_bounded(&unit_box()).unwrap());
        assert!(is_bounded(&triangle()).unwrap());
        let slab =
            Polytope::from_base_rows(&[vec![1.0, 0.0], vec![-1.0, 0.0]], vec![1.0, 0.0]).unwrap();
        assert!(!is_bounded(&slab).unwrap());
    }

    #[test]
    fn degenerate_duplicate_rows_still_solve() {
        let mut rows = Vec::new();
        let mut b = Vec::new();
        for _ in 0..2 {
            rows.push(vec![1.0, 0.0]);
            b.push(1.0);
            rows.push(vec![-1.0, 0.0]);
            b.push(0.0);
            rows.push(vec![0.0, 1.0]);
            b.push(1.0);
            rows.push(vec![0.0, -1.0]);
            b.push(0.0);
        }
        let p = Polytope::from_base_rows(&rows, b).unwrap();
        let res = lp_solve(&[1.0, 2.0], &p, Sense::Max).unwrap();
        assert_eq!(res.status, LpStatus::Optimal);
        assert!((res.value.unwrap() - 3.0).abs() < 1e-8);
    }

    #[test]
    fn rank_deficient_objective_direction() {
        // Constraints only touch x1; maximizing x2 must report unbounded,
        // minimizing -x1 must still solve.
        let p = Polytope::from_base_rows(&[vec![1.0, 0.0], vec![-1.0, 0.0]], vec![1.0, 0.0])
            .unwrap();
        let res = lp_solve(&[0.0, 1.0], &p, Sense::Max).unwrap();
        assert_eq!(res.status, LpStatus::Unbounded);
        let res = lp_solve(&[1.0, 0.0], &p, Sense::Max).unwrap();
        assert_eq!(res.status, LpStatus::Optimal);
        assert!((res.value.unwrap() - 1.0).abs() < 1e-9);
    }
}
