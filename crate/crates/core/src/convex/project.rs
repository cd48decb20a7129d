//! Euclidean projection onto a polytope, optionally restricted to an affine
//! slice `{ a^T x = b }`, by a primal active-set method.
//!
//! The working set holds linearly independent rows treated as equalities;
//! each pass solves the equality-constrained projection through the Gram
//! system, drops rows with negative multipliers, and walks toward the
//! anchor point under a ratio test that keeps the iterate feasible. The
//! working set is kept across calls, which makes consecutive projections
//! inside an iterative solver nearly free once the active face settles.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, sub, Matrix};

use super::lp::{find_feasible_point, lp_solve, LpStatus, Sense};
use super::polytope::Polytope;

const TOL_MULT: f64 = 1e-11;
const TOL_DIR: f64 = 1e-12;

pub struct Projector {
    rows: Matrix,
    b: Vec<f64>,
    eq: Option<(Vec<f64>, f64)>,
    /// current feasible iterate, kept across calls
    x: Vec<f64>,
    /// working set of inequality rows
    w: Vec<usize>,
    in_w: Vec<bool>,
    max_iter: usize,
}

impl Projector {
    /// Projector onto `p`. Errors when `p` is empty.
    pub fn new(p: &Polytope) -> Result<Self> {
        let Some(start) = find_feasible_point(p)? else {
            return Err(Error::Infeasible(
                "cannot project onto an empty polytope".into(),
            ));
        };
        Ok(Self::from_parts(p, None, start))
    }

    /// Projector onto `p` intersected with the hyperplane `a^T x = b`.
    /// Returns `None` when the slice is empty. The slice is probed with a
    /// relative inscribed-ball LP: inequality rows enter with the norm of
    /// their component tangential to the hyperplane, so rows parallel to it
    /// act as hard constraints on the slice.
    pub fn for_slice(p: &Polytope, a: &[f64], b: f64) -> Result<Option<Self>> {
        if a.len() != p.dim() {
            return Err(Error::DimensionMismatch {
                context: "Projector::for_slice facet normal",
                expected: p.dim(),
                found: a.len(),
            });
        }
        let nrm = norm2(a);
        if nrm <= 1e-14 {
            return Err(Error::InvalidArgument(
                "facet normal must be nonzero".into(),
            ));
        }
        let n = p.dim();
        let unit: Vec<f64> = a.iter().map(|v| v / nrm).collect();
        let mut rows = Vec::with_capacity(p.n_rows() + 2);
        let mut rhs = Vec::with_capacity(p.n_rows() + 2);
        for i in 0..p.n_rows() {
            let (ai, bi) = p.row(i);
            let along = dot(ai, &unit);
            let tang: Vec<f64> = ai.iter().zip(&unit).map(|(v, u)| v - along * u).collect();
            let mut row = ai.to_vec();
            row.push(norm2(&tang));
            rows.push(row);
            rhs.push(bi);
        }
        let mut eq_row = a.to_vec();
        eq_row.push(0.0);
        rows.push(eq_row.clone());
        rhs.push(b);
        rows.push(eq_row.iter().map(|v| -v).collect());
        rhs.push(-b);
        // cap the radius variable: only its sign matters, and without a cap
        // the probe is unbounded whenever every row is parallel to the
        // hyperplane (a zero-dimensional slice)
        let mut cap_row = vec![0.0; n];
        cap_row.push(1.0);
        rows.push(cap_row);
        rhs.push(1.0 + rhs.iter().map(|v| v.abs()).fold(0.0, f64::max));
        let ext = Polytope::from_base_rows(&rows, rhs)?;
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        let res = lp_solve(&c, &ext, Sense::Max)?;
        let scale = 1.0 + p.rhs().iter().map(|v| v.abs()).fold(0.0, f64::max);
        let start = match res.status {
            LpStatus::Optimal => {
                let r = res.value.unwrap();
                if r < -1e-9 * scale {
                    return Ok(None);
                }
                let mut x = res.point.unwrap()[..n].to_vec();
                // snap exactly onto the hyperplane
                let gap = (b - dot(a, &x)) / (nrm * nrm);
                for j in 0..n {
                    x[j] += gap * a[j];
                }
                x
            }
            LpStatus::Infeasible => return Ok(None),
            // the radius is capped, so an unbounded probe means the slice
            // itself recedes, which compact feasible sets rule out
            LpStatus::Unbounded => {
                return Err(Error::Unbounded(
                    "slice feasibility probe unbounded; add box bounds".into(),
                ))
            }
        };
        Ok(Some(Self::from_parts(p, Some((a.to_vec(), b)), start)))
    }

    fn from_parts(p: &Polytope, eq: Option<(Vec<f64>, f64)>, start: Vec<f64>) -> Self {
        Projector {
            rows: p.matrix().clone(),
            b: p.rhs().to_vec(),
            eq,
            x: start,
            w: Vec::new(),
            in_w: vec![false; p.n_rows()],
            max_iter: 50 * p.n_rows() + 2000,
        }
    }

    /// A feasible point of the (sliced) polytope.
    pub fn feasible_point(&self) -> &[f64] {
        &self.x
    }

    fn dim(&self) -> usize {
        self.rows.n_cols()
    }

    /// Equality-constrained projection of `z` onto the rows in `w` (plus the
    /// slice hyperplane): `v = z - N^T mu` with `N N^T mu = N z - b_W`.
    /// Returns `None` when the Gram matrix is numerically singular.
    fn anchor(&self, z: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = self.dim();
        let k_eq = usize::from(self.eq.is_some());
        let k = self.w.len() + k_eq;
        if k == 0 {
            return Some((z.to_vec(), Vec::new()));
        }
        let mut normals = Matrix::zeros(0, n);
        let mut offsets = Vec::with_capacity(k);
        if let Some((a, b)) = &self.eq {
            normals.push_row(a);
            offsets.push(*b);
        }
        for &i in &self.w {
            normals.push_row(self.rows.row(i));
            offsets.push(self.b[i]);
        }
        let mut gram = Matrix::zeros(k, k);
        for i in 0..k {
            for j in 0..=i {
                let g = dot(normals.row(i), normals.row(j));
                gram.set(i, j, g);
                gram.set(j, i, g);
            }
        }
        let rhs: Vec<f64> = (0..k)
            .map(|i| dot(normals.row(i), z) - offsets[i])
            .collect();
        let mu = crate::linalg::cholesky_solve(&gram, &rhs, 1e-12)?;
        let mut v = z.to_vec();
        for i in 0..k {
            let m = mu[i];
            if m == 0.0 {
                continue;
            }
            let r = normals.row(i);
            for j in 0..n {
                v[j] -= m * r[j];
            }
        }
        Some((v, mu))
    }

    /// Express `a_j` in the span of the working-set normals; used to pick a
    /// row to drop when a blocking row is linearly dependent.
    fn dependence_coefficients(&self, j: usize) -> Option<Vec<f64>> {
        let n = self.dim();
        let k_eq = usize::from(self.eq.is_some());
        let k = self.w.len() + k_eq;
        if k == 0 {
            return None;
        }
        let mut normals = Matrix::zeros(0, n);
        if let Some((a, _)) = &self.eq {
            normals.push_row(a);
        }
        for &i in &self.w {
            normals.push_row(self.rows.row(i));
        }
        let mut gram = Matrix::zeros(k, k);
        for p in 0..k {
            for q in 0..=p {
                let g = dot(normals.row(p), normals.row(q));
                gram.set(p, q, g);
                gram.set(q, p, g);
            }
        }
        let rhs: Vec<f64> = (0..k)
            .map(|p| dot(normals.row(p), self.rows.row(j)))
            .collect();
        crate::linalg::cholesky_solve(&gram, &rhs, 1e-14)
    }

    fn remove_from_w(&mut self, pos: usize) {
        let row = self.w.remove(pos);
        self.in_w[row] = false;
    }

    /// Euclidean projection of `z`.
    pub fn project(&mut self, z: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if z.len() != n {
            return Err(Error::DimensionMismatch {
                context: "Projector::project point",
                expected: n,
                found: z.len(),
            });
        }
        let scale = 1.0
            + norm2(z)
            + self.b.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let tol_feas = 1e-11 * scale;
        let tol_step = 1e-13 * scale;

        if self.eq.is_none() && self.w.is_empty() && violation_max(&self.rows, &self.b, z) <= 0.0 {
            self.x = z.to_vec();
            return Ok(self.x.clone());
        }

        let k_eq = usize::from(self.eq.is_some());
        let mut x = self.x.clone();
        for _ in 0..self.max_iter {
            let Some((v, mu)) = self.anchor(z) else {
                // singular working set: rebuild from scratch
                for i in self.w.drain(..) {
                    self.in_w[i] = false;
                }
                continue;
            };
            let p = sub(&v, &x);
            if norm2(&p) <= tol_step {
                // at the anchor: drop the most negative multiplier, if any
                let mut worst: Option<(usize, f64)> = None;
                for (pos, &m) in mu.iter().enumerate().skip(k_eq) {
                    if m < -TOL_MULT && worst.map_or(true, |(_, wm)| m < wm) {
                        worst = Some((pos - k_eq, m));
                    }
                }
                if let Some((pos, _)) = worst {
                    self.remove_from_w(pos);
                    continue;
                }
                // KKT multipliers are clean; check primal feasibility
                let mut worst_row = None;
                let mut worst_violation = tol_feas;
                for i in 0..self.rows.n_rows() {
                    if self.in_w[i] {
                        continue;
                    }
                    let viol = dot(self.rows.row(i), &v) - self.b[i];
                    if viol > worst_violation {
                        worst_violation = viol;
                        worst_row = Some(i);
                    }
                }
                let Some(j) = worst_row else {
                    self.x = v.clone();
                    return Ok(v);
                };
                if !self.try_add(j) {
                    self.drop_blocking_row(j, &mu, k_eq)?;
                }
                continue;
            }
            // ratio test along p from the feasible iterate
            let mut alpha = 1.0;
            let mut blocker = None;
            for i in 0..self.rows.n_rows() {
                if self.in_w[i] {
                    continue;
                }
                let d = dot(self.rows.row(i), &p);
                if d <= TOL_DIR {
                    continue;
                }
                let room = ((self.b[i] - dot(self.rows.row(i), &x)) / d).max(0.0);
                if room < alpha {
                    alpha = room;
                    blocker = Some(i);
                }
            }
            for j in 0..n {
                x[j] += alpha * p[j];
            }
            if let Some(i) = blocker {
                if !self.try_add(i) {
                    self.drop_blocking_row(i, &mu, k_eq)?;
                }
            }
        }
        Err(Error::NumericalFailure(format!(
            "projection active set did not settle within {} iterations",
            self.max_iter
        )))
    }

    /// Add row `j` to the working set if it keeps the normals independent.
    fn try_add(&mut self, j: usize) -> bool {
        self.w.push(j);
        self.in_w[j] = true;
        // probe the Gram factorization with the new row in place
        let probe = {
            let z = vec![0.0; self.dim()];
            self.anchor(&z).is_some()
        };
        if !probe {
            let last = self.w.pop().unwrap();
            self.in_w[last] = false;
            return false;
        }
        true
    }

    /// Blocking row `j` is dependent on the working set. Drop the working
    /// row that limits it, by the usual min-ratio rule on multipliers.
    fn drop_blocking_row(&mut self, j: usize, mu: &[f64], k_eq: usize) -> Result<()> {
        let Some(coef) = self.dependence_coefficients(j) else {
            return Err(Error::NumericalFailure(
                "projection hit a dependent row with an empty working set".into(),
            ));
        };
        let mut best: Option<(usize, f64)> = None;
        for pos in k_eq..coef.len() {
            if coef[pos] > 1e-10 {
                let lam = mu.get(pos).copied().unwrap_or(0.0);
                let ratio = lam / coef[pos];
                if best.map_or(true, |(_, r)| ratio < r) {
                    best = Some((pos - k_eq, ratio));
                }
            }
        }
        match best {
            Some((pos, _)) => {
                self.remove_from_w(pos);
                Ok(())
            }
            None => Err(Error::NumericalFailure(format!(
                "projection blocked by row {j}, dependent on the working set \
                 with no droppable member"
            ))),
        }
    }
}

fn violation_max(rows: &Matrix, b: &[f64], x: &[f64]) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for i in 0..rows.n_rows() {
        worst = worst.max(dot(rows.row(i), x) - b[i]);
    }
    worst
}

/// One-shot Euclidean projection of `z` onto `p`.
pub fn project_onto(p: &Polytope, z: &[f64]) -> Result<Vec<f64>> {
    Projector::new(p)?.project(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dist2;

    fn unit_box() -> Polytope {
        Polytope::bounding_box(&[0.0, 0.0], &[1.0, 1.0]).unwrap()
    }

    fn triangle() -> Polytope {
        crate::convex::testutil::triangle()
    }

    #[test]
    fn interior_point_is_fixed() {
        let z = vec![0.25, 0.75];
        let x = project_onto(&unit_box(), &z).unwrap();
        assert_eq!(x, z);
    }

    #[test]
    fn single_facet() {
        let x = project_onto(&unit_box(), &[2.0, 0.5]).unwrap();
        assert!(dist2(&x, &[1.0, 0.5]) < 1e-10);
    }

    #[test]
    fn corner() {
        let x = project_onto(&unit_box(), &[2.0, -3.0]).unwrap();
        assert!(dist2(&x, &[1.0, 0.0]) < 1e-10);
    }

    #[test]
    fn triangle_apex() {
        // Everything above the apex normal fan lands on the apex.
        let x = project_onto(&triangle(), &[0.5, 2.0]).unwrap();
        assert!(dist2(&x, &[0.5, 1.0]) < 1e-9, "{x:?}");
    }

    #[test]
    fn duplicated_rows_are_harmless() {
        let b = unit_box();
        let doubled = b
            .stacked(b.matrix(), b.rhs(), b.provenance())
            .unwrap();
        let x = project_onto(&doubled, &[2.0, -3.0]).unwrap();
        assert!(dist2(&x, &[1.0, 0.0]) < 1e-10);
    }

    #[test]
    fn empty_polytope_errors() {
        let empty =
            Polytope::from_base_rows(&[vec![1.0], vec![-1.0]], vec![0.0, -1.0]).unwrap();
        assert!(matches!(
            project_onto(&empty, &[0.3]),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn warm_start_reuses_active_set() {
        let mut proj = Projector::new(&triangle()).unwrap();
        for k in 0..50 {
            let t = k as f64 / 49.0;
            let z = [t, -1.0 - t];
            let x = proj.project(&z).unwrap();
            assert!((x[1] - 0.0).abs() < 1e-10);
            assert!((x[0] - t.clamp(0.0, 1.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn slice_projection_stays_on_hyperplane() {
        // triangle sliced at x2 = 1/2
        let mut proj = Projector::for_slice(&triangle(), &[0.0, 1.0], 0.5)
            .unwrap()
            .unwrap();
        let x = proj.project(&[0.9, 0.1]).unwrap();
        assert!((x[1] - 0.5).abs() < 1e-10);
        // clipped to the right edge of the slice segment [1/4, 3/4]
        assert!((x[0] - 0.75).abs() < 1e-9, "{x:?}");
    }

    #[test]
    fn empty_slice_detected() {
        // hyperplane x2 = 2 misses the triangle entirely
        assert!(Projector::for_slice(&triangle(), &[0.0, 1.0], 2.0)
            .unwrap()
            .is_none());
    }

    #[test]
    fn kkt_certificate_holds_on_random_cases() {
        use rand::Rng;
        let mut rng = crate::rng::stream(11, "proj-kkt", 0);
        let p = triangle();
        let mut proj = Projector::new(&p).unwrap();
        for _ in 0..200 {
            let z = [rng.gen::<f64>() * 4.0 - 2.0, rng.gen::<f64>() * 4.0 - 2.0];
            let x = proj.project(&z).unwrap();
            assert!(p.contains(&x, 1e-9));
            // optimality through the variational inequality of projections:
            // (z - x)^T (y - x) <= tol for all vertices y
            for y in [[0.0, 0.0], [1.0, 0.0], [0.5, 1.0]] {
                let gap = dot(&sub(&z, &x), &sub(&y, &x));
                assert!(gap <= 1e-8, "gap {gap} at z {z:?}");
            }
        }
    }
}
