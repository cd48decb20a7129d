//! Affine mappings `F(x) = M x + q` and their spectral properties.

use serde::de::Error as DeError;
use serde::{Deserialize, Serialize};

use crate::convex::polytope::{f64_from_string, f64_to_string};
use crate::error::{Error, Result};
use crate::hash::Hasher;
use crate::linalg::{dot, norm2, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct AffineMapping {
    m: Matrix,
    q: Vec<f64>,
}

/// Classification of `F` by the smallest eigenvalue of `(M + M^T)/2`.
/// `Indefinite` does not rule out pseudomonotonicity, which is not decidable
/// here; using such a mapping is the caller's responsibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Monotonicity {
    StronglyMonotone { modulus: f64 },
    Monotone,
    Indefinite,
}

impl AffineMapping {
    pub fn new(m: Matrix, q: Vec<f64>) -> Result<Self> {
        if m.n_rows() != m.n_cols() {
            return Err(Error::DimensionMismatch {
                context: "AffineMapping M must be square",
                expected: m.n_rows(),
                found: m.n_cols(),
            });
        }
        if q.len() != m.n_rows() {
            return Err(Error::DimensionMismatch {
                context: "AffineMapping q length vs M",
                expected: m.n_rows(),
                found: q.len(),
            });
        }
        Ok(AffineMapping { m, q })
    }

    /// F(x) = c, constant.
    pub fn constant(q: Vec<f64>) -> Self {
        let n = q.len();
        AffineMapping {
            m: Matrix::zeros(n, n),
            q,
        }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn offset(&self) -> &[f64] {
        &self.q
    }

    /// `M x + q`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "AffineMapping::evaluate",
                expected: self.dim(),
                found: x.len(),
            });
        }
        let mut out = self.m.matvec(x);
        for (o, qi) in out.iter_mut().zip(&self.q) {
            *o += qi;
        }
        Ok(out)
    }

    /// Upper bound on the Lipschitz constant, i.e. on the spectral norm of
    /// `M`: power iteration on `M^T M` to relative tolerance 1e-6, inflated
    /// by 1e-6 so the returned value errs on the safe side of a step-size
    /// denominator.
    pub fn lipschitz_upper_bound(&self) -> f64 {
        let n = self.dim();
        if n == 0 {
            return 0.0;
        }
        let apply = |v: &[f64]| self.m.tr_matvec(&self.m.matvec(v));
        let lambda = dominant_eigenvalue(apply, n, 1e-6, 50_000);
        lambda.max(0.0).sqrt() * (1.0 + 1e-6)
    }

    /// Classify by the smallest eigenvalue of the symmetric part, computed
    /// by power iteration on the shifted operator `s I - S` with
    /// `s = ||S||_inf >= lambda_max(S)`.
    pub fn monotonicity_classify(&self) -> Monotonicity {
        let n = self.dim();
        let mut s_mat = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                s_mat.set(i, j, 0.5 * (self.m.get(i, j) + self.m.get(j, i)));
            }
        }
        let shift = s_mat.norm_inf();
        let tol_eig = 1e-8 * shift.max(1.0);
        if shift == 0.0 {
            return Monotonicity::Monotone;
        }
        let apply = |v: &[f64]| {
            let mut w = s_mat.matvec(v);
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi = shift * vi - *wi;
            }
            w
        };
        let lambda_shifted = dominant_eigenvalue(apply, n, 1e-10, 100_000);
        let lambda_min = shift - lambda_shifted;
        if lambda_min > tol_eig {
            Monotonicity::StronglyMonotone { modulus: lambda_min }
        } else if lambda_min >= -tol_eig {
            Monotonicity::Monotone
        } else {
            Monotonicity::Indefinite
        }
    }

    pub fn feed_hash(&self, h: &mut Hasher) {
        h.usize(self.dim());
        for i in 0..self.m.n_rows() {
            h.f64s(self.m.row(i));
        }
        h.f64s(&self.q);
    }
}

/// Largest eigenvalue of a symmetric positive semidefinite operator by
/// power iteration with a Rayleigh-quotient stop. Deterministic starts; a
/// zero image means the operator annihilates both probes, so 0 is returned.
fn dominant_eigenvalue(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    n: usize,
    rel_tol: f64,
    max_iter: usize,
) -> f64 {
    let starts: [fn(usize, usize) -> f64; 2] = [
        |i, n| 1.0 + i as f64 / n as f64,
        |i, _| if i % 2 == 0 { 1.0 } else { -0.5 },
    ];
    for start in starts {
        let mut v: Vec<f64> = (0..n).map(|i| start(i, n)).collect();
        let nv = norm2(&v);
        for vi in v.iter_mut() {
            *vi /= nv;
        }
        let mut lambda = 0.0;
        let mut alive = false;
        for _ in 0..max_iter {
            let w = apply(&v);
            let nw = norm2(&w);
            if nw <= 1e-300 {
                break;
            }
            alive = true;
            lambda = dot(&v, &w);
            let mut resid = 0.0;
            for (wi, vi) in w.iter().zip(&v) {
                resid += (wi - lambda * vi) * (wi - lambda * vi);
            }
            if resid.sqrt() <= rel_tol * lambda.abs().max(1e-300) {
                return lambda;
            }
            v = w.iter().map(|x| x / nw).collect();
        }
        if alive {
            return lambda;
        }
    }
    0.0
}

// JSON transport: {"M": [[...]], "q": [...]} with decimal-string reals.
#[derive(Serialize, Deserialize)]
struct MappingJson {
    #[serde(rename = "M")]
    m: Vec<Vec<String>>,
    q: Vec<String>,
}

impl Serialize for AffineMapping {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let m = (0..self.m.n_rows())
            .map(|i| self.m.row(i).iter().map(|&v| f64_to_string(v)).collect())
            .collect();
        let q = self.q.iter().map(|&v| f64_to_string(v)).collect();
        MappingJson { m, q }.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for AffineMapping {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = MappingJson::deserialize(de)?;
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
        let m = Matrix::from_rows(&rows).map_err(D::Error::custom)?;
        AffineMapping::new(m, q).map_err(D::Error::custom)
    }
}
