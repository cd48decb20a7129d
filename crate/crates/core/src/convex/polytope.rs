//! Finite systems of linear inequalities `A x <= b` with per-row provenance.
//! This is the universal feasible-set representation: base constraints and
//! per-sample constraint blocks all end up stacked into one of these.

use serde::de::Error as DeError;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::Hasher;
use crate::linalg::{dot, norm2, Matrix};

/// Where a row came from: a base constraint, or row `row` of the block
/// contributed by sample `sample` (samples are 1-indexed).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowProvenance {
    Base { row: usize },
    Sample { sample: usize, row: usize },
}

impl RowProvenance {
    pub fn sample_index(&self) -> Option<usize> {
        match self {
            RowProvenance::Base { .. } => None,
            RowProvenance::Sample { sample, .. } => Some(*sample),
        }
    }
}

/// A polytope `{ x : A x <= b }`. May be empty; emptiness is a queryable
/// state (see `crate::convex::lp::find_feasible_point`), not a construction
/// error. Instances are immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    a: Matrix,
    b: Vec<f64>,
    provenance: Vec<RowProvenance>,
}

impl Polytope {
    pub fn new(a: Matrix, b: Vec<f64>, provenance: Vec<RowProvenance>) -> Result<Self> {
        if a.n_rows() != b.len() {
            return Err(Error::DimensionMismatch {
                context: "Polytope::new rows of A vs length of b",
                expected: a.n_rows(),
                found: b.len(),
            });
        }
        if provenance.len() != a.n_rows() {
            return Err(Error::DimensionMismatch {
                context: "Polytope::new provenance tags vs rows",
                expected: a.n_rows(),
                found: provenance.len(),
            });
        }
        Ok(Polytope { a, b, provenance })
    }

    /// All rows tagged as base constraints, numbered in order.
    pub fn from_base_rows(rows: &[Vec<f64>], b: Vec<f64>) -> Result<Self> {
        let a = Matrix::from_rows(rows)?;
        let prov = (0..a.n_rows()).map(|i| RowProvenance::Base { row: i }).collect();
        Polytope::new(a, b, prov)
    }

    /// Axis-aligned box `lo <= x <= hi`, handy in tests and instance builders.
    pub fn bounding_box(lo: &[f64], hi: &[f64]) -> Result<Self> {
        assert_eq!(lo.len(), hi.len());
        let n = lo.len();
        let mut rows = Vec::with_capacity(2 * n);
        let mut b = Vec::with_capacity(2 * n);
        for j in 0..n {
            let mut up = vec![0.0; n];
            up[j] = 1.0;
            rows.push(up);
            b.push(hi[j]);
            let mut dn = vec![0.0; n];
            dn[j] = -1.0;
            rows.push(dn);
            b.push(-lo[j]);
        }
        Polytope::from_base_rows(&rows, b)
    }

    pub fn n_rows(&self) -> usize {
        self.a.n_rows()
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.a.n_cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn provenance(&self) -> &[RowProvenance] {
        &self.provenance
    }

    /// The row `(a_i, b_i)`.
    pub fn row(&self, i: usize) -> (&[f64], f64) {
        (self.a.row(i), self.b[i])
    }

    /// Membership within an additive tolerance per row: `a_i^T x <= b_i + tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        assert_eq!(x.len(), self.dim(), "contains: dimension mismatch");
        for i in 0..self.n_rows() {
            if dot(self.a.row(i), x) > self.b[i] + tol {
                return false;
            }
        }
        true
    }

    /// Largest row violation `max_i (a_i^T x - b_i)`, negative inside.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        (0..self.n_rows())
            .map(|i| dot(self.a.row(i), x) - self.b[i])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Append rows of another system (used by scenario assembly).
    pub fn stacked(&self, rows: &Matrix, rhs: &[f64], provenance: &[RowProvenance]) -> Result<Self> {
        if rows.n_cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "Polytope::stacked width",
                expected: self.dim(),
                found: rows.n_cols(),
            });
        }
        let mut a = self.a.clone();
        let mut b = self.b.clone();
        let mut prov = self.provenance.clone();
        for i in 0..rows.n_rows() {
            a.push_row(rows.row(i));
        }
        b.extend_from_slice(rhs);
        prov.extend_from_slice(provenance);
        Polytope::new(a, b, prov)
    }

    /// Restriction to a subset of rows, provenance preserved.
    pub fn select_rows(&self, keep: &[usize]) -> Self {
        let mut a = Matrix::zeros(0, self.dim());
        let mut b = Vec::with_capacity(keep.len());
        let mut prov = Vec::with_capacity(keep.len());
        for &i in keep {
            a.push_row(self.a.row(i));
            b.push(self.b[i]);
            prov.push(self.provenance[i]);
        }
        Polytope { a, b, provenance: prov }
    }

    /// Euclidean row norms, used for ball-inscription constraints.
    pub fn row_norms(&self) -> Vec<f64> {
        (0..self.n_rows()).map(|i| norm2(self.a.row(i))).collect()
    }

    pub fn feed_hash(&self, h: &mut Hasher) {
        h.usize(self.n_rows()).usize(self.dim());
        for i in 0..self.n_rows() {
            h.f64s(self.a.row(i)).f64(self.b[i]);
            match self.provenance[i] {
                RowProvenance::Base { row } => h.str("b").usize(row),
                RowProvenance::Sample { sample, row } => h.str("s").usize(sample).usize(row),
            };
        }
    }
}

// ---------------------------------------------------------------------------
// JSON schema. All reals travel as decimal strings that round-trip f64
// exactly (Rust's float formatting is shortest-roundtrip).

pub(crate) fn f64_to_string(v: f64) -> String {
    format!("{v}")
}

pub(crate) fn f64_from_string(s: &str) -> std::result::Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| format!("bad real {s:?}: {e}"))
}

#[derive(Serialize, Deserialize)]
struct ProvenanceJson {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    sample: Option<usize>,
    row: usize,
}

#[derive(Serialize, Deserialize)]
struct PolytopeJson {
    #[serde(rename = "A")]
    a: Vec<Vec<String>>,
    b: Vec<String>,
    provenance: Vec<ProvenanceJson>,
}

impl Serialize for Polytope {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let a = (0..self.n_rows())
            .map(|i| self.a.row(i).iter().map(|&v| f64_to_string(v)).collect())
            .collect();
        let b = self.b.iter().map(|&v| f64_to_string(v)).collect();
        let provenance = self
            .provenance
            .iter()
            .map(|p| match *p {
                RowProvenance::Base { row } => ProvenanceJson {
                    kind: "base".into(),
                    sample: None,
                    row,
                },
                RowProvenance::Sample { sample, row } => ProvenanceJson {
                    kind: "sample".into(),
                    sample: Some(sample),
                    row,
                },
            })
            .collect();
        PolytopeJson { a, b, provenance }.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Polytope {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = PolytopeJson::deserialize(de)?;
        let mut rows = Vec::with_capacity(raw.a.len());
        for r in &raw.a {
            let mut row = Vec::with_capacity(r.len());
            for s in r {
                row.push(f64_from_string(s).map_err(D::Error::custom)?);
            }
            rows.push(row);
        }
        let mut b = Vec::with_capacity(raw.b.len());
        for s in &raw.b {
            b.push(f64_from_string(s).map_err(D::Error::custom)?);
        }
        let mut prov = Vec::with_capacity(raw.provenance.len());
        for p in &raw.provenance {
            prov.push(match p.kind.as_str() {
                "base" => RowProvenance::Base { row: p.row },
                "sample" => RowProvenance::Sample {
                    sample: p
                        .sample
                        .ok_or_else(|| D::Error::custom("sample provenance missing index"))?,
                    row: p.row,
                },
                other => return Err(D::Error::custom(format!("unknown provenance kind {other:?}"))),
            });
        }
        let a = Matrix::from_rows(&rows).map_err(D::Error::custom)?;
        Polytope::new(a, b, prov).map_err(D::Error::custom)
    }
}
