//! Shared test oracles and generators, independent of the implementation
//! paths they check: brute-force vertex enumeration over row subsets, and
//! seeded random polytopes / monotone affine maps.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use vicert_core::linalg::{dist2, dot, lu_solve, Matrix};
use vicert_core::{AffineMapping, Polytope};

/// All vertices of `P` by solving every n-subset of rows and filtering by
/// feasibility. Only sensible for small instances; this is the oracle the
/// LP and the VI solver are measured against.
pub fn enumerate_vertices(p: &Polytope) -> Vec<Vec<f64>> {
    let n = p.dim();
    let m = p.n_rows();
    let mut verts: Vec<Vec<f64>> = Vec::new();
    let mut subset: Vec<usize> = (0..n).collect();
    if m < n {
        return verts;
    }
    loop {
        let mut a = Matrix::zeros(0, n);
        let mut b = Vec::with_capacity(n);
        for &i in &subset {
            let (row, bi) = p.row(i);
            a.push_row(row);
            b.push(bi);
        }
        if let Some(x) = lu_solve(&a, &b) {
            if p.contains(&x, 1e-9) && verts.iter().all(|v| dist2(v, &x) > 1e-9) {
                verts.push(x);
            }
        }
        // next combination in lexicographic order
        let mut i = n;
        loop {
            if i == 0 {
                return verts;
            }
            i -= 1;
            if subset[i] != i + m - n {
                subset[i] += 1;
                for j in i + 1..n {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Brute-force LP oracle: the best vertex value for `max c^T x`.
pub fn vertex_max(p: &Polytope, c: &[f64]) -> Option<f64> {
    enumerate_vertices(p)
        .iter()
        .map(|v| dot(c, v))
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
}

/// A random bounded polytope: a scaled box around a random center plus up
/// to `extra` cutting halfspaces that keep the center feasible.
pub fn random_polytope(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> Polytope {
    let center: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
    let half: Vec<f64> = (0..n).map(|_| 0.5 + rng.gen::<f64>()).collect();
    let lo: Vec<f64> = center.iter().zip(&half).map(|(c, h)| c - h).collect();
    let hi: Vec<f64> = center.iter().zip(&half).map(|(c, h)| c + h).collect();
    let mut p = Polytope::bounding_box(&lo, &hi).unwrap();
    for _ in 0..extra {
        let a = vicert_core::rng::unit_vector(rng, n);
        // keep the box center strictly inside
        let b = dot(&a, &center) + 0.05 + rng.gen::<f64>();
        p = p
            .stacked(
                &Matrix::from_rows(&[a]).unwrap(),
                &[b],
                &[vicert_core::RowProvenance::Base { row: 2 * n }],
            )
            .unwrap();
    }
    p
}

/// A random monotone affine map: `M = B^T B + skew`, so the symmetric part
/// is positive semidefinite regardless of the skew strength.
pub fn random_monotone_map(rng: &mut ChaCha8Rng, n: usize) -> AffineMapping {
    let mut b = Matrix::zeros(n, n);
    let mut skew = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b.set(i, j, vicert_core::rng::normal(rng));
        }
        for j in 0..i {
            let v = vicert_core::rng::normal(rng);
            skew.set(i, j, v);
            skew.set(j, i, -v);
        }
    }
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut sym = 0.0;
            for k in 0..n {
                sym += b.get(k, i) * b.get(k, j);
            }
            m.set(i, j, sym + skew.get(i, j));
        }
    }
    let q: Vec<f64> = (0..n).map(|_| vicert_core::rng::normal(rng)).collect();
    AffineMapping::new(m, q).unwrap()
}
