//! Redundant-row detection and minimal representation of a polytope.
//!
//! A row `a_i^T x <= b_i` is redundant when maximizing `a_i^T x` subject to
//! every other row plus the relaxed copy `a_i^T x <= b_i + 1` stays at or
//! below `b_i`. The scan drops dominated parallel rows first (an exact,
//! LP-free test that collapses the large parallel families produced by
//! stacked sample blocks), then runs the relaxation LP on what is left.

use crate::error::{Error, Result};
use crate::linalg::norm2;

use super::lp::{find_feasible_point, lp_solve, LpStatus, Sense};
use super::polytope::Polytope;

/// Absolute tolerance on the optimum-versus-offset comparison. The exact-
/// arithmetic test is "strictly greater than b_i"; this is its float analog.
pub const TOL_RED: f64 = 1e-7;

/// Is row `i` redundant for `P` given all the other rows?
///
/// Errors when the relaxed system is infeasible, which means the original
/// system was already empty.
pub fn is_row_redundant(p: &Polytope, i: usize) -> Result<bool> {
    if i >= p.n_rows() {
        return Err(Error::InvalidArgument(format!(
            "row index {i} out of range for {} rows",
            p.n_rows()
        )));
    }
    let all: Vec<usize> = (0..p.n_rows()).collect();
    row_redundant_within(p, &all, i)
}

/// Redundancy of `p`'s row `i` against the subsystem given by `active`
/// (which must contain `i`). Shared by the public test and the scan.
fn row_redundant_within(p: &Polytope, active: &[usize], i: usize) -> Result<bool> {
    let (a_i, b_i) = p.row(i);
    let a_i = a_i.to_vec();
    if norm2(&a_i) <= 1e-14 {
        // zero row: vacuous iff its offset is not negative
        return Ok(b_i >= -TOL_RED);
    }
    let mut sub = p.select_rows(active);
    let local = active.iter().position(|&r| r == i).expect("i in active");
    let mut rhs = sub.rhs().to_vec();
    rhs[local] += 1.0;
    sub = Polytope::new(sub.matrix().clone(), rhs, sub.provenance().to_vec())?;
    let res = lp_solve(&a_i, &sub, Sense::Max)?;
    match res.status {
        LpStatus::Optimal => Ok(res.value.unwrap() <= b_i + TOL_RED),
        LpStatus::Unbounded => Ok(false),
        LpStatus::Infeasible => Err(Error::Infeasible(
            "relaxed system is infeasible: the original system was already empty".into(),
        )),
    }
}

/// Drop rows dominated by a parallel row with a smaller (normalized) offset.
/// Exact ties keep the lowest-index copy. Returns the dropped flags.
fn dominated_parallel(p: &Polytope) -> Vec<bool> {
    let m = p.n_rows();
    let n = p.dim();
    let mut unit: Vec<Option<(Vec<f64>, f64)>> = Vec::with_capacity(m);
    for i in 0..m {
        let (a, b) = p.row(i);
        let nrm = norm2(a);
        if nrm <= 1e-14 {
            unit.push(None);
        } else {
            unit.push(Some((a.iter().map(|v| v / nrm).collect(), b / nrm)));
        }
    }
    let mut dropped = vec![false; m];
    for i in 0..m {
        let Some((ui, bi)) = &unit[i] else { continue };
        for j in 0..m {
            if i == j || dropped[j] {
                continue;
            }
            let Some((uj, bj)) = &unit[j] else { continue };
            let parallel = (0..n).all(|k| (ui[k] - uj[k]).abs() <= 1e-12);
            if !parallel {
                continue;
            }
            if *bi > bj + 1e-12 || ((bi - bj).abs() <= 1e-12 && j < i) {
                dropped[i] = true;
                break;
            }
        }
    }
    dropped
}

/// Maximal irredundant row subset describing the same set, with the kept
/// row indices of the original system. Provenance is preserved.
///
/// Rows are tested from the highest index down, each against everything not
/// yet dropped, so exactly one copy of duplicated rows survives and it is
/// the lowest-index copy. Dropping a redundant row never changes the set,
/// which keeps later tests valid.
pub fn minimal_representation(p: &Polytope) -> Result<(Polytope, Vec<usize>)> {
    if find_feasible_point(p)?.is_none() {
        return Err(Error::Infeasible(
            "minimal_representation of an empty polytope".into(),
        ));
    }
    let m = p.n_rows();
    let mut dropped = dominated_parallel(p);
    for i in (0..m).rev() {
        if dropped[i] {
            continue;
        }
        let active: Vec<usize> = (0..m).filter(|&r| !dropped[r]).collect();
        if active.len() == 1 {
            break;
        }
        match row_redundant_within(p, &active, i) {
            Ok(true) => dropped[i] = true,
            Ok(false) => {}
            Err(Error::Infeasible(_)) => {
                // the active set always describes the same nonempty set
                return Err(Error::NumericalFailure(
                    "redundancy scan saw an infeasible subsystem of a feasible polytope".into(),
                ));
            }
            Err(e) => return Err(e),
        }
    }
    let kept: Vec<usize> = (0..m).filter(|&r| !dropped[r]).collect();
    Ok((p.select_rows(&kept), kept))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn unit_box() -> Polytope {
        Polytope::bounding_box(&[0.0, 0.0], &[1.0, 1.0]).unwrap()
    }

    fn with_row(p: &Polytope, a: Vec<f64>, b: f64) -> Polytope {
        p.stacked(
            &Matrix::from_rows(&[a]).unwrap(),
            &[b],
            &[crate::convex::polytope::RowProvenance::Base { row: 99 }],
        )
        .unwrap()
    }

    #[test]
    fn dominated_bound_is_redundant() {
        let p = with_row(&unit_box(), vec![1.0, 0.0], 2.0); // x1 <= 2 over the unit box
        assert!(is_row_redundant(&p, 4).unwrap());
    }

    #[test]
    fn cutting_row_is_not_redundant() {
        let p = with_row(&unit_box(), vec![1.0, 0.0], 0.5);
        assert!(!is_row_redundant(&p, 4).unwrap());
    }

    #[test]
    fn duplicates_are_individually_redundant() {
        let p = with_row(&unit_box(), vec![1.0, 0.0], 1.0); // duplicate of row 0
        assert!(is_row_redundant(&p, 0).unwrap());
        assert!(is_row_redundant(&p, 4).unwrap());
    }

    #[test]
    fn redundancy_on_empty_system_errors() {
        // x <= 0 against x >= 5: relaxing the first row by one unit cannot
        // restore feasibility, so the degenerate input is reported
        let empty =
            Polytope::from_base_rows(&[vec![1.0], vec![-1.0]], vec![0.0, -5.0]).unwrap();
        assert!(matches!(
            is_row_redundant(&empty, 0),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn duplicated_box_collapses_to_four_rows() {
        let b = unit_box();
        let doubled = b
            .stacked(b.matrix(), b.rhs(), b.provenance())
            .unwrap();
        assert_eq!(doubled.n_rows(), 8);
        let (min, kept) = minimal_representation(&doubled).unwrap();
        assert_eq!(min.n_rows(), 4);
        // lowest-index copies survive
        assert_eq!(kept, vec![0, 1, 2, 3]);
    }

    #[test]
    fn slack_halfspace_dropped() {
        let tri = crate::convex::testutil::triangle();
        let p = with_row(&tri, vec![0.0, -1.0], 1.0); // x2 >= -1, dominated
        let (min, kept) = minimal_representation(&p).unwrap();
        assert_eq!(min.n_rows(), 3);
        assert_eq!(kept, vec![0, 1, 2]);
    }

    #[test]
    fn minimal_representation_requires_feasible() {
        let empty =
            Polytope::from_base_rows(&[vec![1.0], vec![-1.0]], vec![0.0, -1.0]).unwrap();
        assert!(minimal_representation(&empty).is_err());
    }

    #[test]
    fn kept_rows_are_irredundant() {
        // box with an extra slanted cut plus duplicates
        let mut p = with_row(&unit_box(), vec![1.0, 1.0], 1.5);
        p = with_row(&p, vec![1.0, 1.0], 1.5);
        p = with_row(&p, vec![1.0, 0.0], 3.0);
        let (min, kept) = minimal_representation(&p).unwrap();
        assert_eq!(min.n_rows(), 5); // 4 box facets + one copy of the cut
        assert!(kept.contains(&4) && !kept.contains(&5) && !kept.contains(&6));
        for local in 0..min.n_rows() {
            assert!(!is_row_redundant(&min, local).unwrap());
        }
    }
}
