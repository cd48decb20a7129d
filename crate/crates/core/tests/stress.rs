//! Heavy randomized cross-checks, ignored by default:
//! `cargo test -p vicert-core --test stress -- --ignored`.
mod common;
use common::*;
use rand::Rng;
use vicert_core::linalg::{dist2, dot, sub};
use vicert_core::*;

#[test]
#[ignore]
fn lp_against_vertex_oracle_bulk() {
    let mut bad = 0;
    for case in 0..10_000u64 {
        let mut r = rng::stream(77_000, "lpfuzz", case);
        let n = 1 + (case % 3) as usize;
        let extra = (case % (9 - 2 * n as u64)) as usize;
        let mut p = random_polytope(&mut r, n, extra);
        // sometimes duplicate rows or scale them
        if case % 4 == 0 {
            let dup = p.select_rows(&[(case % p.n_rows() as u64) as usize]);
            p = p.stacked(dup.matrix(), dup.rhs(), dup.provenance()).unwrap();
        }
        let c = rng::unit_vector(&mut r, n);
        let res = lp_solve(&c, &p, Sense::Max).unwrap();
        assert_eq!(res.status, LpStatus::Optimal, "case {case}");
        let oracle = vertex_max(&p, &c).unwrap();
        let diff = (res.value.unwrap() - oracle).abs();
        if diff > 1e-7 {
            bad += 1;
            eprintln!("case {case}: lp {} oracle {}", res.value.unwrap(), oracle);
        }
        // returned point feasible
        assert!(p.contains(res.point.as_ref().unwrap(), 1e-7), "case {case}");
    }
    assert_eq!(bad, 0);
}

#[test]
#[ignore]
fn projection_fuzz_highdim() {
    for case in 0..2_000u64 {
        let mut r = rng::stream(78_000, "projfuzz", case);
        let n = 4 + (case % 7) as usize; // up to n = 10
        let p = random_polytope(&mut r, n, (case % 8) as usize);
        let mut proj = vicert_core::convex::Projector::new(&p).unwrap();
        for _ in 0..5 {
            let z: Vec<f64> = (0..n).map(|_| 8.0 * rng::normal(&mut r)).collect();
            let x = proj.project(&z).unwrap();
            assert!(p.contains(&x, 1e-8), "case {case}: infeasible projection");
            // projection VI against sampled feasible points
            let (center, radius) = chebyshev_center(&p).unwrap();
            for _ in 0..4 {
                let y = rng::in_ball(&mut r, &center, radius);
                let gap = dot(&sub(&z, &x), &sub(&y, &x));
                assert!(gap <= 1e-7, "case {case}: gap {gap}");
            }
            // idempotence
            let xx = proj.project(&x.clone()).unwrap();
            assert!(dist2(&x, &xx) <= 1e-8);
        }
    }
}

#[test]
#[ignore]
fn slice_projection_fuzz() {
    for case in 0..2_000u64 {
        let mut r = rng::stream(79_000, "slicefuzz", case);
        let n = 2 + (case % 4) as usize;
        let p = random_polytope(&mut r, n, (case % 4) as usize);
        // slice through a feasible point so it is nonempty
        let (center, _) = chebyshev_center(&p).unwrap();
        let a = rng::unit_vector(&mut r, n);
        let b = dot(&a, &center) + 0.1 * rng::normal(&mut r);
        let Some(mut proj) = vicert_core::convex::Projector::for_slice(&p, &a, b).unwrap() else {
            continue;
        };
        for _ in 0..4 {
            let z: Vec<f64> = (0..n).map(|_| 5.0 * rng::normal(&mut r)).collect();
            let x = proj.project(&z).unwrap();
            assert!((dot(&a, &x) - b).abs() <= 1e-8, "case {case}: off the slice");
            assert!(p.contains(&x, 1e-8), "case {case}");
        }
    }
}

#[test]
#[ignore]
fn minrep_fuzz() {
    for case in 0..1_000u64 {
        let mut r = rng::stream(80_000, "minrep", case);
        let n = 1 + (case % 4) as usize;
        let mut p = random_polytope(&mut r, n, (case % 5) as usize);
        // add shifted-parallel and duplicate junk
        let m0 = p.n_rows();
        for i in 0..m0.min(3) {
            let (a, b) = p.row(i);
            let a = a.to_vec();
            let shift: f64 = r.gen::<f64>() * 2.0;
            p = p
                .stacked(
                    &vicert_core::linalg::Matrix::from_rows(&[a]).unwrap(),
                    &[b + shift],
                    &[RowProvenance::Base { row: 100 + i }],
                )
                .unwrap();
        }
        let (red, kept) = minimal_representation(&p).unwrap();
        assert!(red.n_rows() <= p.n_rows());
        // same membership on sampled points
        let (center, radius) = chebyshev_center(&p).unwrap();
        for _ in 0..30 {
            let inside = rng::in_ball(&mut r, &center, radius);
            assert!(red.contains(&inside, 1e-10));
            let dir = rng::unit_vector(&mut r, n);
            let far: Vec<f64> = center.iter().zip(&dir).map(|(c, d)| c + 20.0 * d).collect();
            assert_eq!(p.contains(&far, 1e-10), red.contains(&far, 1e-10), "case {case}");
        }
        // kept rows irredundant
        for local in 0..red.n_rows() {
            assert!(!is_row_redundant(&red, local).unwrap(), "case {case} row {local}");
        }
        let _ = kept;
    }
}

#[test]
#[ignore]
fn scenario_pipeline_fuzz() {
    use vicert_core::scenario::SampleRule;
    let mut skipped = 0;
    for case in 0..500u64 {
        let mut r = rng::stream(81_000, "scen", case);
        let n = 2 + (case % 2) as usize;
        let base = random_polytope(&mut r, n, 1);
        let prog = ScenarioProgram::new(base, SampleRule::HalfspaceFromDelta { dim: n }, None).unwrap();
        let mapping = random_monotone_map(&mut r, n);
        // random halfspaces through near-center points (assembly stays nonempty)
        let (center, radius) = chebyshev_center(prog.base()).unwrap();
        let k = 1 + (case % 5) as usize;
        let mut deltas = Vec::new();
        for _ in 0..k {
            // every sampled halfspace keeps the center strictly feasible,
            // so the assembly stays nonempty
            let a = rng::unit_vector(&mut r, n);
            let slack = 0.02 + 0.5 * radius * r.gen::<f64>();
            let mut d = a.clone();
            d.push(dot(&a, &center) + slack);
            deltas.push(d);
        }
        let ms = Multisample::new(deltas, case).unwrap();
        let cfg = ExtragradientConfig { step: None, tol: 1e-7, max_iter: Some(300_000) };
        let count = match support_cardinality(&prog, &ms, &mapping, &cfg) {
            Ok(c) => c,
            Err(Error::NumericalFailure(m)) => { skipped += 1; eprintln!("case {case} numfail: {m}"); continue; }
            Err(e) => panic!("case {case}: {e}"),
        };
        let v = count.active.count();
        assert!(count.s <= v && v <= k, "case {case}: s={} v={v} K={k}", count.s);
        // every facet solution is a verified solution of the full problem
        let assembled = prog.assemble(&ms).unwrap();
        let problem = ViProblem::new(mapping.clone(), assembled).unwrap();
        let (step, _, _) = cfg.resolve(&problem).unwrap();
        for (_, pt) in &count.facet_solutions {
            assert!(is_solution(&problem, pt, 1e-6, step).unwrap(), "case {case}");
        }
        // certificate arithmetic well-formed
        let cert = vicert_core::cert::certificate_from_count(&prog, &ms, &mapping, 0.05, CertificateMode::Split, count.s).unwrap();
        assert!(cert.epsilon >= 0.0 && cert.epsilon <= 1.0);
        assert!(cert.s_k <= cert.k);
    }
    eprintln!("skipped: {skipped}");
    assert!(skipped <= 3, "too many numerical failures: {skipped}");
}
