//! The scenario program: a deterministic base polytope plus a rule mapping
//! each uncertainty vector to a fixed-shape block of constraint rows, and
//! optionally the distribution the uncertainty is drawn from.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::convex::{is_bounded, Polytope, RowProvenance};
use crate::error::{Error, Result};
use crate::hash::Hasher;
use crate::linalg::Matrix;
use crate::rng;

/// K drawn uncertainty vectors of common length, plus the master seed they
/// were drawn under. K = 0 is the deterministic problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Multisample {
    samples: Vec<Vec<f64>>,
    seed: u64,
}

impl Multisample {
    pub fn new(samples: Vec<Vec<f64>>, seed: u64) -> Result<Self> {
        if let Some(first) = samples.first() {
            let l = first.len();
            for (i, s) in samples.iter().enumerate() {
                if s.len() != l {
                    return Err(Error::DimensionMismatch {
                        context: "Multisample vectors must share one length",
                        expected: l,
                        found: samples[i].len(),
                    });
                }
            }
        }
        Ok(Multisample { samples, seed })
    }

    pub fn empty(seed: u64) -> Self {
        Multisample {
            samples: Vec::new(),
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn delta_len(&self) -> usize {
        self.samples.first().map_or(0, |s| s.len())
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Sample k, 1-indexed as elsewhere.
    pub fn sample(&self, k: usize) -> &[f64] {
        &self.samples[k - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.samples.iter()
    }

    /// The first `k` samples as their own multisample; drawing is per-sample
    /// seeded, so this equals a fresh draw of length `k` under the same seed.
    pub fn prefix(&self, k: usize) -> Multisample {
        Multisample {
            samples: self.samples[..k].to_vec(),
            seed: self.seed,
        }
    }

    pub fn feed_hash(&self, h: &mut Hasher) {
        h.usize(self.len()).u64(self.seed);
        for s in &self.samples {
            h.f64s(s);
        }
    }

    /// One sample per line, comma-separated components.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for s in &self.samples {
            let cells: Vec<String> = s.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn from_csv(text: &str, seed: u64) -> Result<Self> {
        let mut samples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let mut row = Vec::new();
            for cell in trimmed.split(',') {
                row.push(cell.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: lineno + 1,
                    message: format!("bad real {cell:?}: {e}"),
                })?);
            }
            samples.push(row);
        }
        Multisample::new(samples, seed)
    }
}

/// Deterministic rule mapping an uncertainty vector to its constraint block
/// `(A(delta), b(delta))` with fixed shape `p x n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SampleRule {
    /// Each uncertainty vector is a literal halfspace `(a_1..a_n, b)`;
    /// one row per sample.
    HalfspaceFromDelta { dim: usize },
    /// Aggregate charging caps: for each time slot t, the total charge
    /// across vehicles obeys `sigma(x)_t <= d_max - d_nom_t - delta_t`.
    /// One row per slot, acting on the stacked decision of length N*T.
    AggregateCap {
        n_agents: usize,
        horizon: usize,
        d_nom: Vec<f64>,
        d_max: f64,
    },
}

impl SampleRule {
    /// Ambient decision dimension n.
    pub fn dim(&self) -> usize {
        match self {
            SampleRule::HalfspaceFromDelta { dim } => *dim,
            SampleRule::AggregateCap {
                n_agents, horizon, ..
            } => n_agents * horizon,
        }
    }

    /// Rows contributed per sample (p).
    pub fn rows_per_sample(&self) -> usize {
        match self {
            SampleRule::HalfspaceFromDelta { .. } => 1,
            SampleRule::AggregateCap { horizon, .. } => *horizon,
        }
    }

    /// Uncertainty vector length (l).
    pub fn delta_len(&self) -> usize {
        match self {
            SampleRule::HalfspaceFromDelta { dim } => dim + 1,
            SampleRule::AggregateCap { horizon, .. } => *horizon,
        }
    }

    /// The block `(A(delta), b(delta))`.
    pub fn emit(&self, delta: &[f64]) -> Result<(Matrix, Vec<f64>)> {
        if delta.len() != self.delta_len() {
            return Err(Error::DimensionMismatch {
                context: "SampleRule::emit uncertainty length",
                expected: self.delta_len(),
                found: delta.len(),
            });
        }
        match self {
            SampleRule::HalfspaceFromDelta { dim } => {
                let a = Matrix::from_rows(&[delta[..*dim].to_vec()])?;
                Ok((a, vec![delta[*dim]]))
            }
            SampleRule::AggregateCap {
                n_agents,
                horizon,
                d_nom,
                d_max,
            } => {
                let (nv, t) = (*n_agents, *horizon);
                let mut a = Matrix::zeros(t, nv * t);
                for slot in 0..t {
                    for agent in 0..nv {
                        a.set(slot, agent * t + slot, 1.0);
                    }
                }
                let b = (0..t)
                    .map(|slot| d_max - d_nom[slot] - delta[slot])
                    .collect();
                Ok((a, b))
            }
        }
    }

    /// The sampled constraint set `X_delta` as its own polytope.
    pub fn sample_set(&self, delta: &[f64]) -> Result<Polytope> {
        let (a, b) = self.emit(delta)?;
        let prov = (0..a.n_rows())
            .map(|row| RowProvenance::Sample { sample: 0, row })
            .collect();
        Polytope::new(a, b, prov)
    }

    pub fn feed_hash(&self, h: &mut Hasher) {
        match self {
            SampleRule::HalfspaceFromDelta { dim } => {
                h.str("halfspace").usize(*dim);
            }
            SampleRule::AggregateCap {
                n_agents,
                horizon,
                d_nom,
                d_max,
            } => {
                h.str("aggcap")
                    .usize(*n_agents)
                    .usize(*horizon)
                    .f64s(d_nom)
                    .f64(*d_max);
            }
        }
    }
}

/// The distribution the uncertainty is drawn from, when one is attached.
/// Component-wise independent uniform over a centered box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DeltaDistribution {
    UniformBox { half_width: Vec<f64> },
}

impl DeltaDistribution {
    pub fn delta_len(&self) -> usize {
        match self {
            DeltaDistribution::UniformBox { half_width } => half_width.len(),
        }
    }

    pub fn draw_one(&self, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<f64> {
        match self {
            DeltaDistribution::UniformBox { half_width } => half_width
                .iter()
                .map(|&w| {
                    let u: f64 = rng.gen();
                    (2.0 * u - 1.0) * w
                })
                .collect(),
        }
    }

    pub fn feed_hash(&self, h: &mut Hasher) {
        match self {
            DeltaDistribution::UniformBox { half_width } => {
                h.str("ubox").f64s(half_width);
            }
        }
    }
}

/// Base polytope (bounded, enforced at construction) plus the sample rule
/// and, optionally, the sampling distribution.
#[derive(Debug, Clone)]
pub struct ScenarioProgram {
    base: Polytope,
    rule: SampleRule,
    distribution: Option<DeltaDistribution>,
}

impl ScenarioProgram {
    pub fn new(
        base: Polytope,
        rule: SampleRule,
        distribution: Option<DeltaDistribution>,
    ) -> Result<Self> {
        if base.dim() != rule.dim() {
            return Err(Error::DimensionMismatch {
                context: "ScenarioProgram base dimension vs rule",
                expected: rule.dim(),
                found: base.dim(),
            });
        }
        if let Some(d) = &distribution {
            if d.delta_len() != rule.delta_len() {
                return Err(Error::DimensionMismatch {
                    context: "ScenarioProgram distribution vs rule uncertainty length",
                    expected: rule.delta_len(),
                    found: d.delta_len(),
                });
            }
        }
        if !is_bounded(&base)? {
            return Err(Error::Unbounded(
                "scenario base set must be bounded; include explicit box bounds".into(),
            ));
        }
        Ok(ScenarioProgram {
            base,
            rule,
            distribution,
        })
    }

    pub fn base(&self) -> &Polytope {
        &self.base
    }

    pub fn rule(&self) -> &SampleRule {
        &self.rule
    }

    pub fn distribution(&self) -> Option<&DeltaDistribution> {
        self.distribution.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// (n, m, p, l): dimension, base rows, rows per sample, uncertainty length.
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (
            self.base.dim(),
            self.base.n_rows(),
            self.rule.rows_per_sample(),
            self.rule.delta_len(),
        )
    }

    /// Stack the base rows, then one block per sample; sample rows carry
    /// 1-indexed sample provenance. `m + K p` rows in total.
    pub fn assemble(&self, ms: &Multisample) -> Result<Polytope> {
        if !ms.is_empty() && ms.delta_len() != self.rule.delta_len() {
            return Err(Error::DimensionMismatch {
                context: "assemble multisample uncertainty length",
                expected: self.rule.delta_len(),
                found: ms.delta_len(),
            });
        }
        let mut out = self.base.clone();
        for (idx, delta) in ms.iter().enumerate() {
            let (a, b) = self.rule.emit(delta)?;
            let prov: Vec<RowProvenance> = (0..a.n_rows())
                .map(|row| RowProvenance::Sample {
                    sample: idx + 1,
                    row,
                })
                .collect();
            out = out.stacked(&a, &b, &prov)?;
        }
        Ok(out)
    }

    /// Draw a K-multisample from the attached distribution. Sample k is
    /// drawn from its own derived stream, so prefixes are draw-stable.
    pub fn draw(&self, k: usize, seed: u64) -> Result<Multisample> {
        let Some(dist) = &self.distribution else {
            return Err(Error::InvalidArgument(
                "this scenario program has no sampling distribution attached".into(),
            ));
        };
        let samples = (0..k)
            .map(|i| {
                let mut r = rng::stream(seed, "delta", i as u64);
                dist.draw_one(&mut r)
            })
            .collect();
        Multisample::new(samples, seed)
    }

    pub fn feed_hash(&self, h: &mut Hasher) {
        self.base.feed_hash(h);
        self.rule.feed_hash(h);
        if let Some(d) = &self.distribution {
            d.feed_hash(h);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle_program() -> ScenarioProgram {
        ScenarioProgram::new(
            crate::convex::testutil::triangle(),
            SampleRule::HalfspaceFromDelta { dim: 2 },
            None,
        )
        .unwrap()
    }

    #[test]
    fn assemble_k0_is_base() {
        let prog = triangle_program();
        let p = prog.assemble(&Multisample::empty(0)).unwrap();
        assert_eq!(p.n_rows(), 3);
        assert_eq!(p, *prog.base());
    }

    #[test]
    fn assemble_stacks_sample_blocks_with_provenance() {
        let prog = triangle_program();
        let ms = Multisample::new(
            vec![
                vec![-1.0 / 3.0, -1.0, -1.0 / 3.0],
                vec![1.0 / 3.0, -1.0, 1.0 / 15.0],
                vec![0.0, -1.0, -0.5],
            ],
            0,
        )
        .unwrap();
        let p = prog.assemble(&ms).unwrap();
        assert_eq!(p.n_rows(), 6);
        assert_eq!(
            p.provenance()[3],
            RowProvenance::Sample { sample: 1, row: 0 }
        );
        assert_eq!(
            p.provenance()[5],
            RowProvenance::Sample { sample: 3, row: 0 }
        );
        let (a, b) = p.row(5);
        assert_eq!(a, &[0.0, -1.0]);
        assert_eq!(b, -0.5);
    }

    #[test]
    fn ragged_multisample_rejected() {
        assert!(Multisample::new(vec![vec![1.0], vec![1.0, 2.0]], 0).is_err());
    }

    #[test]
    fn unbounded_base_rejected() {
        let half = Polytope::from_base_rows(&[vec![-1.0, 0.0]], vec![0.0]).unwrap();
        assert!(matches!(
            ScenarioProgram::new(half, SampleRule::HalfspaceFromDelta { dim: 2 }, None),
            Err(Error::Unbounded(_))
        ));
    }

    #[test]
    fn draws_are_prefix_stable() {
        let prog = ScenarioProgram::new(
            crate::convex::testutil::triangle(),
            SampleRule::HalfspaceFromDelta { dim: 2 },
            Some(DeltaDistribution::UniformBox {
                half_width: vec![0.1, 0.1, 0.1],
            }),
        )
        .unwrap();
        let long = prog.draw(10, 42).unwrap();
        let short = prog.draw(4, 42).unwrap();
        assert_eq!(long.prefix(4), short);
        let other = prog.draw(4, 43).unwrap();
        assert_ne!(short, other);
    }

    #[test]
    fn multisample_csv_round_trip() {
        let ms = Multisample::new(vec![vec![0.25, -1.5], vec![1.0 / 3.0, 2.0]], 9).unwrap();
        let csv = ms.to_csv();
        let back = Multisample::from_csv(&csv, 9).unwrap();
        assert_eq!(ms, back);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let err = Multisample::from_csv("1.0,2.0\n1.0,nope\n", 0).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn aggregate_cap_rows() {
        // N=2, T=2: row per slot sums that slot across both agents
        let rule = SampleRule::AggregateCap {
            n_agents: 2,
            horizon: 2,
            d_nom: vec![1.0, 2.0],
            d_max: 5.0,
        };
        let (a, b) = rule.emit(&[0.25, -0.25]).unwrap();
        assert_eq!(a.n_rows(), 2);
        assert_eq!(a.row(0), &[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(a.row(1), &[0.0, 1.0, 0.0, 1.0]);
        assert!((b[0] - (5.0 - 1.0 - 0.25)).abs() < 1e-15);
        assert!((b[1] - (5.0 - 2.0 + 0.25)).abs() < 1e-15);
    }
}
