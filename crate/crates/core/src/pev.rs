//! Built-in problem family: day-ahead charging coordination of a fleet of
//! plug-in electric vehicles as an aggregative game, reduced to an affine
//! VI. Each vehicle controls a charging profile over T slots subject to
//! box, state-of-charge and minimum-charge constraints; the uncertain
//! non-vehicle demand enters through per-slot aggregate capacity caps, and
//! the price is affine in the aggregate demand, which makes the game
//! mapping the all-alpha matrix plus a repeated baseline price offset.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng;
use crate::scenario::{DeltaDistribution, Multisample, SampleRule, ScenarioProgram, SolutionCloud};
use crate::vi::AffineMapping;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PevConfig {
    /// Vehicle count N.
    pub n_vehicles: usize,
    /// Horizon length T (time slots).
    pub horizon: usize,
    /// Price slope per unit aggregate energy; must be positive, which is
    /// what makes the game mapping monotone.
    pub alpha: f64,
    /// Baseline price over the horizon (length T).
    pub eta: Vec<f64>,
    /// Per-vehicle charging efficiency (length N).
    pub b_eff: Vec<f64>,
    /// Initial state of charge in [0,1] (length N).
    pub s0: Vec<f64>,
    /// Required charge amount (length N, nonnegative).
    pub gamma: Vec<f64>,
    /// Grid capacity.
    pub d_max: f64,
    /// Relative uncertainty half-width; the slot-t disturbance is uniform
    /// on d_nom(t) * [-delta_scale, delta_scale].
    pub delta_scale: f64,
    pub seed: u64,
}

impl PevConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.n_vehicles;
        let t = self.horizon;
        if n == 0 || t == 0 {
            return Err(Error::InvalidArgument(
                "PEV config needs N >= 1 and T >= 1".into(),
            ));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidArgument(
                "alpha must be positive; the game mapping is monotone only then".into(),
            ));
        }
        if self.eta.len() != t {
            return Err(Error::DimensionMismatch {
                context: "PEV eta length vs horizon",
                expected: t,
                found: self.eta.len(),
            });
        }
        for (name, v) in [("b_eff", &self.b_eff), ("s0", &self.s0), ("gamma", &self.gamma)] {
            if v.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "{name} must have one entry per vehicle ({n}), found {}",
                    v.len()
                )));
            }
        }
        for i in 0..n {
            if !(self.b_eff[i] > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "vehicle {i}: charging efficiency must be positive"
                )));
            }
            if !(0.0..=1.0).contains(&self.s0[i]) {
                return Err(Error::InvalidArgument(format!(
                    "vehicle {i}: initial state of charge must lie in [0,1]"
                )));
            }
            if self.gamma[i] < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "vehicle {i}: required charge must be nonnegative"
                )));
            }
        }
        if !(self.d_max > 0.0) {
            return Err(Error::InvalidArgument("d_max must be positive".into()));
        }
        if self.delta_scale < 0.0 {
            return Err(Error::InvalidArgument(
                "delta_scale must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Draw per-vehicle parameters uniformly from the usual simulation
    /// ranges under the instance seed: efficiency in [0.075, 0.25], initial
    /// charge in [0.1, 0.4], desired final charge in [0.7, 1], with the
    /// required amount derived from the charge gap and clipped to what the
    /// horizon can deliver. Capacity defaults to twice the peak nominal
    /// demand and the uncertainty half-width to 5 percent.
    pub fn sampled(n_vehicles: usize, horizon: usize, profile: &DemandProfile, seed: u64) -> Self {
        let mut r = rng::stream(seed, "pev-params", 0);
        let mut b_eff = Vec::with_capacity(n_vehicles);
        let mut s0 = Vec::with_capacity(n_vehicles);
        let mut gamma = Vec::with_capacity(n_vehicles);
        for _ in 0..n_vehicles {
            let b = rng::uniform(&mut r, 0.075, 0.25);
            let s_init = rng::uniform(&mut r, 0.1, 0.4);
            let s_final = rng::uniform(&mut r, 0.7, 1.0);
            let want = (s_final - s_init) / b;
            let cap = 0.95 * (horizon as f64).min((1.0 - s_init) / b);
            b_eff.push(b);
            s0.push(s_init);
            gamma.push(want.min(cap));
        }
        let peak = profile.d_nom.iter().cloned().fold(0.0, f64::max);
        PevConfig {
            n_vehicles,
            horizon,
            alpha: 0.01,
            eta: vec![0.0; horizon],
            b_eff,
            s0,
            gamma,
            d_max: 2.0 * peak,
            delta_scale: 0.05,
            seed,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: PevConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A calibrated desk-scale instance: a synthetic daily profile whose scale
/// grows with the fleet, and sampled per-vehicle parameters whose total
/// charge demand is rescaled to `load_factor` times the worst-case total
/// capacity under the 5 percent uncertainty. The instance is then feasible
/// for every realization by construction; load factors above roughly 0.7
/// make the capacity cap bind at the evening peak (supporting samples
/// appear), lower ones leave the caps slack everywhere.
pub fn desk_instance(
    n_vehicles: usize,
    horizon: usize,
    seed: u64,
    load_factor: f64,
) -> Result<(PevConfig, DemandProfile)> {
    if !(load_factor > 0.0 && load_factor < 1.0) {
        return Err(Error::InvalidArgument(
            "load_factor must lie in (0,1)".into(),
        ));
    }
    let profile = DemandProfile::synthetic_daily(horizon, 0.25 * n_vehicles as f64);
    let mut cfg = PevConfig::sampled(n_vehicles, horizon, &profile, seed);
    let worst_cap: f64 = profile
        .d_nom
        .iter()
        .map(|&d| cfg.d_max - (1.0 + cfg.delta_scale) * d)
        .sum();
    let demand: f64 = cfg.gamma.iter().sum();
    let budget = load_factor * worst_cap;
    if demand > budget {
        let shrink = budget / demand;
        for g in cfg.gamma.iter_mut() {
            *g *= shrink;
        }
    }
    Ok((cfg, profile))
}

/// Nominal non-vehicle demand over the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandProfile {
    pub d_nom: Vec<f64>,
}

impl DemandProfile {
    pub fn new(d_nom: Vec<f64>) -> Result<Self> {
        if d_nom.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidArgument(
                "nominal demand entries must be nonnegative".into(),
            ));
        }
        Ok(DemandProfile { d_nom })
    }

    pub fn horizon(&self) -> usize {
        self.d_nom.len()
    }

    /// A smooth synthetic daily curve with a morning shoulder and an
    /// evening peak; handy default when no measured profiles are at hand.
    pub fn synthetic_daily(horizon: usize, scale: f64) -> Self {
        use std::f64::consts::PI;
        let d_nom = (0..horizon)
            .map(|t| {
                let phase = (t as f64 + 0.5) / horizon as f64;
                let evening = (PI * (phase - 0.35) / 0.6).sin().max(0.0);
                scale * (0.8 + 1.0 * evening * evening)
            })
            .collect();
        DemandProfile { d_nom }
    }
}

/// Column-wise average of the profiles in a CSV file (one profile per row,
/// `horizon` columns). Ragged rows, wrong widths and negative entries are
/// parse errors carrying the offending line number.
pub fn load_demand_profiles(path: &Path, horizon: usize) -> Result<DemandProfile> {
    let text = std::fs::read_to_string(path)?;
    average_profiles(&text, horizon)
}

pub fn average_profiles(text: &str, horizon: usize) -> Result<DemandProfile> {
    let mut sums = vec![0.0; horizon];
    let mut count = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let cells: Vec<&str> = trimmed.split(',').collect();
        if cells.len() != horizon {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected {horizon} columns, found {}", cells.len()),
            });
        }
        for (j, cell) in cells.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|e| Error::Parse {
                line: lineno + 1,
                message: format!("bad real {cell:?}: {e}"),
            })?;
            if v < 0.0 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("negative demand {v}"),
                });
            }
            sums[j] += v;
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::Parse {
            line: 0,
            message: "no profiles in file".into(),
        });
    }
    DemandProfile::new(sums.into_iter().map(|s| s / count as f64).collect())
}

/// Build the scenario program and game mapping for a PEV instance.
///
/// Per vehicle the base rows are the box `0 <= x_i <= 1` and the block
/// `A_i x_i <= c_i` with `A_i = stack(-B_i, B_i, -1^T)` for the lower-
/// triangular all-`b_i` matrix `B_i` and
/// `c_i = stack(s_i(0) 1, (1 - s_i(0)) 1, -gamma_i)`; the state-of-charge
/// recursion is folded into those static rows. The sample rule emits the T
/// per-slot capacity caps and the mapping is `M = alpha * ones(NT x NT)`,
/// `q = eta` repeated per vehicle.
pub fn build_game(
    cfg: &PevConfig,
    profile: &DemandProfile,
) -> Result<(ScenarioProgram, AffineMapping)> {
    cfg.validate()?;
    let (n, t) = (cfg.n_vehicles, cfg.horizon);
    if profile.horizon() != t {
        return Err(Error::DimensionMismatch {
            context: "PEV demand profile length vs horizon",
            expected: t,
            found: profile.horizon(),
        });
    }
    let dim = n * t;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n * (4 * t + 1));
    let mut rhs: Vec<f64> = Vec::with_capacity(n * (4 * t + 1));
    for i in 0..n {
        let off = i * t;
        // charging rate box
        for slot in 0..t {
            let mut up = vec![0.0; dim];
            up[off + slot] = 1.0;
            rows.push(up);
            rhs.push(1.0);
            let mut dn = vec![0.0; dim];
            dn[off + slot] = -1.0;
            rows.push(dn);
            rhs.push(0.0);
        }
        // state of charge stays in [0, 1]: -B_i x <= s0 and B_i x <= 1 - s0
        for slot in 0..t {
            let mut lo = vec![0.0; dim];
            for tau in 0..=slot {
                lo[off + tau] = -cfg.b_eff[i];
            }
            rows.push(lo);
            rhs.push(cfg.s0[i]);
            let mut hi = vec![0.0; dim];
            for tau in 0..=slot {
                hi[off + tau] = cfg.b_eff[i];
            }
            rows.push(hi);
            rhs.push(1.0 - cfg.s0[i]);
        }
        // minimum total charge: -1^T x_i <= -gamma_i
        let reachable = (t as f64).min((1.0 - cfg.s0[i]) / cfg.b_eff[i]);
        if cfg.gamma[i] > reachable + 1e-9 {
            return Err(Error::Infeasible(format!(
                "vehicle {i}: required charge {} exceeds the {reachable:.4} \
                 reachable within {t} slots at efficiency {}",
                cfg.gamma[i], cfg.b_eff[i]
            )));
        }
        let mut ch = vec![0.0; dim];
        for tau in 0..t {
            ch[off + tau] = -1.0;
        }
        rows.push(ch);
        rhs.push(-cfg.gamma[i]);
    }
    let base = crate::convex::Polytope::from_base_rows(&rows, rhs)?;
    let rule = SampleRule::AggregateCap {
        n_agents: n,
        horizon: t,
        d_nom: profile.d_nom.clone(),
        d_max: cfg.d_max,
    };
    let distribution = DeltaDistribution::UniformBox {
        half_width: profile.d_nom.iter().map(|d| cfg.delta_scale * d).collect(),
    };
    let program = ScenarioProgram::new(base, rule, Some(distribution))?;
    let mut q = Vec::with_capacity(dim);
    for _ in 0..n {
        q.extend_from_slice(&cfg.eta);
    }
    let mapping = AffineMapping::new(Matrix::filled(dim, dim, cfg.alpha), q)?;
    Ok((program, mapping))
}

/// Draw the uncertainty multisample: slot t uniform on
/// `d_nom(t) * [-delta_scale, delta_scale]`, independently per slot and per
/// sample, each sample from its own derived stream (prefix-stable draws).
pub fn sample_delta(
    cfg: &PevConfig,
    profile: &DemandProfile,
    k: usize,
    seed: u64,
) -> Result<Multisample> {
    if profile.horizon() != cfg.horizon {
        return Err(Error::DimensionMismatch {
            context: "sample_delta profile length vs horizon",
            expected: cfg.horizon,
            found: profile.horizon(),
        });
    }
    let samples = (0..k)
        .map(|i| {
            let mut r = rng::stream(seed, "delta", i as u64);
            profile
                .d_nom
                .iter()
                .map(|&d| {
                    let u: f64 = r.gen();
                    (2.0 * u - 1.0) * cfg.delta_scale * d
                })
                .collect()
        })
        .collect();
    Multisample::new(samples, seed)
}

/// Aggregate behaviour of a solution cloud: per-slot aggregate charge of
/// every point, the cloud average, total demand against capacity, and the
/// remaining margin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateReport {
    pub d_nom: Vec<f64>,
    pub sigma_avg: Vec<f64>,
    pub total_avg: Vec<f64>,
    pub capacity: f64,
    pub peak_total: f64,
    pub margin: Vec<f64>,
    pub cloud_size: usize,
}

pub fn aggregate_report(
    cloud: &SolutionCloud,
    cfg: &PevConfig,
    profile: &DemandProfile,
) -> Result<AggregateReport> {
    let (n, t) = (cfg.n_vehicles, cfg.horizon);
    if cloud.is_empty() {
        return Err(Error::InvalidArgument("aggregate_report on an empty cloud".into()));
    }
    if profile.horizon() != t {
        return Err(Error::DimensionMismatch {
            context: "aggregate_report profile length vs horizon",
            expected: t,
            found: profile.horizon(),
        });
    }
    let mut sigma_avg = vec![0.0; t];
    for point in cloud.points() {
        if point.len() != n * t {
            return Err(Error::DimensionMismatch {
                context: "aggregate_report cloud point length vs N*T",
                expected: n * t,
                found: point.len(),
            });
        }
        for slot in 0..t {
            let mut s = 0.0;
            for agent in 0..n {
                s += point[agent * t + slot];
            }
            sigma_avg[slot] += s;
        }
    }
    let m = cloud.len() as f64;
    for v in sigma_avg.iter_mut() {
        *v /= m;
    }
    let total_avg: Vec<f64> = profile
        .d_nom
        .iter()
        .zip(&sigma_avg)
        .map(|(d, s)| d + s)
        .collect();
    let peak_total = total_avg.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let margin = total_avg.iter().map(|v| cfg.d_max - v).collect();
    Ok(AggregateReport {
        d_nom: profile.d_nom.clone(),
        sigma_avg,
        total_avg,
        capacity: cfg.d_max,
        peak_total,
        margin,
        cloud_size: cloud.len(),
    })
}

impl AggregateReport {
    /// Columns: t, d_nom, sigma_avg, total_avg, capacity.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,d_nom,sigma_avg,total_avg,capacity\n");
        for t in 0..self.d_nom.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                t, self.d_nom[t], self.sigma_avg[t], self.total_avg[t], self.capacity
            ));
        }
        out
    }

    /// A minimal line chart of nominal demand, average total demand and the
    /// capacity cap.
    pub fn to_svg(&self) -> String {
        let series = [
            ("nominal demand", &self.d_nom, "#888888"),
            ("avg total demand", &self.total_avg, "#1f77b4"),
        ];
        let cap = self.capacity;
        let t = self.d_nom.len();
        let y_max = self
            .total_avg
            .iter()
            .chain(self.d_nom.iter())
            .cloned()
            .fold(cap, f64::max)
            * 1.05;
        crate::report::line_chart(t, y_max, &series, Some(("capacity", cap, "#d62728")))
    }
}
