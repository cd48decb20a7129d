//! The violation-level function epsilon and the certificates built on it.
//!
//! A valid schedule `eps(0..K)` satisfies `eps(K) = 1` and
//! `sum_{h=0}^{K-1} C(K,h) (1 - eps(h))^{K-h} = beta`. Two instances are
//! provided: the even split of the confidence budget across the K terms,
//! and the wait-and-judge variant where `1 - eps(h)` is the root in (0,1)
//! of `(beta/(K+1)) * sum_{m=h}^{K} C(m,h) t^{m-h} - C(K,h) t^{K-h}`.
//! Every binomial-bearing expression is evaluated in the log domain; at
//! K = 10^4 the raw coefficients overflow long before the answers do.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::Hasher;
use crate::rng;
use crate::scenario::{support_cardinality, Multisample, ScenarioProgram};
use crate::vi::{AffineMapping, ExtragradientConfig};

/// Cumulative log-factorials with compensated summation; ln k! for k <= n.
pub struct LogFactorial {
    cum: Vec<f64>,
}

impl LogFactorial {
    pub fn up_to(n: usize) -> Self {
        let mut cum = Vec::with_capacity(n + 1);
        cum.push(0.0);
        let mut sum = 0.0;
        let mut carry = 0.0;
        for k in 1..=n {
            // Kahan step keeps the relative error near machine precision
            let y = (k as f64).ln() - carry;
            let t = sum + y;
            carry = (t - sum) - y;
            sum = t;
            cum.push(sum);
        }
        LogFactorial { cum }
    }

    pub fn ln_factorial(&self, k: usize) -> f64 {
        self.cum[k]
    }

    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        self.cum[n] - self.cum[k] - self.cum[n - k]
    }
}

/// Natural log of C(n, k).
pub fn log_binomial(n: usize, k: usize) -> Result<f64> {
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "log_binomial requires k <= n, got ({n}, {k})"
        )));
    }
    Ok(LogFactorial::up_to(n).ln_binomial(n, k))
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "beta must lie in (0,1), got {beta}"
        )));
    }
    Ok(())
}

/// Even-split violation level:
/// `eps(h) = 1 - (beta / (K C(K,h)))^(1/(K-h))`, and `eps(K) = 1`.
pub fn epsilon_split(k: usize, h: usize, beta: f64) -> Result<f64> {
    Ok(split_log_complement(k, h, beta, &LogFactorial::up_to(k))?.0)
}

/// Returns (epsilon, ln(1 - epsilon)); the exponent is what schedule
/// verification needs, and reconstructing it from a stored epsilon loses
/// everything once epsilon rounds to 1.
fn split_log_complement(k: usize, h: usize, beta: f64, lf: &LogFactorial) -> Result<(f64, f64)> {
    check_beta(beta)?;
    if h > k {
        return Err(Error::InvalidArgument(format!(
            "epsilon_split requires h <= K, got ({k}, {h})"
        )));
    }
    if h == k {
        return Ok((1.0, f64::NEG_INFINITY));
    }
    let ln_c = lf.ln_binomial(k, h);
    let exponent = (beta.ln() - (k as f64).ln() - ln_c) / (k - h) as f64;
    let eps = (1.0 - exponent.exp()).clamp(0.0, 1.0);
    Ok((eps, exponent))
}

/// A violation schedule `eps(0..K)` with the log-complements kept exactly.
#[derive(Debug, Clone)]
pub struct EpsilonSchedule {
    k: usize,
    eps: Vec<f64>,
    ln_one_minus: Vec<f64>,
}

impl EpsilonSchedule {
    /// The even-split schedule.
    pub fn split(k: usize, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let lf = LogFactorial::up_to(k);
        let mut eps = Vec::with_capacity(k + 1);
        let mut ln_one_minus = Vec::with_capacity(k + 1);
        for h in 0..=k {
            let (e, ln1m) = split_log_complement(k, h, beta, &lf)?;
            eps.push(e);
            ln_one_minus.push(ln1m);
        }
        Ok(EpsilonSchedule {
            k,
            eps,
            ln_one_minus,
        })
    }

    /// The wait-and-judge schedule (per-level polynomial roots).
    pub fn wait_and_judge(k: usize, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let lf = LogFactorial::up_to(k + 1);
        let mut eps = Vec::with_capacity(k + 1);
        let mut ln_one_minus = Vec::with_capacity(k + 1);
        for h in 0..=k {
            if h == k {
                eps.push(1.0);
                ln_one_minus.push(f64::NEG_INFINITY);
            } else {
                let t = wait_and_judge_root(k, h, beta, &lf)?;
                eps.push(1.0 - t);
                ln_one_minus.push(t.ln());
            }
        }
        Ok(EpsilonSchedule {
            k,
            eps,
            ln_one_minus,
        })
    }

    /// A schedule from raw epsilon values. Verification precision is then
    /// limited by what survives in `1 - eps`; the constructors above keep
    /// the exact complements instead.
    pub fn from_values(eps: Vec<f64>) -> Result<Self> {
        if eps.is_empty() {
            return Err(Error::InvalidArgument("empty schedule".into()));
        }
        let k = eps.len() - 1;
        for (h, &e) in eps.iter().enumerate() {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::InvalidArgument(format!(
                    "schedule value eps({h}) = {e} outside [0,1]"
                )));
            }
        }
        if eps[k] != 1.0 {
            return Err(Error::InvalidArgument(
                "a schedule must end with eps(K) = 1".into(),
            ));
        }
        let ln_one_minus = eps.iter().map(|&e| (-e).ln_1p()).collect();
        Ok(EpsilonSchedule {
            k,
            eps,
            ln_one_minus,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn epsilon(&self, h: usize) -> f64 {
        self.eps[h]
    }

    pub fn values(&self) -> &[f64] {
        &self.eps
    }
}

/// Evaluate `sum_{h=0}^{K-1} C(K,h) (1 - eps(h))^{K-h}` in the log domain
/// with compensated summation and return it; for a split schedule the
/// caller can assert the result matches beta to 1e-9 relative, every term
/// being beta/K by construction.
pub fn verify_schedule(k: usize, schedule: &EpsilonSchedule) -> Result<f64> {
    if schedule.k != k {
        return Err(Error::InvalidArgument(format!(
            "schedule has K = {}, expected {k}",
            schedule.k
        )));
    }
    let lf = LogFactorial::up_to(k);
    let mut sum = 0.0;
    let mut carry = 0.0;
    for h in 0..k {
        let ln_term = lf.ln_binomial(k, h) + (k - h) as f64 * schedule.ln_one_minus[h];
        let term = ln_term.exp();
        let y = term - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    Ok(sum)
}

/// Wait-and-judge level: `eps(h) = 1 - t(h)` with `t(h)` the unique root in
/// (0,1) of `(beta/(K+1)) sum_{m=h}^{K} C(m,h) t^{m-h} = C(K,h) t^{K-h}`.
pub fn epsilon_wait_and_judge(k: usize, h: usize, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if h > k {
        return Err(Error::InvalidArgument(format!(
            "epsilon_wait_and_judge requires h <= K, got ({k}, {h})"
        )));
    }
    if h == k {
        return Ok(1.0);
    }
    let lf = LogFactorial::up_to(k + 1);
    let t = wait_and_judge_root(k, h, beta, &lf)?;
    Ok((1.0 - t).clamp(0.0, 1.0))
}

/// Sign function for the root search, in the log domain so that tiny t and
/// huge binomials never overflow:
/// `phi(t) = ln(beta/(K+1)) + ln S(t) - ln C(K,h) - (K-h) ln t`,
/// with `S(t) = sum_{m=h}^{K} C(m,h) t^{m-h}` via log-sum-exp. The root of
/// phi is the root of the defining polynomial; phi is positive at 0+ and
/// negative at 1-.
fn wj_phi(k: usize, h: usize, beta: f64, t: f64, lf: &LogFactorial) -> f64 {
    let ln_t = t.ln();
    let mut max_term = f64::NEG_INFINITY;
    let mut terms = Vec::with_capacity(k - h + 1);
    for m in h..=k {
        let v = lf.ln_binomial(m, h) + (m - h) as f64 * ln_t;
        terms.push(v);
        if v > max_term {
            max_term = v;
        }
    }
    let mut s = 0.0;
    for v in terms {
        s += (v - max_term).exp();
    }
    let ln_s = max_term + s.ln();
    (beta / (k as f64 + 1.0)).ln() + ln_s - lf.ln_binomial(k, h) - (k - h) as f64 * ln_t
}

fn wait_and_judge_root(k: usize, h: usize, beta: f64, lf: &LogFactorial) -> Result<f64> {
    let mut lo = 1e-16;
    let mut hi = 1.0 - 1e-16;
    let phi_lo = wj_phi(k, h, beta, lo, lf);
    let phi_hi = wj_phi(k, h, beta, hi, lf);
    if !(phi_lo > 0.0 && phi_hi < 0.0) {
        return Err(Error::NumericalFailure(format!(
            "no sign change in (0,1) for the wait-and-judge polynomial at \
             (K, h, beta) = ({k}, {h}, {beta})"
        )));
    }
    // Bisect until no representable midpoint is left. The nominal 1e-12
    // bracket is far too coarse: the slope of phi scales with (K - h)/t,
    // and roots near h = K - 1 sit at t ~ beta/K^2, so only a bracket at
    // relative machine width keeps the residual under 1e-10.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if wj_phi(k, h, beta, mid, lf) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    // residual of the normalized polynomial g/(C(K,h) t^(K-h)) = e^phi - 1
    let resid = wj_phi(k, h, beta, t, lf).exp() - 1.0;
    if resid.abs() > 1e-10 {
        return Err(Error::NumericalFailure(format!(
            "wait-and-judge root residual {resid:.3e} exceeds 1e-10 at \
             (K, h, beta) = ({k}, {h}, {beta})"
        )));
    }
    Ok(t)
}

/// Normalized residual of the defining polynomial at `t = 1 - eps`, for
/// tests and audits: `(beta/(K+1)) S(t) / (C(K,h) t^(K-h)) - 1`.
pub fn wait_and_judge_residual(k: usize, h: usize, beta: f64, t: f64) -> f64 {
    let lf = LogFactorial::up_to(k + 1);
    wj_phi(k, h, beta, t, &lf).exp() - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateMode {
    Split,
    WaitAndJudge,
}

/// The a-posteriori feasibility certificate: with confidence at least
/// `1 - beta` over the draw of the K-multisample, the violation probability
/// of the entire solution set is at most `epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "s_K")]
    pub s_k: usize,
    pub beta: f64,
    pub epsilon: f64,
    pub mode: CertificateMode,
    /// True only for K = 0, where the level function is undefined and the
    /// certificate carries no information (epsilon = 1).
    pub vacuous: bool,
    pub instance_hash: String,
    pub seed: u64,
    pub tool_version: String,
}

impl Certificate {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Stable identifier binding a certificate to the exact instance.
pub fn instance_hash(
    program: &ScenarioProgram,
    ms: &Multisample,
    mapping: &AffineMapping,
) -> String {
    let mut h = Hasher::new();
    program.feed_hash(&mut h);
    ms.feed_hash(&mut h);
    mapping.feed_hash(&mut h);
    h.finish_hex()
}

/// Assemble a certificate from an already-computed support cardinality.
/// K = 0 yields the vacuous certificate (epsilon = 1): the level function
/// is undefined there and no data supports any nontrivial guarantee.
pub fn certificate_from_count(
    program: &ScenarioProgram,
    ms: &Multisample,
    mapping: &AffineMapping,
    beta: f64,
    mode: CertificateMode,
    s: usize,
) -> Result<Certificate> {
    check_beta(beta)?;
    let k = ms.len();
    let (s, vacuous, epsilon) = if k == 0 {
        (0, true, 1.0)
    } else {
        let eps = match mode {
            CertificateMode::Split => epsilon_split(k, s, beta)?,
            CertificateMode::WaitAndJudge => epsilon_wait_and_judge(k, s, beta)?,
        };
        (s, false, eps)
    };
    Ok(Certificate {
        k,
        s_k: s,
        beta,
        epsilon,
        mode,
        vacuous,
        instance_hash: instance_hash(program, ms, mapping),
        seed: ms.seed(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

/// End-to-end certification: count the support subsample, evaluate the
/// chosen schedule at `s_K`, and assemble the certificate with enough
/// metadata to reproduce the run. Solver failures propagate; a certificate
/// is never emitted after a numerical failure.
pub fn certify(
    program: &ScenarioProgram,
    ms: &Multisample,
    mapping: &AffineMapping,
    beta: f64,
    mode: CertificateMode,
    cfg: &ExtragradientConfig,
) -> Result<Certificate> {
    check_beta(beta)?;
    let s = if ms.is_empty() {
        0
    } else {
        support_cardinality(program, ms, mapping, cfg)?.s
    };
    certificate_from_count(program, ms, mapping, beta, mode, s)
}

/// The seed stream for fresh out-of-sample draws; kept distinct from the
/// certification stream by its domain tag.
pub fn fresh_draw_stream(seed: u64, repetition: u64) -> rand_chacha::ChaCha8Rng {
    rng::stream(seed, "fresh-violation", repetition)
}
