//! Seeded random streams. Every source of randomness in the library is a
//! ChaCha8 stream derived from a master seed plus a domain tag and an index,
//! so results are reproducible regardless of evaluation order.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::hash::Hasher;

/// Derive an independent stream from (master seed, domain tag, index).
pub fn stream(master: u64, domain: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, domain, index))
}

/// Derive a sub-seed from (master seed, domain tag, index).
pub fn derive(master: u64, domain: &str, index: u64) -> u64 {
    Hasher::new().u64(master).str(domain).u64(index).finish()
}

/// Standard normal via Box-Muller.
pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u1: f64 = rng.gen::<f64>();
        if u1 <= f64::MIN_POSITIVE {
            continue;
        }
        let u2: f64 = rng.gen::<f64>();
        return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
    }
}

/// Uniform direction on the unit sphere in R^n.
pub fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
        let norm = crate::linalg::norm2(&v);
        if norm > 1e-12 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

/// Uniform sample from the ball of given center and radius.
pub fn in_ball(rng: &mut ChaCha8Rng, center: &[f64], radius: f64) -> Vec<f64> {
    let n = center.len();
    let dir = unit_vector(rng, n);
    let r = radius * rng.gen::<f64>().powf(1.0 / n as f64);
    center.iter().zip(&dir).map(|(c, d)| c + r * d).collect()
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}
