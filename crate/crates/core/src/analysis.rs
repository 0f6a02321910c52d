//! Closed-form performance tools for SM sphere decoding: the regularized
//! incomplete gamma function (from `statrs`), the probability that the
//! transmitted point falls outside the initial sphere, the radius constant
//! that pins that probability, and the Rayleigh-averaged union bound on the
//! bit error rate.

use serde::Serialize;
use statrs::function::gamma;
use thiserror::Error;

use crate::channel::snr_db_to_noise_variance;
use crate::modem::{bit_errors, Modem, ModemError, Scheme};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("argument outside domain: {0}")]
    DomainError(String),
    #[error("root search did not converge: {0}")]
    NoConvergence(String),
    #[error(transparent)]
    Modem(#[from] ModemError),
    #[error("invalid bound spec: {0}")]
    InvalidSpec(String),
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    gamma::ln_gamma(x)
}

fn check_gamma_args(a: f64, x: f64) -> Result<(), AnalysisError> {
    if a.is_nan() || a <= 0.0 || a.is_infinite() || x.is_nan() || x < 0.0 {
        return Err(AnalysisError::DomainError(format!("gamma(a = {a}, x = {x})")));
    }
    Ok(())
}

/// `P(a, x) = gamma(a, x) / Gamma(a)`.
pub fn regularized_lower_gamma(a: f64, x: f64) -> Result<f64, AnalysisError> {
    check_gamma_args(a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok(gamma::gamma_lr(a, x))
}

/// `Q(a, x) = 1 - P(a, x)`, evaluated without cancellation in the tail.
pub fn regularized_upper_gamma(a: f64, x: f64) -> Result<f64, AnalysisError> {
    check_gamma_args(a, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(gamma::gamma_ur(a, x))
}

/// Probability that `|n|^2 > r2` for `Nr` receive antennas with total noise
/// variance `sigma_n2` each, i.e. `Q(Nr, r2 / sigma_n2)`.
pub fn pr_outside_sphere(r2: f64, sigma_n2: f64, nr: usize) -> Result<f64, AnalysisError> {
    if sigma_n2.is_nan() || sigma_n2 <= 0.0 || nr == 0 || r2.is_nan() || r2 < 0.0 {
        return Err(AnalysisError::DomainError(format!(
            "pr_outside_sphere(r2 = {r2}, sigma_n2 = {sigma_n2}, nr = {nr})"
        )));
    }
    regularized_upper_gamma(nr as f64, r2 / sigma_n2)
}

/// Radius constant `alpha` such that `R^2 = alpha * Nr * sigma_n2` misses the
/// transmitted point with probability `target_miss`.
pub fn solve_alpha(nr: usize, target_miss: f64) -> Result<f64, AnalysisError> {
    if nr == 0 || !(target_miss > 0.0 && target_miss < 1.0) {
        return Err(AnalysisError::DomainError(format!(
            "solve_alpha(nr = {nr}, target = {target_miss})"
        )));
    }
    let a = nr as f64;
    let miss = |t: f64| regularized_upper_gamma(a, t).expect("t >= 0");
    let (mut lo, mut hi) = (0.0, a.max(1.0));
    let mut expansions = 0;
    while miss(hi) > target_miss {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(AnalysisError::NoConvergence(format!(
                "could not bracket alpha for nr = {nr}, target = {target_miss}"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if miss(mid) > target_miss {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi) / a)
}

/// `zeta(c) = (1 - sqrt(c / (1 + c))) / 2`.
pub fn zeta(c: f64) -> Result<f64, AnalysisError> {
    if c.is_nan() || c < 0.0 {
        return Err(AnalysisError::DomainError(format!("zeta({c})")));
    }
    if c.is_infinite() {
        return Ok(0.0);
    }
    Ok(0.5 * (1.0 - (c / (1.0 + c)).sqrt()))
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Rayleigh-averaged pairwise error probability for two SM points separated
/// by `sigma_s2` (squared Euclidean distance) with `Nr` receive antennas.
pub fn pairwise_error_probability(sigma_s2: f64, sigma_n2: f64, nr: usize) -> Result<f64, AnalysisError> {
    if sigma_s2.is_nan() || sigma_s2 < 0.0 || sigma_n2.is_nan() || sigma_n2 <= 0.0 || nr == 0 {
        return Err(AnalysisError::DomainError(format!(
            "pep(sigma_s2 = {sigma_s2}, sigma_n2 = {sigma_n2}, nr = {nr})"
        )));
    }
    let z = zeta(sigma_s2 / (4.0 * sigma_n2))?;
    let n = nr as u64;
    let sum: f64 = (0..n)
        .map(|r| binomial(n - 1 + r, r) * (1.0 - z).powi(r as i32))
        .sum();
    Ok(z.powi(nr as i32) * sum)
}

/// Squared separation and bit distance of one ordered pair of SM points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairwiseTerm {
    pub sigma_s2: f64,
    pub n_bits: u32,
}

/// All ordered pairs of the SM codebook, including the zero diagonal.
pub fn pairwise_terms(modem: &Modem) -> Vec<PairwiseTerm> {
    let book = modem.codebook();
    let dense: Vec<_> = book.iter().map(|x| modem.dense(x)).collect();
    let mut out = Vec::with_capacity(book.len() * book.len());
    for (xt, dt) in book.iter().zip(&dense) {
        for (x, d) in book.iter().zip(&dense) {
            let sigma_s2 = dt.iter().zip(d).map(|(a, b)| (a - b).norm_sqr()).sum();
            out.push(PairwiseTerm {
                sigma_s2,
                n_bits: bit_errors(xt, x).expect("same modem"),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSpec {
    pub nt: usize,
    pub nr: usize,
    pub mod_order: usize,
    pub snr_db: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundPoint {
    pub snr_db: f64,
    pub ber: f64,
}

/// Union bound on the SM bit error rate averaged over i.i.d. Rayleigh
/// channels, one value per SNR point.
pub fn union_bound_ber(spec: &BoundSpec) -> Result<Vec<BoundPoint>, AnalysisError> {
    if spec.snr_db.is_empty() {
        return Err(AnalysisError::InvalidSpec("empty SNR list".into()));
    }
    if spec.nr == 0 {
        return Err(AnalysisError::InvalidSpec("nr must be at least 1".into()));
    }
    let modem = Modem::new(Scheme::Sm, spec.nt, spec.mod_order)?;
    let m = modem.bits();
    let terms = pairwise_terms(&modem);
    // merge pairs with equal separation to cut PEP evaluations
    let mut weights: Vec<(f64, u64)> = terms
        .iter()
        .filter(|t| t.n_bits > 0)
        .map(|t| (t.sigma_s2, u64::from(t.n_bits)))
        .collect();
    weights.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, u64)> = Vec::new();
    for (s, n) in weights {
        match merged.last_mut() {
            Some(last) if (last.0 - s).abs() <= 1e-12 * s.max(1.0) => last.1 += n,
            _ => merged.push((s, n)),
        }
    }
    let norm = f64::from(m) * (1u64 << m) as f64;
    spec.snr_db
        .iter()
        .map(|&snr_db| {
            let sigma_n2 = snr_db_to_noise_variance(snr_db);
            let mut acc = 0.0;
            for &(s, n) in &merged {
                acc += n as f64 * pairwise_error_probability(s, sigma_n2, spec.nr)?;
            }
            Ok(BoundPoint {
                snr_db,
                ber: acc / norm,
            })
        })
        .collect()
}

/// Row of the radius table printed by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusRow {
    pub nr: usize,
    pub alpha: f64,
    pub miss_probability: f64,
}

pub fn radius_table(nrs: &[usize], target_miss: f64) -> Result<Vec<RadiusRow>, AnalysisError> {
    nrs.iter()
        .map(|&nr| {
            let alpha = solve_alpha(nr, target_miss)?;
            Ok(RadiusRow {
                nr,
                alpha,
                miss_probability: pr_outside_sphere(alpha * nr as f64, 1.0, nr)?,
            })
        })
        .collect()
}
