//! Closed-form operation counts (real multiplications and divisions) for the
//! detectors, and reconciliation helpers against the runtime counters.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexityError {
    #[error("receive-dimension count {sum} outside [{lo}, {hi}]")]
    RangeViolation { sum: u64, lo: u64, hi: u64 },
}

/// Exhaustive SM detection: 8 per (antenna, symbol, receive antenna) term.
pub fn c_sm_ml(m: u32, nr: usize) -> u64 {
    8 * nr as u64 * (1u64 << m)
}

/// Exhaustive SMX detection: `Nt + 1` complex products per receive antenna
/// and candidate.
pub fn c_smx_ml(m: u32, nt: usize, nr: usize) -> u64 {
    4 * (nt as u64 + 1) * nr as u64 * (1u64 << m)
}

/// Percentage saved by SM-ML over SMX-ML at equal spectral efficiency.
pub fn relative_ml_reduction(nt: usize) -> f64 {
    100.0 * (1.0 - 2.0 / (nt as f64 + 1.0))
}

/// SM-Rx cost from the summed per-candidate receive-dimension counts.
pub fn c_rx_from_counts(ntilde_sum: u64, m: u32, nr: usize) -> Result<u64, ComplexityError> {
    let points = 1u64 << m;
    let (lo, hi) = (points, 2 * nr as u64 * points);
    if ntilde_sum < lo || ntilde_sum > hi {
        return Err(ComplexityError::RangeViolation {
            sum: ntilde_sum,
            lo,
            hi,
        });
    }
    Ok(3 * ntilde_sum)
}

/// Cholesky cost `4 Nt^3 / 3`, rounded up.
pub fn c_cholesky(nt: usize) -> u64 {
    let n = nt as u64;
    (4 * n * n * n).div_ceil(3)
}

/// Gram matrix, least-squares point and search centre plus the Cholesky
/// factor.
pub fn c_precomp(nt: usize, nr: usize) -> u64 {
    let (t, r) = (nt as u64, nr as u64);
    c_cholesky(nt) + t * (4 * r * t + 6 * r + 6 * t + 3)
}

/// Interval cost: `2Nt` divisions for the imaginary intervals plus
/// `2Nt + 3` per real-part interval evaluated.
pub fn c_interval(nt: usize, n19: u64) -> u64 {
    let t = nt as u64;
    2 * t + (2 * t + 3) * n19
}

/// Upper bound on SM-Tx cost given the examined candidate count.
pub fn c_tx_bound(nt: usize, nr: usize, card_theta: u64, n19: u64) -> u64 {
    c_precomp(nt, nr) + c_interval(nt, n19) + 3 * nt as u64 * card_theta
}

/// `100 * C_SD / C_SM-ML`.
pub fn relative_pct(ops: f64, m: u32, nr: usize) -> f64 {
    100.0 * ops / c_sm_ml(m, nr) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub detector: String,
    pub formula_value: Option<u64>,
    pub counted_mean: Option<f64>,
    pub rel_pct: f64,
}

/// One row of the closed-form table printed by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormRow {
    pub m: u32,
    pub nt: usize,
    pub nr: usize,
    pub sm_ml: u64,
    pub smx_ml: u64,
    pub ml_reduction_pct: f64,
    pub rx_min: u64,
    pub rx_max: u64,
    pub tx_precomp: u64,
}

pub fn closed_form_table(ms: &[u32], nts: &[usize], nrs: &[usize]) -> Vec<ClosedFormRow> {
    let mut rows = Vec::new();
    for &m in ms {
        for &nt in nts {
            for &nr in nrs {
                rows.push(ClosedFormRow {
                    m,
                    nt,
                    nr,
                    sm_ml: c_sm_ml(m, nr),
                    smx_ml: c_smx_ml(m, nt, nr),
                    ml_reduction_pct: relative_ml_reduction(nt),
                    rx_min: 3 * (1u64 << m),
                    rx_max: 6 * nr as u64 * (1u64 << m),
                    tx_precomp: c_precomp(nt, nr),
                });
            }
        }
    }
    rows
}
