//! Monte Carlo sweep engine.
//!
//! Every trial owns a ChaCha8 stream keyed by `(snr_index << 40) | trial`
//! under the master seed, so results are identical for any worker count.
//! All detectors of a sweep see the same bits, channel and noise in a trial.
//! Trials run in batches of `trials`; after the first batch, more batches run
//! until every detector has `min_bit_errors` errors or `max_trials` is hit.
//! Points that stop short of `min_bit_errors` are reported as censored.

pub mod cli;
pub mod config;
pub mod emit;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::solve_alpha;
use crate::channel::{draw_channel, snr_db_to_noise_variance, transmit, trial_rng};
use crate::complexity::c_sm_ml;
use crate::detectors::{initial_radius, DetectError, Detector, DetectorKind};
use crate::linalg::LinalgError;
use crate::modem::{bit_errors, Modem, Scheme};

pub use emit::{emit, read_csv, write_records, OutputFormat};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    ConfigError(String),
    #[error("no records to write")]
    EmptyRecords,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Analysis(#[from] crate::analysis::AnalysisError),
}

pub const DEFAULT_MIN_BIT_ERRORS: u64 = 200;
pub const DEFAULT_TARGET_MISS: f64 = 1e-6;

/// 0 to 30 dB in 2 dB steps.
pub fn default_snr_grid() -> Vec<f64> {
    (0..=15).map(|i| f64::from(i) * 2.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub scheme: Scheme,
    pub nt: usize,
    pub nr: usize,
    pub mod_order: usize,
    pub detectors: Vec<DetectorKind>,
    pub snr_db: Vec<f64>,
    /// Trials per batch and the minimum per SNR point.
    pub trials: u64,
    /// Hard cap on trials per SNR point.
    pub max_trials: u64,
    pub seed: u64,
    pub min_bit_errors: u64,
    /// Radius constant; `None` solves for a 1e-6 miss probability.
    pub alpha: Option<f64>,
}

impl SweepConfig {
    pub fn new(scheme: Scheme, nt: usize, nr: usize, mod_order: usize, detectors: Vec<DetectorKind>) -> Self {
        Self {
            scheme,
            nt,
            nr,
            mod_order,
            detectors,
            snr_db: default_snr_grid(),
            trials: 10_000,
            max_trials: 10_000,
            seed: 0,
            min_bit_errors: DEFAULT_MIN_BIT_ERRORS,
            alpha: None,
        }
    }

    pub fn validate(&self) -> Result<Modem, HarnessError> {
        let err = |m: String| Err(HarnessError::ConfigError(m));
        if self.trials == 0 {
            return err("trials must be at least 1".into());
        }
        if self.max_trials < self.trials {
            return err(format!(
                "max_trials ({}) must be at least trials ({})",
                self.max_trials, self.trials
            ));
        }
        if self.nr == 0 {
            return err("nr must be at least 1".into());
        }
        if self.snr_db.is_empty() {
            return err("SNR grid is empty".into());
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) || self.snr_db.windows(2).any(|w| w[1] <= w[0]) {
            return err("SNR grid must be finite and strictly increasing".into());
        }
        if self.detectors.is_empty() {
            return err("no detectors selected".into());
        }
        if let Some(d) = self.detectors.iter().find(|d| d.scheme() != self.scheme) {
            return err(format!("detector {d} does not apply to scheme {}", self.scheme));
        }
        if let Some(a) = self.alpha {
            if a.is_nan() || a <= 0.0 {
                return err(format!("alpha must be positive, got {a}"));
            }
        }
        Modem::new(self.scheme, self.nt, self.mod_order).map_err(|e| HarnessError::ConfigError(e.to_string()))
    }
}

/// One (detector, SNR) result row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub detector: String,
    pub snr_db: f64,
    pub trials: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub mean_ops: f64,
    pub rel_pct: f64,
    pub restarts: u64,
    pub mean_card_theta: f64,
}

impl SweepRecord {
    pub fn is_censored(&self, min_bit_errors: u64) -> bool {
        self.bit_errors < min_bit_errors
    }
}

/// Per-detector running totals for one SNR point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub trials: u64,
    pub bit_errors: u64,
    pub ops: u64,
    pub restarts: u64,
    pub candidates: u64,
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.trials += o.trials;
        self.bit_errors += o.bit_errors;
        self.ops += o.ops;
        self.restarts += o.restarts;
        self.candidates += o.candidates;
        self
    }
}

/// Everything one sweep needs, built once.
pub struct Link {
    pub modem: Modem,
    pub detectors: Vec<Detector>,
    pub nr: usize,
    pub alpha: f64,
}

impl Link {
    pub fn new(config: &SweepConfig) -> Result<Self, HarnessError> {
        let modem = config.validate()?;
        let detectors = config
            .detectors
            .iter()
            .map(|&k| Detector::new(k, &modem))
            .collect::<Result<_, _>>()?;
        let alpha = match config.alpha {
            Some(a) => a,
            None => solve_alpha(config.nr, DEFAULT_TARGET_MISS)?,
        };
        Ok(Self {
            modem,
            detectors,
            nr: config.nr,
            alpha,
        })
    }

    /// Runs one trial and returns one tally per detector.
    pub fn run_trial(&self, seed: u64, stream: u64, sigma_n2: f64) -> Result<Vec<Tally>, DetectError> {
        let mut rng = trial_rng(seed, stream);
        let m = self.modem.bits();
        let word = rng.random_range(0..1u64 << m);
        let x = self.modem.map_word(word);
        let radius = initial_radius(self.nr, sigma_n2, self.alpha);
        'draw: loop {
            let h = draw_channel(self.nr, self.modem.nt(), &mut rng);
            let y = transmit(&h, &x, self.modem.constellation(), sigma_n2, &mut rng)
                .map_err(|e| DetectError::Shape(e.to_string()))?;
            let mut out = Vec::with_capacity(self.detectors.len());
            for det in &self.detectors {
                let o = match det.detect(&y, &h, self.modem.constellation(), sigma_n2, radius) {
                    Ok(o) => o,
                    // singular channel with no regularizer: redraw
                    Err(DetectError::Linalg(LinalgError::NotPositiveDefinite { .. })) => continue 'draw,
                    Err(e) => return Err(e),
                };
                out.push(Tally {
                    trials: 1,
                    bit_errors: u64::from(bit_errors(&x, &o.estimate).expect("same modem")),
                    ops: o.ops.get(),
                    restarts: u64::from(o.restarts),
                    candidates: o.candidates_inside,
                });
            }
            return Ok(out);
        }
    }
}

fn stream_id(snr_index: usize, trial: u64) -> u64 {
    ((snr_index as u64) << 40) | trial
}

fn run_batch(link: &Link, seed: u64, snr_index: usize, sigma_n2: f64, range: std::ops::Range<u64>) -> Result<Vec<Tally>, DetectError> {
    let n = link.detectors.len();
    range
        .into_par_iter()
        .map(|t| link.run_trial(seed, stream_id(snr_index, t), sigma_n2))
        .try_reduce(
            || vec![Tally::default(); n],
            |a, b| Ok(a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect()),
        )
}

/// Runs the sweep described by `config` on the current rayon pool.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>, HarnessError> {
    let link = Link::new(config)?;
    let m = link.modem.bits();
    let ml_ops = c_sm_ml(m, config.nr) as f64;
    let mut records = Vec::with_capacity(config.snr_db.len() * link.detectors.len());
    for (p, &snr_db) in config.snr_db.iter().enumerate() {
        let sigma_n2 = snr_db_to_noise_variance(snr_db);
        let mut done = 0u64;
        let mut totals = vec![Tally::default(); link.detectors.len()];
        loop {
            let end = (done + config.trials).min(config.max_trials);
            let batch = run_batch(&link, config.seed, p, sigma_n2, done..end)?;
            totals = totals.into_iter().zip(batch).map(|(a, b)| a.merge(b)).collect();
            done = end;
            let enough = totals.iter().all(|t| t.bit_errors >= config.min_bit_errors);
            if enough || done >= config.max_trials {
                break;
            }
        }
        for (det, t) in link.detectors.iter().zip(&totals) {
            let trials = t.trials as f64;
            let mean_ops = t.ops as f64 / trials;
            records.push(SweepRecord {
                detector: det.kind().name().to_string(),
                snr_db,
                trials: t.trials,
                bit_errors: t.bit_errors,
                ber: t.bit_errors as f64 / (trials * f64::from(m)),
                mean_ops,
                rel_pct: 100.0 * mean_ops / ml_ops,
                restarts: t.restarts,
                mean_card_theta: t.candidates as f64 / trials,
            });
        }
    }
    Ok(records)
}

/// Runs the sweep on a dedicated pool with `threads` workers.
pub fn run_sweep_with_threads(config: &SweepConfig, threads: usize) -> Result<Vec<SweepRecord>, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::ConfigError(e.to_string()))?;
    pool.install(|| run_sweep(config))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(detectors: Vec<DetectorKind>) -> SweepConfig {
        let mut c = SweepConfig::new(Scheme::Sm, 4, 2, 4, detectors);
        c.snr_db = vec![0.0, 10.0];
        c.trials = 500;
        c.max_trials = 500;
        c.seed = 3;
        c
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let base = small(vec![DetectorKind::SmMl]);
        let mut c = base.clone();
        c.trials = 0;
        assert!(matches!(c.validate(), Err(HarnessError::ConfigError(_))));
        let mut c = base.clone();
        c.snr_db = vec![10.0, 5.0];
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.detectors = vec![DetectorKind::SmxMl];
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.nt = 3;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.max_trials = 10;
        assert!(c.validate().is_err());
        assert!(base.validate().is_ok());
    }

    #[test]
    fn high_snr_is_error_free() {
        let mut c = small(vec![DetectorKind::SmMl]);
        c.snr_db = vec![60.0];
        c.trials = 1000;
        c.max_trials = 1000;
        let r = run_sweep(&c).unwrap();
        assert_eq!(r[0].bit_errors, 0);
        assert_eq!(r[0].ber, 0.0);
        assert_eq!(r[0].trials, 1000);
    }

    #[test]
    fn ml_row_is_exactly_one_hundred_percent() {
        let r = run_sweep(&small(vec![DetectorKind::SmMl, DetectorKind::SmRx])).unwrap();
        for rec in r.iter().filter(|r| r.detector == "sm-ml") {
            assert_eq!(rec.rel_pct, 100.0);
        }
        for rec in &r {
            assert!((rec.ber - rec.bit_errors as f64 / (rec.trials as f64 * 4.0)).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&rec.ber));
        }
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let c = small(vec![DetectorKind::SmMl, DetectorKind::SmTx]);
        let a = run_sweep_with_threads(&c, 1).unwrap();
        let b = run_sweep_with_threads(&c, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn extends_trials_until_error_target() {
        let mut c = small(vec![DetectorKind::SmMl]);
        c.snr_db = vec![20.0];
        c.trials = 200;
        c.max_trials = 20_000;
        c.min_bit_errors = 50;
        let r = run_sweep(&c).unwrap();
        assert!(r[0].trials > 200);
        assert!(r[0].bit_errors >= 50 || r[0].trials == 20_000);
        assert_eq!(r[0].trials % 200, 0);
    }
}
