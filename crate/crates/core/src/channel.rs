//! Rayleigh channel and AWGN generation, and the forward model `y = Hx + n`.
//!
//! Randomness comes from ChaCha8 streams: one master seed, one stream per
//! trial index, so a trial's draws do not depend on which worker runs it.
//! `sigma_n2` is the total complex noise variance per receive antenna; each
//! real dimension carries `sigma_n2 / 2`, and `SNR = 1 / sigma_n2` for unit
//! symbol energy.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg::ComplexMatrix;
use crate::modem::{Constellation, TxVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChannelError {
    #[error("shape mismatch: channel has {channel} columns, transmit vector has {tx} antennas")]
    ShapeMismatch { channel: usize, tx: usize },
}

/// Deterministic RNG for one trial, keyed by master seed and stream index.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Circularly-symmetric complex Gaussian sample with total variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// `Nr x Nt` matrix of i.i.d. CN(0, 1) entries.
pub fn draw_channel<R: Rng + ?Sized>(nr: usize, nt: usize, rng: &mut R) -> ComplexMatrix {
    let data = (0..nr * nt).map(|_| complex_gaussian(rng, 1.0)).collect();
    ComplexMatrix::from_rows(nr, nt, data).expect("sized by construction")
}

pub fn draw_noise<R: Rng + ?Sized>(nr: usize, sigma_n2: f64, rng: &mut R) -> Vec<Complex64> {
    (0..nr).map(|_| complex_gaussian(rng, sigma_n2)).collect()
}

pub fn snr_db_to_noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Noiseless receive vector `Hx`. SM vectors only touch their active column.
pub fn apply_channel(
    h: &ComplexMatrix,
    x: &TxVector,
    constellation: &Constellation,
) -> Result<Vec<Complex64>, ChannelError> {
    if x.nt() != h.cols() {
        return Err(ChannelError::ShapeMismatch {
            channel: h.cols(),
            tx: x.nt(),
        });
    }
    Ok(match x {
        TxVector::Sm { antenna, symbol, .. } => {
            let s = constellation.point(*symbol);
            h.column(*antenna).map(|hv| hv * s).collect()
        }
        TxVector::Smx { .. } => h.mul_vec(&x.dense(constellation)),
    })
}

/// `y = Hx + n` with fresh noise of variance `sigma_n2` per receive antenna.
pub fn transmit<R: Rng + ?Sized>(
    h: &ComplexMatrix,
    x: &TxVector,
    constellation: &Constellation,
    sigma_n2: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>, ChannelError> {
    let mut y = apply_channel(h, x, constellation)?;
    if sigma_n2 > 0.0 {
        for v in &mut y {
            *v += complex_gaussian(rng, sigma_n2);
        }
    }
    Ok(y)
}
