//! Sphere decoding for spatial-modulation (SM) MIMO links.
//!
//! The crate provides constellations and bit mapping ([`modem`]), a
//! Rayleigh-fading channel ([`channel`]), the real-valued model and
//! Cholesky tools ([`linalg`]), maximum-likelihood and sphere detectors
//! with operation counting ([`detectors`]), closed-form complexity
//! ([`complexity`]), radius calibration and the BER union bound
//! ([`analysis`]), and a Monte Carlo harness with a CLI ([`harness`]).

pub mod analysis;
pub mod channel;
pub mod complexity;
pub mod detectors;
pub mod harness;
pub mod linalg;
pub mod modem;
