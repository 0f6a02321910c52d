//! SM against SMX at equal spectral efficiency, both with ML detection.
//!
//! Reports the SNR each scheme needs for a target BER.
//!
//! ```text
//! cargo run --release --example sm_vs_smx_ber -- [nr] [trials]
//! ```

use smsd::detectors::DetectorKind;
use smsd::harness::{run_sweep, SweepConfig, SweepRecord};
use smsd::modem::Scheme;

const TARGET: f64 = 1e-3;

fn snr_at(records: &[SweepRecord], target: f64) -> Option<f64> {
    records.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        (a.ber >= target && b.ber < target && b.ber > 0.0).then(|| {
            a.snr_db + (b.snr_db - a.snr_db) * (a.ber.ln() - target.ln()) / (a.ber.ln() - b.ber.ln())
        })
    })
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let nr: usize = args.first().map_or(Ok(4), |s| s.parse())?;
    let trials: u64 = args.get(1).map_or(Ok(50_000), |s| s.parse())?;

    // m = 6 bits per channel use
    let setups = [
        (Scheme::Sm, 32, 2, DetectorKind::SmMl, "BPSK-SM  Nt=32"),
        (Scheme::Smx, 6, 2, DetectorKind::SmxMl, "BPSK-SMX Nt=6"),
        (Scheme::Sm, 8, 8, DetectorKind::SmMl, "8QAM-SM  Nt=8"),
        (Scheme::Smx, 2, 8, DetectorKind::SmxMl, "8QAM-SMX Nt=2"),
    ];
    println!("m = 6, Nr = {nr}: SNR needed for BER {TARGET:e}");
    for (scheme, nt, order, det, label) in setups {
        let mut cfg = SweepConfig::new(scheme, nt, nr, order, vec![det]);
        cfg.snr_db = (0..=20).map(f64::from).collect();
        cfg.trials = trials;
        cfg.max_trials = trials;
        let records = run_sweep(&cfg)?;
        match snr_at(&records, TARGET) {
            Some(s) => println!("{label}: {s:.2} dB"),
            None => println!("{label}: target not crossed on 0..20 dB"),
        }
    }
    Ok(())
}
