//! BER of SM-ML, SM-Rx and SM-Tx on the same trials.
//!
//! ```text
//! cargo run --release --example ber_sd_vs_ml -- [trials]
//! ```

use smsd::detectors::DetectorKind;
use smsd::harness::{run_sweep, SweepConfig};
use smsd::modem::Scheme;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trials: u64 = std::env::args().nth(1).map_or(Ok(20_000), |s| s.parse())?;
    let mut cfg = SweepConfig::new(
        Scheme::Sm,
        4,
        4,
        16,
        vec![DetectorKind::SmMl, DetectorKind::SmRx, DetectorKind::SmTx],
    );
    cfg.snr_db = vec![0.0, 4.0, 8.0, 12.0, 16.0];
    cfg.trials = trials;
    cfg.max_trials = trials;
    let records = run_sweep(&cfg)?;

    println!("SM, Nt = 4, Nr = 4, 16-QAM (m = 6), {trials} trials per point");
    println!("{:>6}  {:>11}  {:>11}  {:>11}", "SNR", "sm-ml", "sm-rx", "sm-tx");
    for chunk in records.chunks(3) {
        println!(
            "{:>4} dB  {:>11.3e}  {:>11.3e}  {:>11.3e}",
            chunk[0].snr_db, chunk[0].ber, chunk[1].ber, chunk[2].ber
        );
    }
    Ok(())
}
