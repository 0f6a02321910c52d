//! Rayleigh-fading union bound on SM bit error rate next to a short
//! SM-ML simulation.
//!
//! ```text
//! cargo run --release --example union_bound -- [nt] [nr] [M]
//! ```

use smsd::analysis::{union_bound_ber, BoundSpec};
use smsd::detectors::DetectorKind;
use smsd::harness::{run_sweep, SweepConfig};
use smsd::modem::Scheme;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<usize> = std::env::args().skip(1).map(|s| s.parse()).collect::<Result<_, _>>()?;
    let (nt, nr, order) = (*args.first().unwrap_or(&4), *args.get(1).unwrap_or(&4), *args.get(2).unwrap_or(&16));
    let snr_db: Vec<f64> = (0..=8).map(|i| f64::from(i) * 2.0).collect();

    let bound = union_bound_ber(&BoundSpec {
        nt,
        nr,
        mod_order: order,
        snr_db: snr_db.clone(),
    })?;
    let mut cfg = SweepConfig::new(Scheme::Sm, nt, nr, order, vec![DetectorKind::SmMl]);
    cfg.snr_db = snr_db;
    cfg.trials = 20_000;
    cfg.max_trials = 400_000;
    let sim = run_sweep(&cfg)?;

    println!("SM, Nt = {nt}, Nr = {nr}, M = {order}");
    println!("{:>6}  {:>11}  {:>11}  {:>6}", "SNR", "bound", "simulated", "ratio");
    for (b, s) in bound.iter().zip(&sim) {
        println!("{:>4} dB  {:>11.3e}  {:>11.3e}  {:>6.2}", b.snr_db, b.ber, s.ber, b.ber / s.ber);
    }
    Ok(())
}
