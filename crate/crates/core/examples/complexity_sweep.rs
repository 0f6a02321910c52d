//! Relative complexity of the sphere decoders against SNR.
//!
//! Prints mean counted operations as a percentage of SM-ML for SM-Rx,
//! SM-Tx and SMX-SD at a fixed spectral efficiency.
//!
//! ```text
//! cargo run --release --example complexity_sweep -- [m] [nr] [trials]
//! ```

use smsd::detectors::DetectorKind;
use smsd::harness::{run_sweep, SweepConfig};
use smsd::modem::Scheme;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let m: u32 = args.first().map_or(Ok(6), |s| s.parse())?;
    let nr: usize = args.get(1).map_or(Ok(2), |s| s.parse())?;
    let trials: u64 = args.get(2).map_or(Ok(20_000), |s| s.parse())?;

    let mut setups = Vec::new();
    for log_nt in 1..m.min(6) {
        let nt = 1usize << log_nt;
        setups.push((Scheme::Sm, nt, 1usize << (m - log_nt), vec![DetectorKind::SmRx, DetectorKind::SmTx]));
    }
    // SMX with two antennas, when m splits evenly
    if m.is_multiple_of(2) {
        setups.push((Scheme::Smx, 2, 1usize << (m / 2), vec![DetectorKind::SmxSd]));
    }

    println!("m = {m}, Nr = {nr}, {trials} trials per point; values are % of SM-ML operations");
    println!("{:<22}{}", "detector", (0..=30).step_by(5).map(|s| format!("{s:>7} dB")).collect::<String>());
    for (scheme, nt, order, detectors) in setups {
        let mut cfg = SweepConfig::new(scheme, nt, nr, order, detectors);
        cfg.snr_db = (0..=30).step_by(5).map(f64::from).collect();
        cfg.trials = trials;
        cfg.max_trials = trials;
        let records = run_sweep(&cfg)?;
        for det in &cfg.detectors {
            let row: String = records
                .iter()
                .filter(|r| r.detector == det.name())
                .map(|r| format!("{:>10.1}", r.rel_pct))
                .collect();
            println!("{:<22}{row}", format!("{det} Nt={nt} M={order}"));
        }
    }
    Ok(())
}
