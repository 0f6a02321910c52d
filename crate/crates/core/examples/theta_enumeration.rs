//! The SM-Tx candidate set for one received vector, checked against brute
//! force.
//!
//! ```text
//! cargo run --release --example theta_enumeration -- [seed]
//! ```

use rand::Rng;
use smsd::analysis::solve_alpha;
use smsd::channel::{draw_channel, snr_db_to_noise_variance, transmit, trial_rng};
use smsd::detectors::{enumerate_theta, initial_radius, RadiusUpdate};
use smsd::linalg::{build_real_model, real_expand_vector};
use smsd::modem::{Modem, Scheme, TxVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(3), |s| s.parse())?;
    let (nt, nr, order, snr_db) = (4, 2, 16, 6.0);
    let modem = Modem::new(Scheme::Sm, nt, order)?;
    let sigma_n2 = snr_db_to_noise_variance(snr_db);
    let mut rng = trial_rng(seed, 0);
    let x = modem.map_word(rng.random_range(0..1u64 << modem.bits()));
    let h = draw_channel(nr, nt, &mut rng);
    let y = transmit(&h, &x, modem.constellation(), sigma_n2, &mut rng)?;
    let model = build_real_model(&h, &y, sigma_n2)?;
    let radius = initial_radius(nr, sigma_n2, solve_alpha(nr, 1e-6)?);

    let search = enumerate_theta(&model, modem.constellation(), radius, RadiusUpdate::Fixed)?;
    let brute = modem
        .codebook()
        .iter()
        .filter(|c| model.metric(&real_expand_vector(&modem.dense(c))) <= radius.r2)
        .count();

    println!("SM, Nt = {nt}, Nr = {nr}, {order}-QAM at {snr_db} dB; regularizer phi = {}", model.phi);
    println!("transmitted {x:?}");
    println!(
        "R^2 = {:.4}: {} of {} candidates inside ({} by brute force), {} real-part intervals, {} operations",
        radius.r2,
        search.members.len(),
        nt * order,
        brute,
        search.n19,
        search.ops.get()
    );
    let mut members = search.members.clone();
    members.sort_by(|a, b| a.metric.total_cmp(&b.metric));
    for p in members.iter().take(8) {
        let sent = TxVector::Sm { nt, antenna: p.antenna, symbol: p.symbol } == x;
        let tag = if sent { "  <- sent" } else { "" };
        println!("  antenna {} symbol {:>3}  metric {:.4}{tag}", p.antenna, p.symbol, p.metric);
    }
    Ok(())
}
