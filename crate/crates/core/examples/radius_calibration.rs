//! Initial sphere radius: solve for alpha, then check the miss rate of the
//! transmitted point empirically.
//!
//! ```text
//! cargo run --release --example radius_calibration -- [target] [draws]
//! ```

use smsd::analysis::{pr_outside_sphere, solve_alpha};
use smsd::channel::{draw_noise, trial_rng};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let target: f64 = args.first().map_or(Ok(1e-3), |s| s.parse())?;
    let draws: u64 = args.get(1).map_or(Ok(1_000_000), |s| s.parse())?;

    println!("target miss probability {target:e}, {draws} noise draws per Nr");
    println!("{:>3}  {:>8}  {:>12}  {:>12}", "Nr", "alpha", "predicted", "observed");
    for nr in [1usize, 2, 4, 8] {
        let alpha = solve_alpha(nr, target)?;
        // the miss rate does not depend on the noise level
        let sigma_n2 = 1.0;
        let r2 = alpha * nr as f64 * sigma_n2;
        let mut rng = trial_rng(1, nr as u64);
        let misses = (0..draws)
            .filter(|_| draw_noise(nr, sigma_n2, &mut rng).iter().map(|n| n.norm_sqr()).sum::<f64>() > r2)
            .count();
        println!(
            "{nr:>3}  {alpha:>8.3}  {:>12.3e}  {:>12.3e}",
            pr_outside_sphere(r2, sigma_n2, nr)?,
            misses as f64 / draws as f64
        );
    }
    Ok(())
}
