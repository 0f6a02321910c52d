use proptest::prelude::*;
use smsd::channel::{draw_channel, snr_db_to_noise_variance, transmit, trial_rng};
use smsd::complexity::{c_sm_ml, c_tx_bound};
use smsd::detectors::{initial_radius, sm_ml, sm_rx, smx_ml, smx_sd, Codebook, SmTx, SphereRadius};
use smsd::linalg::{real_expand_matrix, real_expand_vector};
use smsd::modem::{Modem, Scheme};
use rand::Rng;

#[test]
fn smx_sd_equals_smx_ml_when_determined() {
    let modem = Modem::new(Scheme::Smx, 2, 8).unwrap();
    let book = Codebook::new(&modem);
    let sigma_n2 = snr_db_to_noise_variance(8.0);
    for t in 0..1000 {
        let mut rng = trial_rng(11, t);
        let x = modem.map_word(rng.random_range(0..1u64 << modem.bits()));
        let h = draw_channel(2, 2, &mut rng);
        let y = transmit(&h, &x, modem.constellation(), sigma_n2, &mut rng).unwrap();
        let ml = smx_ml(&y, &h, &book).unwrap();
        let sd = smx_sd(&y, &h, modem.constellation(), sigma_n2, initial_radius(2, sigma_n2, 8.3)).unwrap();
        assert_eq!(sd.estimate, ml.estimate, "trial {t}");
    }
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    for (rank, i) in idx.into_iter().enumerate() {
        r[i] = rank as f64;
    }
    r
}

/// Underdetermined SMX-SD should get costlier as the regularizer shrinks.
/// Not observed: with both `R^2` and `phi` proportional to the noise
/// variance the rank-deficient levels keep a fixed interval width, and the
/// mean cost is flat to falling.
#[test]
#[ignore = "not reproduced: mean cost is flat to falling in SNR"]
fn underdetermined_smx_sd_cost_grows_with_snr() {
    let modem = Modem::new(Scheme::Smx, 3, 4).unwrap();
    let snrs: Vec<f64> = (0..=6).map(|i| f64::from(i) * 5.0).collect();
    let alpha = smsd::analysis::solve_alpha(2, 1e-6).unwrap();
    let mean_ops: Vec<f64> = snrs
        .iter()
        .map(|&snr| {
            let sigma_n2 = snr_db_to_noise_variance(snr);
            let total: u64 = (0..2000)
                .map(|t| {
                    let mut rng = trial_rng(5, t);
                    let x = modem.map_word(rng.random_range(0..1u64 << modem.bits()));
                    let h = draw_channel(2, 3, &mut rng);
                    let y = transmit(&h, &x, modem.constellation(), sigma_n2, &mut rng).unwrap();
                    smx_sd(&y, &h, modem.constellation(), sigma_n2, initial_radius(2, sigma_n2, alpha))
                        .unwrap()
                        .ops
                        .get()
                })
                .sum();
            total as f64 / 2000.0
        })
        .collect();
    let (rs, ro) = (ranks(&snrs), ranks(&mean_ops));
    let n = rs.len() as f64;
    let d2: f64 = rs.iter().zip(&ro).map(|(a, b)| (a - b) * (a - b)).sum();
    let spearman = 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
    assert!(spearman > 0.0, "mean ops {mean_ops:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sm_rx_cost_stays_in_range(seed in any::<u64>(), snr in 0.0f64..30.0, k in 1u32..4, nr in 1usize..5) {
        let modem = Modem::new(Scheme::Sm, 1 << k, 16).unwrap();
        let m = modem.bits();
        let sigma_n2 = snr_db_to_noise_variance(snr);
        let mut rng = trial_rng(seed, 0);
        let x = modem.map_word(rng.random_range(0..1u64 << m));
        let h = draw_channel(nr, modem.nt(), &mut rng);
        let y = transmit(&h, &x, modem.constellation(), sigma_n2, &mut rng).unwrap();
        let out = sm_rx(&real_expand_vector(&y), &real_expand_matrix(&h), modem.constellation(), modem.nt(), SphereRadius::infinite()).unwrap();
        let ops = out.ops.get();
        prop_assert!(ops >= 3 << m && ops <= 6 * nr as u64 * (1 << m), "ops = {ops}");
        prop_assert_eq!(out.estimate, sm_ml(&y, &h, modem.constellation()).unwrap().estimate);
        prop_assert!(ops <= c_sm_ml(m, nr));
    }

    #[test]
    fn sm_tx_cost_within_bound(seed in any::<u64>(), snr in 0.0f64..30.0, k in 1u32..4, nr in 1usize..5) {
        let modem = Modem::new(Scheme::Sm, 1 << k, 8).unwrap();
        let sigma_n2 = snr_db_to_noise_variance(snr);
        let mut rng = trial_rng(seed, 1);
        let x = modem.map_word(rng.random_range(0..1u64 << modem.bits()));
        let h = draw_channel(nr, modem.nt(), &mut rng);
        let y = transmit(&h, &x, modem.constellation(), sigma_n2, &mut rng).unwrap();
        let out = SmTx::new(modem.constellation()).detect(&y, &h, sigma_n2, initial_radius(nr, sigma_n2, 20.0)).unwrap();
        prop_assume!(out.restarts == 0);
        let bound = c_tx_bound(modem.nt(), nr, out.candidates_inside, out.n19_evaluations);
        prop_assert!(out.ops.get() <= bound, "{} > {bound}", out.ops.get());
    }
}
