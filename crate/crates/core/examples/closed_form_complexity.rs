//! Closed-form operation counts: ML for SM and SMX, the SM-Rx range, and
//! the SM-Tx pre-computation cost.
//!
//! ```text
//! cargo run --example closed_form_complexity
//! ```

use smsd::complexity::closed_form_table;

fn main() {
    let rows = closed_form_table(&[6, 8], &[2, 4, 8, 16, 32], &[2, 4]);
    println!(
        "{:>2} {:>3} {:>3} {:>8} {:>9} {:>9} {:>7} {:>7} {:>8}",
        "m", "Nt", "Nr", "SM-ML", "SMX-ML", "saving %", "Rx min", "Rx max", "Tx pre"
    );
    for r in rows {
        println!(
            "{:>2} {:>3} {:>3} {:>8} {:>9} {:>9.1} {:>7} {:>7} {:>8}",
            r.m, r.nt, r.nr, r.sm_ml, r.smx_ml, r.ml_reduction_pct, r.rx_min, r.rx_max, r.tx_precomp
        );
    }
}
