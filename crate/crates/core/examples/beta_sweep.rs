//! The switching-penalty trade-off: larger beta buys fewer transitions at
//! the price of a bigger output ripple. Each row re-synthesizes the policy
//! and re-runs the pre-rolled steady window with the shared seed.
//!
//!     cargo run --example beta_sweep

use switchctl::cli::{load_preset, sweep_beta};
use switchctl::plant::Eq39Sign;

fn main() {
    let base = load_preset("fig5").unwrap();

    println!("feasible range (the hysteresis thresholds sit inside the operating envelope):");
    println!(
        "{:>10} {:>14} {:>12} {:>14}",
        "beta", "transitions", "ripple", "settling"
    );
    for row in sweep_beta(&[0.002, 0.02, 0.2], &base, Eq39Sign::HurwitzFixed).unwrap() {
        println!(
            "{:>10} {:>14} {:>12.5} {:>14?}",
            row.beta, row.switch_count, row.ripple_pp, row.settling_time_s
        );
    }

    println!(
        "\npreset range (beta = 10 nominal; the band swallows the envelope and the loop freezes):"
    );
    println!(
        "{:>10} {:>14} {:>12} {:>14}",
        "beta", "transitions", "ripple", "settling"
    );
    for row in sweep_beta(&[1.0, 10.0, 100.0], &base, Eq39Sign::HurwitzFixed).unwrap() {
        println!(
            "{:>10} {:>14} {:>12.5} {:>14?}",
            row.beta, row.switch_count, row.ripple_pp, row.settling_time_s
        );
    }
}
