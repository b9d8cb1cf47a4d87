//! Source-voltage noise rejection: per-step uniform perturbations of the
//! input rail at the two shipped amplitudes (0.1 and 0.3).
//!
//!     cargo run --example noisy_input

use switchctl::cli::run_preset;
use switchctl::plant::Eq39Sign;

fn main() {
    for (preset, amplitude) in [("fig6a", 0.1), ("fig6b", 0.3)] {
        let overrides = vec!["controller.beta=0.02".to_string()];
        let (cfg, execution) = run_preset(preset, &overrides, Eq39Sign::HurwitzFixed).unwrap();
        let rows = &execution.trace.rows;
        let half = rows.len() / 2;
        let tail = &rows[half..];
        let mean: f64 = tail.iter().map(|r| r.v_c).sum::<f64>() / tail.len() as f64;
        let var: f64 = tail.iter().map(|r| (r.v_c - mean).powi(2)).sum::<f64>() / tail.len() as f64;

        println!(
            "{preset}: noise amplitude {amplitude} on the source (seed {}):",
            cfg.seed
        );
        println!("  mean output over the final half: {mean:.4} p.u.");
        println!("  output standard deviation:        {:.5} p.u.", var.sqrt());
        println!(
            "  transitions: {} (mean switching frequency {:.1} Hz)",
            execution.metrics.switch_count, execution.metrics.mean_switching_frequency_hz
        );
        println!();
    }
    println!("identical seeds reproduce traces bit-for-bit; change with --seed or sim.seed=N");
}
