//! Load-step rejection: the plant's load resistance is rescaled mid-run
//! while the controller gains stay nominal, then restored.
//!
//! Run at a feasible penalty so the loop actually switches; the preset's
//! nominal beta = 10 freezes the actuator (see the startup example).
//!
//!     cargo run --example load_step

use switchctl::cli::run_preset;
use switchctl::plant::Eq39Sign;
use switchctl::simulator::TraceRow;

const BETA: f64 = 0.02;

fn window_stats(rows: &[TraceRow], range: std::ops::Range<usize>, t: f64) -> (f64, f64) {
    let slice = &rows[range.clone()];
    let mean = slice.iter().map(|r| r.v_c).sum::<f64>() / slice.len() as f64;
    let transitions: u64 = slice.iter().map(|r| u64::from(r.u.transition(r.z))).sum();
    (mean, transitions as f64 / (2.0 * range.len() as f64 * t))
}

fn main() {
    let overrides = vec![format!("controller.beta={BETA}")];

    let (_, step_up) = run_preset("fig3", &overrides, Eq39Sign::HurwitzFixed).unwrap();
    let rows = &step_up.trace.rows;
    let t = step_up.trace.t_sample_s;
    println!("load step to 1.3x nominal at step 800 (t = 40 ms), beta = {BETA}:");
    let (pre_mean, pre_hz) = window_stats(rows, 400..800, t);
    let (post_mean, post_hz) = window_stats(rows, 1200..1600, t);
    println!("  pre-event window:  mean v = {pre_mean:.4} p.u., switching {pre_hz:.1} Hz");
    println!("  post-event window: mean v = {post_mean:.4} p.u., switching {post_hz:.1} Hz");
    println!(
        "  relative switching-frequency change: {:.2}%",
        100.0 * (post_hz - pre_hz).abs() / pre_hz
    );
    println!(
        "  plant rebuilds during the run: {}",
        step_up.trace.rebuild_count
    );

    let (_, restore) = run_preset("fig4", &overrides, Eq39Sign::HurwitzFixed).unwrap();
    let rows = &restore.trace.rows;
    println!("\nrestoration to nominal at step 800 (window pre-rolled through the loaded phase):");
    let (pre_mean, pre_hz) = window_stats(rows, 400..800, t);
    let (post_mean, post_hz) = window_stats(rows, 1200..1600, t);
    println!("  loaded window:   mean v = {pre_mean:.4} p.u., switching {pre_hz:.1} Hz");
    println!("  restored window: mean v = {post_mean:.4} p.u., switching {post_hz:.1} Hz");
    println!(
        "  plant rebuilds during the run: {}",
        restore.trace.rebuild_count
    );
}
