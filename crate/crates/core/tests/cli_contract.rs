//! Contract tests for the command-line surface: exit codes, file outputs,
//! preset immutability, and trace reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use switchctl::cli::config::sha256_hex;
use switchctl::cli::{load_preset, presets, run_preset};
use switchctl::plant::Eq39Sign;
use switchctl::rng::GENERATOR_NAME;
use switchctl::simulator::{trace_to_csv, TraceMeta};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_switchctl"))
}

fn preset_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("presets")
        .join(format!("{name}.json"))
}

fn run_bin(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

/// Shipped preset files are content-addressed; an accidental edit fails here.
#[test]
fn preset_files_are_content_addressed() {
    let frozen = [
        (
            "table1",
            "d90336bc7ecd9fa5c1532aebc264c5381f06a27c6aba108b76270ea0607be358",
        ),
        (
            "fig2",
            "63788b9c53049cc5755e5e2ec58f92f462427c0f34333e0ca5b702114956b637",
        ),
        (
            "fig3",
            "0fb3843f8ec3bc9bb6cee95d8c6048ffd0efb3ce9ca2a6c673adbb53c380c873",
        ),
        (
            "fig4",
            "823fb35cc26fa18d70287796f7134bc1bc07dcf840767f7e7d3b3f4e277e7e4b",
        ),
        (
            "fig5",
            "3bff77d46779795296da93a8f216364439425d92e3ed1c95ba608a28c72a951b",
        ),
        (
            "fig6a",
            "54ae40ebb4773c1b0d38a6423bdf3398ff7c12b5509ed2c86a96ae26773b705a",
        ),
        (
            "fig6b",
            "1f4401aa3e6160affdc8b8961e19c8382b2d2e5ada7ce813976adbd406d51b48",
        ),
    ];
    for (name, expected) in frozen {
        let embedded = presets::preset_source(name).unwrap();
        assert_eq!(
            sha256_hex(embedded.as_bytes()),
            expected,
            "embedded preset '{name}' changed"
        );
        let on_disk = std::fs::read(preset_path(name)).unwrap();
        assert_eq!(
            sha256_hex(&on_disk),
            expected,
            "preset file '{name}.json' changed"
        );
    }
}

/// Golden trace hash for the startup preset, recorded after the first
/// verified run; any change to the closed-loop arithmetic, the CSV format,
/// or the seeding breaks this.
#[test]
fn startup_trace_is_bit_reproducible() {
    let (cfg, execution) = run_preset("fig2", &[], Eq39Sign::HurwitzFixed).unwrap();
    assert_eq!(
        cfg.hash(),
        "6e578d6a3e7e7d80ffcfe53a0921f1dff0867ea00ebe36abfda36cc6945cb850"
    );
    let meta = TraceMeta {
        config_hash: cfg.hash().to_string(),
        generator: GENERATOR_NAME,
        seed: cfg.seed,
    };
    let csv = trace_to_csv(&execution.trace, Some(&meta));
    assert_eq!(
        sha256_hex(csv.as_bytes()),
        "741aeff9f722afee7b828cf3fd1051da6466ba2dfb6f94a75df131fafc0b0d60"
    );
}

#[test]
fn sim_preset_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_bin(&[
        "sim",
        "--preset",
        "fig2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    let summary = stdout_json(&out);
    assert_eq!(summary["generator"], serde_json::json!("chacha8"));
    assert_eq!(summary["seed"], serde_json::json!(42));
    assert!(summary["gains"]["P"].is_array());
    assert!(summary["metrics"]["switch_count"].is_number());
    assert_eq!(
        summary["discrepancies"]["eq39_literal"]["hurwitz"],
        serde_json::json!(false)
    );
    assert!(
        summary["discrepancies"]["eq35_literal"]["max_abs_deviation_from_f_direct"].is_number()
    );

    let csv = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(csv.starts_with("# config_hash="));
    assert!(csv.contains("k,t_s,v_pu,i_pu,u,z,stage_cost,J_partial"));
    let written: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(written["config_hash"], summary["config_hash"]);
}

#[test]
fn synth_prints_the_full_gain_document() {
    let out = run_bin(&["synth", preset_path("table1").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout_json(&out);
    for field in [
        "P",
        "theta",
        "v",
        "delta",
        "zeta",
        "delta_eq35_literal",
        "zeta_eq35_literal",
        "bellman_residual_max",
    ] {
        assert!(
            !json[field].is_null(),
            "synth output missing field '{field}'"
        );
    }
    assert!(json["bellman_residual_max"].as_f64().unwrap() < 1e-8);
}

#[test]
fn sweep_beta_emits_rows_in_input_order() {
    let out = run_bin(&[
        "sweep-beta",
        preset_path("fig5").to_str().unwrap(),
        "--values",
        "1,10,100",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = stdout_json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let betas: Vec<f64> = rows.iter().map(|r| r["beta"].as_f64().unwrap()).collect();
    assert_eq!(betas, vec![1.0, 10.0, 100.0]);
}

#[test]
fn oracle_compare_emits_the_report_schema() {
    let out = run_bin(&[
        "oracle-compare",
        preset_path("table1").to_str().unwrap(),
        "--horizon",
        "6",
        "--samples",
        "10",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json = stdout_json(&out);
    for field in [
        "horizon",
        "best_cost",
        "policy_cost",
        "gap",
        "tail_bound",
        "agreement_fraction",
        "clamped_successor_count",
    ] {
        assert!(
            !json[field].is_null(),
            "oracle report missing field '{field}'"
        );
    }
    assert_eq!(json["horizon"], serde_json::json!(6));
    assert!(json["gap"].as_f64().unwrap() >= -1e-12);
}

#[test]
fn exit_code_contract() {
    // Unknown preset: configuration error.
    let out = run_bin(&["sim", "--preset", "fig9"]);
    assert_eq!(out.status.code(), Some(2));

    // Neither config nor preset, or both.
    let out = run_bin(&["sim"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_bin(&[
        "sim",
        preset_path("fig2").to_str().unwrap(),
        "--preset",
        "fig2",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // Schema violation (unknown key) in an override.
    let out = run_bin(&["sim", "--preset", "fig2", "sim.stepz=7"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("stepz"), "stderr: {stderr}");

    // Empty trace surfaces as a configuration error.
    let out = run_bin(&["sim", "--preset", "fig2", "sim.steps=0"]);
    assert_eq!(out.status.code(), Some(2));

    // The literal plant sign trips the stability gate: numeric error.
    let out = run_bin(&["sim", "--preset", "fig2", "--paper-literal"]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("Hurwitz") || stderr.contains("unstable"),
        "stderr: {stderr}"
    );

    // Missing config file.
    let out = run_bin(&["synth", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seed_flag_overrides_scenario_seed() {
    let out = run_bin(&["sim", "--preset", "fig6b", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let summary = stdout_json(&out);
    assert_eq!(summary["seed"], serde_json::json!(7));
    // The effective config hash reflects the override.
    let base = load_preset("fig6b").unwrap();
    assert_ne!(summary["config_hash"], serde_json::json!(base.hash()));
}
