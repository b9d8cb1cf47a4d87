//! Shipped scenario presets, the config-to-closed-loop pipeline, and the
//! switching-penalty sweep.

use serde::Serialize;

use crate::controller::{self, AffinePolicy, ProblemSpec, ValueFunction};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::plant::{Eq39Sign, PlantInstance};
use crate::simulator::{self, Metrics, Trace};

use super::config::{parse_config, RunConfig};

/// Preset names accepted by `sim --preset` and `sim.preroll`.
pub const PRESET_NAMES: [&str; 6] = ["fig2", "fig3", "fig4", "fig5", "fig6a", "fig6b"];

/// The base parameter document the presets derive from.
pub const TABLE1_SOURCE: &str = include_str!("../../presets/table1.json");

/// Raw JSON source of a shipped preset.
pub fn preset_source(name: &str) -> Option<&'static str> {
    match name {
        "table1" => Some(TABLE1_SOURCE),
        "fig2" => Some(include_str!("../../presets/fig2.json")),
        "fig3" => Some(include_str!("../../presets/fig3.json")),
        "fig4" => Some(include_str!("../../presets/fig4.json")),
        "fig5" => Some(include_str!("../../presets/fig5.json")),
        "fig6a" => Some(include_str!("../../presets/fig6a.json")),
        "fig6b" => Some(include_str!("../../presets/fig6b.json")),
        _ => None,
    }
}

/// Load and validate a shipped preset.
pub fn load_preset(name: &str) -> Result<RunConfig> {
    let source =
        preset_source(name).ok_or_else(|| Error::Config(format!("unknown preset '{name}'")))?;
    parse_config(source)
}

/// A fully instantiated problem: discretized plant, problem data, value
/// function, and policy.
pub struct Instance {
    pub plant: PlantInstance,
    pub spec: ProblemSpec,
    pub vf: ValueFunction,
    pub policy: AffinePolicy,
    pub warnings: Vec<String>,
}

pub fn instantiate(config: &RunConfig, sign: Eq39Sign) -> Result<Instance> {
    let plant = PlantInstance::from_per_unit_with(
        config.converter_pu,
        config.fs_hz,
        config.omega_base,
        sign,
    )?;
    let r = Vector::from_column_slice(&[config.vref_pu, 0.0]);
    let spec = ProblemSpec::new(
        plant.model.clone(),
        config.q.clone(),
        r,
        config.alpha,
        config.beta,
    )?;
    let vf = controller::synthesize(&spec)?;
    let policy = controller::affine_coeffs(&vf, &spec)?;
    let warnings = config.converter_pu.warnings();
    Ok(Instance {
        plant,
        spec,
        vf,
        policy,
        warnings,
    })
}

/// A completed closed-loop run with its metrics.
pub struct Execution {
    pub instance: Instance,
    pub trace: Trace,
    pub metrics: Metrics,
}

/// Resolve a preroll chain: run the named preset's scenario under the
/// *current* instance (its converter and controller, not the preset's) and
/// return the propagated terminal state as the follow-on initial condition.
fn preroll_state(instance: &Instance, name: &str, depth: usize) -> Result<Vector> {
    if depth > 4 {
        return Err(Error::Config(format!(
            "preroll chain through '{name}' is too deep"
        )));
    }
    let cfg = load_preset(name)?;
    let mut scenario = cfg.scenario();
    if let Some(inner) = &cfg.preroll {
        scenario.x0 = preroll_state(instance, inner, depth + 1)?;
    }
    let trace = simulator::run(&instance.plant, &instance.policy, &instance.spec, &scenario)?;
    Ok(trace.final_state)
}

/// Instantiate and run one configuration end to end.
pub fn execute(config: &RunConfig, sign: Eq39Sign) -> Result<Execution> {
    let instance = instantiate(config, sign)?;
    let mut scenario = config.scenario();
    if let Some(name) = &config.preroll {
        scenario.x0 = preroll_state(&instance, name, 0)?;
    }
    let trace = simulator::run(&instance.plant, &instance.policy, &instance.spec, &scenario)?;
    let metrics = simulator::metrics(&trace, config.vref_pu, config.band, config.tail_fraction)?;
    Ok(Execution {
        instance,
        trace,
        metrics,
    })
}

/// Load a preset, apply overrides, and run it.
pub fn run_preset(
    name: &str,
    overrides: &[String],
    sign: Eq39Sign,
) -> Result<(RunConfig, Execution)> {
    let source =
        preset_source(name).ok_or_else(|| Error::Config(format!("unknown preset '{name}'")))?;
    let text = super::config::apply_overrides(source, overrides)?;
    let config = parse_config(&text)?;
    let execution = execute(&config, sign)?;
    Ok((config, execution))
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub beta: f64,
    pub switch_count: u64,
    pub ripple_pp: f64,
    pub settling_time_s: Option<f64>,
}

/// One steady-window run per switching penalty, each with a fresh synthesis
/// (and a fresh preroll under that synthesis) and the shared seed.
pub fn sweep_beta(values: &[f64], base: &RunConfig, sign: Eq39Sign) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::Config(
            "sweep requires at least one beta value".into(),
        ));
    }
    let mut rows = Vec::with_capacity(values.len());
    for &beta in values {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::Config(format!(
                "sweep beta values must be nonnegative, got {beta}"
            )));
        }
        let cfg = base.with_beta(beta)?;
        let execution = execute(&cfg, sign)
            .map_err(|e| Error::Numeric(format!("sweep failed at beta={beta}: {e}")))?;
        rows.push(SweepRow {
            beta,
            switch_count: execution.metrics.switch_count,
            ripple_pp: execution.metrics.ripple_pp,
            settling_time_s: execution.metrics.settling_time_s,
        });
    }
    Ok(rows)
}
