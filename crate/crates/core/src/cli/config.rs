//! Run-configuration schema: strict JSON parsing, dotted-path overrides,
//! canonicalization, and content hashing.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::controller::Switch;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::plant::{ConverterParams, PerUnitBases, UnitSystem, DEFAULT_OMEGA_BASE};
use crate::simulator::{Event, EventKind, Scenario};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_BAND: f64 = 0.02;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.25;

fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_band() -> f64 {
    DEFAULT_BAND
}
fn default_tail() -> f64 {
    DEFAULT_TAIL_FRACTION
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "C")]
    c: f64,
    r_l: f64,
    #[serde(rename = "R")]
    r: f64,
    #[serde(rename = "V_s")]
    v_s: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBases {
    #[serde(rename = "V_base")]
    v_base: f64,
    #[serde(rename = "Z_base")]
    z_base: f64,
    omega_base: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConverter {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    per_unit: Option<RawParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    si: Option<RawParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bases: Option<RawBases>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawController {
    alpha: f64,
    beta: f64,
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    vref_pu: f64,
    fs_hz: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    at_step: usize,
    load_scale: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    steps: usize,
    #[serde(default)]
    x0: Option<Vec<f64>>,
    #[serde(default)]
    events: Vec<RawEvent>,
    #[serde(default)]
    noise_amplitude: f64,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    preroll: Option<String>,
    #[serde(default = "default_band")]
    band: f64,
    #[serde(default = "default_tail")]
    tail_fraction: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    csv_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    summary_path: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    converter: RawConverter,
    controller: RawController,
    sim: RawSim,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output: Option<RawOutput>,
}

/// Validated run configuration, together with its canonical serialization
/// and content hash.
#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Converter parameters in the canonical per-unit frame.
    pub converter_pu: ConverterParams,
    /// Present when the converter block was given in SI units, or when a
    /// bases block accompanied per-unit values.
    pub bases: Option<PerUnitBases>,
    pub omega_base: f64,
    pub alpha: f64,
    pub beta: f64,
    pub q: Matrix,
    pub vref_pu: f64,
    pub fs_hz: f64,
    pub steps: usize,
    pub x0: Vector,
    pub events: Vec<Event>,
    pub noise_amplitude: f64,
    pub seed: u64,
    pub preroll: Option<String>,
    pub band: f64,
    pub tail_fraction: f64,
    pub csv_path: Option<String>,
    pub summary_path: Option<String>,
    canonical: String,
    hash: String,
}

impl RunConfig {
    /// Canonical JSON form (defaults materialized, fixed field order).
    pub fn canonical_json(&self) -> &str {
        &self.canonical
    }

    /// SHA-256 of the canonical form, hex-encoded.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            steps: self.steps,
            x0: self.x0.clone(),
            z0: Switch::Off,
            events: self.events.clone(),
            noise_amplitude: self.noise_amplitude,
            seed: self.seed,
        }
    }

    /// Replace the switch penalty, rehashing the canonical form.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        let mut value: serde_json::Value =
            serde_json::from_str(&self.canonical).expect("canonical form always reparses");
        value["controller"]["beta"] = serde_json::json!(beta);
        parse_config(&value.to_string())
    }

    /// Replace the scenario seed, rehashing the canonical form.
    pub fn with_seed(&self, seed: u64) -> Result<Self> {
        let mut value: serde_json::Value =
            serde_json::from_str(&self.canonical).expect("canonical form always reparses");
        value["sim"]["seed"] = serde_json::json!(seed);
        parse_config(&value.to_string())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Parse and validate a configuration document. Unknown keys are rejected;
/// validation failures name the offending field path.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| {
        Error::Config(format!(
            "schema violation: {e} (required sections: converter, controller.{{alpha,beta,Q,vref_pu,fs_hz}}, sim.{{steps}})"
        ))
    })?;
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<RunConfig> {
    let canonical = serde_json::to_string(&raw).expect("raw config serializes");
    let hash = sha256_hex(canonical.as_bytes());

    let (params_pu, bases) = match (&raw.converter.per_unit, &raw.converter.si) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "converter: exactly one of per_unit or si must be present, found both".into(),
            ))
        }
        (None, None) => {
            return Err(Error::Config(
                "converter: exactly one of per_unit or si must be present, found neither".into(),
            ))
        }
        (Some(pu), None) => {
            let params =
                ConverterParams::new(pu.l, pu.c, pu.r_l, pu.r, pu.v_s, UnitSystem::PerUnit)
                    .map_err(|e| Error::Config(format!("converter.per_unit: {e}")))?;
            let bases = raw
                .converter
                .bases
                .as_ref()
                .map(|b| PerUnitBases::new(b.v_base, b.z_base, b.omega_base))
                .transpose()
                .map_err(|e| Error::Config(format!("converter.bases: {e}")))?;
            (params, bases)
        }
        (None, Some(si)) => {
            let b = raw.converter.bases.as_ref().ok_or_else(|| {
                Error::Config("converter.bases is required with converter.si".into())
            })?;
            let bases = PerUnitBases::new(b.v_base, b.z_base, b.omega_base)
                .map_err(|e| Error::Config(format!("converter.bases: {e}")))?;
            let params_si = ConverterParams::new(si.l, si.c, si.r_l, si.r, si.v_s, UnitSystem::Si)
                .map_err(|e| Error::Config(format!("converter.si: {e}")))?;
            let pu = crate::plant::to_per_unit(&params_si, &bases)
                .map_err(|e| Error::Config(format!("converter.si: {e}")))?;
            (pu, Some(bases))
        }
    };
    let omega_base = bases.map_or(DEFAULT_OMEGA_BASE, |b| b.omega_base);

    let c = &raw.controller;
    if !(c.alpha > 0.0 && c.alpha < 1.0) {
        return Err(Error::Config(format!(
            "controller.alpha must lie in (0,1), got {}",
            c.alpha
        )));
    }
    if !(c.beta >= 0.0 && c.beta.is_finite()) {
        return Err(Error::Config(format!(
            "controller.beta must be nonnegative, got {}",
            c.beta
        )));
    }
    if !(c.fs_hz > 0.0 && c.fs_hz.is_finite()) {
        return Err(Error::Config(format!(
            "controller.fs_hz must be positive, got {}",
            c.fs_hz
        )));
    }
    if c.q.len() != 2 || c.q.iter().any(|row| row.len() != 2) {
        return Err(Error::Config("controller.Q must be a 2x2 matrix".into()));
    }
    let q = Matrix::from_row_slice(2, 2, &[c.q[0][0], c.q[0][1], c.q[1][0], c.q[1][1]]);

    let s = &raw.sim;
    let x0 = match &s.x0 {
        Some(v) => {
            if v.len() != 2 {
                return Err(Error::Config(format!(
                    "sim.x0 must have 2 entries, got {}",
                    v.len()
                )));
            }
            Vector::from_column_slice(v)
        }
        None => Vector::zeros(2),
    };
    if !(s.band >= 0.0 && s.band.is_finite()) {
        return Err(Error::Config(format!(
            "sim.band must be nonnegative, got {}",
            s.band
        )));
    }
    if !(s.tail_fraction > 0.0 && s.tail_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "sim.tail_fraction must lie in (0,1], got {}",
            s.tail_fraction
        )));
    }
    if !(s.noise_amplitude >= 0.0 && s.noise_amplitude.is_finite()) {
        return Err(Error::Config(format!(
            "sim.noise_amplitude must be nonnegative, got {}",
            s.noise_amplitude
        )));
    }
    if let Some(name) = &s.preroll {
        if !super::presets::PRESET_NAMES.contains(&name.as_str()) {
            return Err(Error::Config(format!(
                "sim.preroll names an unknown preset '{name}'"
            )));
        }
    }
    let events: Vec<Event> = s
        .events
        .iter()
        .map(|e| Event {
            at_step: e.at_step,
            kind: EventKind::LoadScale {
                factor: e.load_scale,
            },
        })
        .collect();

    let output = raw.output.clone().unwrap_or_default();

    Ok(RunConfig {
        converter_pu: params_pu,
        bases,
        omega_base,
        alpha: c.alpha,
        beta: c.beta,
        q,
        vref_pu: c.vref_pu,
        fs_hz: c.fs_hz,
        steps: s.steps,
        x0,
        events,
        noise_amplitude: s.noise_amplitude,
        seed: s.seed,
        preroll: s.preroll.clone(),
        band: s.band,
        tail_fraction: s.tail_fraction,
        csv_path: output.csv_path,
        summary_path: output.summary_path,
        canonical,
        hash,
    })
}

/// Apply flat dotted-path overrides (`controller.beta=100`) to a JSON
/// document before validation. Values parse as JSON when possible and fall
/// back to strings, so `sim.preroll=fig2` works without quoting.
pub fn apply_overrides(text: &str, overrides: &[String]) -> Result<String> {
    if overrides.is_empty() {
        return Ok(text.to_string());
    }
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("schema violation: {e}")))?;
    for item in overrides {
        let (path, raw_value) = item.split_once('=').ok_or_else(|| {
            Error::Config(format!("override '{item}' is not of the form key=value"))
        })?;
        let parsed: serde_json::Value = serde_json::from_str(raw_value)
            .unwrap_or_else(|_| serde_json::Value::String(raw_value.to_string()));
        let mut cursor = &mut value;
        let segments: Vec<&str> = path.split('.').collect();
        for (i, seg) in segments.iter().enumerate() {
            if i + 1 == segments.len() {
                match cursor {
                    serde_json::Value::Object(map) => {
                        map.insert((*seg).to_string(), parsed.clone());
                    }
                    _ => {
                        return Err(Error::Config(format!(
                            "override path '{path}' does not address an object"
                        )))
                    }
                }
            } else {
                cursor = cursor
                    .as_object_mut()
                    .ok_or_else(|| {
                        Error::Config(format!("override path '{path}' does not address an object"))
                    })?
                    .entry((*seg).to_string())
                    .or_insert_with(|| serde_json::Value::Object(serde_json::Map::new()));
            }
        }
    }
    Ok(value.to_string())
}
