//! Closed-loop execution of the switched plant under the affine hysteresis
//! policy, with scenario events (load steps) and input-voltage noise, plus
//! the metric extraction the scenario presets report on.

use serde::Serialize;

use crate::controller::{AffinePolicy, ProblemSpec, Switch};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::plant::PlantInstance;
use crate::rng::SeededUniform;

/// Abort threshold on either state magnitude, so mis-signed plant
/// experiments fail loudly instead of wandering off.
pub const DIVERGENCE_LIMIT: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EventKind {
    /// Rebuild the plant with the load resistance at `factor * R_nominal`.
    LoadScale { factor: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub at_step: usize,
    pub kind: EventKind,
}

/// One closed-loop experiment: horizon, initial state, events, input noise.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub steps: usize,
    pub x0: Vector,
    /// Previous actuator position at k = 0; fixed to Off.
    pub z0: Switch,
    /// Sorted by step, strictly increasing, each within [0, steps).
    pub events: Vec<Event>,
    /// Uniform half-width of the per-step source-voltage perturbation, in
    /// the same units as V_s.
    pub noise_amplitude: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn startup(steps: usize, n: usize, seed: u64) -> Self {
        Self {
            steps,
            x0: Vector::zeros(n),
            z0: Switch::Off,
            events: Vec::new(),
            noise_amplitude: 0.0,
            seed,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.z0 != Switch::Off {
            return Err(Error::Parameter(
                "initial switch state is fixed to off".into(),
            ));
        }
        if self.x0.len() != n {
            return Err(Error::Dimension(format!(
                "initial state has length {} but the model has {n} states",
                self.x0.len()
            )));
        }
        if !(self.noise_amplitude >= 0.0 && self.noise_amplitude.is_finite()) {
            return Err(Error::Parameter(format!(
                "noise amplitude must be nonnegative, got {}",
                self.noise_amplitude
            )));
        }
        let mut prev: Option<usize> = None;
        for ev in &self.events {
            if ev.at_step >= self.steps {
                return Err(Error::Parameter(format!(
                    "event at step {} lies outside the horizon {}",
                    ev.at_step, self.steps
                )));
            }
            if let Some(p) = prev {
                if ev.at_step <= p {
                    return Err(Error::Parameter(
                        "events must be strictly increasing by step".into(),
                    ));
                }
            }
            prev = Some(ev.at_step);
            let EventKind::LoadScale { factor } = ev.kind;
            if !(factor > 0.0 && factor.is_finite()) {
                return Err(Error::Parameter(format!(
                    "load scale factor must be positive, got {factor}"
                )));
            }
        }
        Ok(())
    }
}

/// One recorded step of the closed loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub t_s: f64,
    pub v_c: f64,
    pub i_l: f64,
    pub u: Switch,
    pub z: Switch,
    pub stage_cost: f64,
    pub j_partial: f64,
}

/// Full closed-loop record plus the propagated terminal state.
#[derive(Clone, Debug)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub t_sample_s: f64,
    pub alpha: f64,
    pub final_state: Vector,
    pub final_z: Switch,
    /// How many times a load event rebuilt the plant matrices.
    pub rebuild_count: usize,
    pub max_stage_cost: f64,
}

impl Trace {
    pub fn j_truncated(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.j_partial)
    }

    pub fn duration_s(&self) -> f64 {
        self.rows.len() as f64 * self.t_sample_s
    }
}

/// Run the closed loop: u_k from the policy, x_{k+1} = A x_k + b u_k on the
/// currently active plant, z_{k+1} = u_k. Events scheduled at step k take
/// effect before that step's decision; the policy gains stay nominal
/// throughout (load changes are disturbances the fixed controller rides
/// through). Noise perturbs the source term as b (1 + eta/V_s) with eta
/// drawn uniformly from [-a, a) by the seeded generator.
pub fn run(
    plant: &PlantInstance,
    pol: &AffinePolicy,
    spec: &ProblemSpec,
    scenario: &Scenario,
) -> Result<Trace> {
    scenario.validate(plant.model.n)?;
    let mut a_actual = plant.model.a.clone();
    let mut b_actual = plant.model.b.clone();
    let mut rebuild_count = 0usize;
    let mut rng = SeededUniform::new(scenario.seed);
    let v_s = plant.params.v_s;

    let mut x = scenario.x0.clone();
    let mut z = scenario.z0;
    let mut rows = Vec::with_capacity(scenario.steps);
    let mut next_event = 0usize;
    let mut j_partial = 0.0f64;
    let mut alpha_pow = 1.0f64;
    let mut max_stage_cost = 0.0f64;

    for k in 0..scenario.steps {
        while next_event < scenario.events.len() && scenario.events[next_event].at_step == k {
            let EventKind::LoadScale { factor } = scenario.events[next_event].kind;
            let rebuilt = plant.rebuild_with_load_scale(factor)?;
            a_actual = rebuilt.a;
            b_actual = rebuilt.b;
            rebuild_count += 1;
            next_event += 1;
        }

        if x.iter()
            .any(|s| !s.is_finite() || s.abs() > DIVERGENCE_LIMIT)
        {
            return Err(Error::Divergence {
                step: k,
                detail: format!("state magnitude exceeded {DIVERGENCE_LIMIT} p.u."),
            });
        }

        let b_step = if scenario.noise_amplitude > 0.0 {
            let eta = rng.in_range(-scenario.noise_amplitude, scenario.noise_amplitude);
            &b_actual * (1.0 + eta / v_s)
        } else {
            b_actual.clone()
        };

        let u = pol.decide(&x, z);
        let stage_cost = spec.stage_cost(&x, z, u);
        j_partial += alpha_pow * stage_cost;
        max_stage_cost = max_stage_cost.max(stage_cost);
        rows.push(TraceRow {
            k,
            t_s: k as f64 * plant.model.t_sample_s,
            v_c: x[0],
            i_l: if plant.model.n > 1 { x[1] } else { 0.0 },
            u,
            z,
            stage_cost,
            j_partial,
        });

        x = &a_actual * &x + &b_step * u.as_f64();
        z = u;
        alpha_pow *= spec.alpha;
    }

    Ok(Trace {
        rows,
        t_sample_s: plant.model.t_sample_s,
        alpha: spec.alpha,
        final_state: x,
        final_z: z,
        rebuild_count,
        max_stage_cost,
    })
}

/// Scenario statistics derived from a trace.
#[derive(Clone, Debug, Serialize)]
pub struct Metrics {
    /// First time after which the output stays inside the band; absent when
    /// the band is never held to the end of the record.
    pub settling_time_s: Option<f64>,
    pub overshoot_fraction: f64,
    /// Peak-to-peak output swing over the tail window.
    pub ripple_pp: f64,
    pub switch_count: u64,
    /// Transitions per second divided by two (one on-off cycle is two
    /// transitions).
    pub mean_switching_frequency_hz: f64,
    pub j_truncated: f64,
    /// alpha^N * (max observed stage cost) / (1 - alpha).
    pub j_tail_bound: f64,
}

/// Extract [`Metrics`] from a trace: settling against a +/- band around the
/// output set point r_v, ripple over the trailing `tail_fraction` of rows.
pub fn metrics(trace: &Trace, r_v: f64, band: f64, tail_fraction: f64) -> Result<Metrics> {
    if trace.rows.is_empty() {
        return Err(Error::Parameter("metrics require a nonempty trace".into()));
    }
    if !(band >= 0.0 && band.is_finite()) {
        return Err(Error::Parameter(format!(
            "band must be nonnegative, got {band}"
        )));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::Parameter(format!(
            "tail fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    let n = trace.rows.len();
    let tol = band * r_v.abs();

    // First index from which every remaining row stays in band.
    let mut settle_idx: Option<usize> = None;
    for (i, row) in trace.rows.iter().enumerate().rev() {
        if (row.v_c - r_v).abs() <= tol {
            settle_idx = Some(i);
        } else {
            break;
        }
    }
    let settling_time_s = settle_idx.map(|i| trace.rows[i].t_s);

    let max_v = trace
        .rows
        .iter()
        .map(|r| r.v_c)
        .fold(f64::NEG_INFINITY, f64::max);
    let overshoot_fraction = ((max_v - r_v) / r_v).max(0.0);

    let tail_len = ((n as f64 * tail_fraction).floor() as usize).max(1);
    let tail = &trace.rows[n - tail_len..];
    let tail_max = tail.iter().map(|r| r.v_c).fold(f64::NEG_INFINITY, f64::max);
    let tail_min = tail.iter().map(|r| r.v_c).fold(f64::INFINITY, f64::min);

    let switch_count: u64 = trace
        .rows
        .iter()
        .map(|r| u64::from(r.u.transition(r.z)))
        .sum();
    let duration = trace.duration_s();
    let mean_switching_frequency_hz = if duration > 0.0 {
        switch_count as f64 / (2.0 * duration)
    } else {
        0.0
    };

    let (j_truncated, j_tail_bound) = discounted_cost(trace, trace.alpha)?;

    Ok(Metrics {
        settling_time_s,
        overshoot_fraction,
        ripple_pp: tail_max - tail_min,
        switch_count,
        mean_switching_frequency_hz,
        j_truncated,
        j_tail_bound,
    })
}

/// Truncated discounted cost recomputed from the stage-cost column, plus the
/// geometric tail bound alpha^N * c_max / (1 - alpha).
pub fn discounted_cost(trace: &Trace, alpha: f64) -> Result<(f64, f64)> {
    if trace.rows.is_empty() {
        return Err(Error::Parameter(
            "discounted cost requires a nonempty trace".into(),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!(
            "discount must lie in (0,1), got {alpha}"
        )));
    }
    let mut j = 0.0f64;
    let mut pow = 1.0f64;
    let mut c_max = 0.0f64;
    for row in &trace.rows {
        j += pow * row.stage_cost;
        pow *= alpha;
        c_max = c_max.max(row.stage_cost);
    }
    Ok((j, pow * c_max / (1.0 - alpha)))
}

/// Provenance recorded in the CSV comment header.
#[derive(Clone, Debug)]
pub struct TraceMeta {
    pub config_hash: String,
    pub generator: &'static str,
    pub seed: u64,
}

/// 12-significant-digit float formatting used for all CSV numerics.
pub fn format_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Serialize a trace as CSV: one comment line of provenance, the fixed
/// column header, then one row per step with floats at 12 significant
/// digits and `\n` line endings.
pub fn trace_to_csv(trace: &Trace, meta: Option<&TraceMeta>) -> String {
    let mut out = String::new();
    if let Some(m) = meta {
        out.push_str(&format!(
            "# config_hash={} generator={} seed={}\n",
            m.config_hash, m.generator, m.seed
        ));
    }
    out.push_str("k,t_s,v_pu,i_pu,u,z,stage_cost,J_partial\n");
    for r in &trace.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.k,
            format_sig12(r.t_s),
            format_sig12(r.v_c),
            format_sig12(r.i_l),
            r.u.as_bit(),
            r.z.as_bit(),
            format_sig12(r.stage_cost),
            format_sig12(r.j_partial),
        ));
    }
    out
}
