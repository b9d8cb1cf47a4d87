//! JSON report builders: synthesized gains, run summaries with the
//! literal-variant discrepancy section, and the oracle comparison.

use serde::Serialize;

use crate::controller::{self, Switch};
use crate::linalg::{Matrix, Vector};
use crate::oracle;
use crate::plant::{build_continuous_with, Eq39Sign};
use crate::rng::{SeededUniform, GENERATOR_NAME};
use crate::simulator::Metrics;

use super::config::RunConfig;
use super::presets::Instance;

const REPORT_SAMPLES: usize = 1000;
const REPORT_SEED: u64 = 0xD15C;

fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn vector_entries(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

/// Output of `switchctl synth`.
#[derive(Debug, Serialize)]
pub struct SynthReport {
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
    pub v: f64,
    pub delta: Vec<f64>,
    pub zeta: f64,
    pub delta_eq35_literal: Vec<f64>,
    pub zeta_eq35_literal: f64,
    pub bellman_residual_max: f64,
}

pub fn synth_report(instance: &Instance) -> SynthReport {
    let (d35, z35) = controller::eq35_literal_coeffs(&instance.vf, &instance.spec.model);
    SynthReport {
        p: matrix_rows(&instance.vf.p),
        theta: vector_entries(&instance.vf.theta),
        v: instance.vf.v,
        delta: vector_entries(&instance.policy.delta),
        zeta: instance.policy.zeta,
        delta_eq35_literal: vector_entries(&d35),
        zeta_eq35_literal: z35,
        bellman_residual_max: controller::max_bellman_residual(
            &instance.spec,
            &instance.vf,
            REPORT_SAMPLES,
            REPORT_SEED,
        ),
    }
}

/// The literal published sign variant of the continuous plant matrix, shown
/// with the stability gate's verdict.
#[derive(Debug, Serialize)]
pub struct Eq39Discrepancy {
    pub hurwitz: bool,
    pub trace: f64,
    pub det: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// The literal published affine coefficients and how far they sit from the
/// value-difference switching function they are supposed to reproduce.
#[derive(Debug, Serialize)]
pub struct Eq35Discrepancy {
    pub delta: Vec<f64>,
    pub zeta: f64,
    pub max_abs_deviation_from_f_direct: f64,
}

#[derive(Debug, Serialize)]
pub struct Discrepancies {
    pub eq39_literal: Eq39Discrepancy,
    pub eq35_literal: Eq35Discrepancy,
}

pub fn discrepancies(instance: &Instance) -> Discrepancies {
    let p = &instance.plant.params;
    // Literal sign variant: +1/L in the (2,1) entry.
    let trace = -1.0 / (p.r * p.c) - p.r_l / p.l;
    let det = (-1.0 / (p.r * p.c)) * (-p.r_l / p.l) - (1.0 / p.c) * (1.0 / p.l);
    let gate = build_continuous_with(p, Eq39Sign::PaperLiteral);
    let eq39 = Eq39Discrepancy {
        hurwitz: gate.is_ok(),
        trace,
        det,
        error: gate.err().map(|e| e.to_string()),
    };

    let (d35, z35) = controller::eq35_literal_coeffs(&instance.vf, &instance.spec.model);
    let mut rng = SeededUniform::new(REPORT_SEED ^ 0x35);
    let mut worst = 0.0f64;
    for _ in 0..REPORT_SAMPLES {
        let x = Vector::from_column_slice(&[
            rng.in_range(controller::STATE_BOX.0, controller::STATE_BOX.1),
            rng.in_range(controller::STATE_BOX.0, controller::STATE_BOX.1),
        ]);
        let literal = d35.dot(&x) + z35;
        let direct = controller::f_direct(&instance.vf, &instance.spec.model, &x);
        worst = worst.max((literal - direct).abs());
    }
    let eq35 = Eq35Discrepancy {
        delta: vector_entries(&d35),
        zeta: z35,
        max_abs_deviation_from_f_direct: worst,
    };

    Discrepancies {
        eq39_literal: eq39,
        eq35_literal: eq35,
    }
}

#[derive(Debug, Serialize)]
pub struct GainsEcho {
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
    pub v: f64,
    pub delta: Vec<f64>,
    pub zeta: f64,
}

/// Output of `switchctl sim`.
#[derive(Debug, Serialize)]
pub struct SummaryReport {
    pub tool_version: &'static str,
    pub config_hash: String,
    pub generator: &'static str,
    pub seed: u64,
    pub gains: GainsEcho,
    pub metrics: Metrics,
    pub discrepancies: Discrepancies,
}

pub fn summary_report(config: &RunConfig, instance: &Instance, metrics: Metrics) -> SummaryReport {
    SummaryReport {
        tool_version: env!("CARGO_PKG_VERSION"),
        config_hash: config.hash().to_string(),
        generator: GENERATOR_NAME,
        seed: config.seed,
        gains: GainsEcho {
            p: matrix_rows(&instance.vf.p),
            theta: vector_entries(&instance.vf.theta),
            v: instance.vf.v,
            delta: vector_entries(&instance.policy.delta),
            zeta: instance.policy.zeta,
        },
        metrics,
        discrepancies: discrepancies(instance),
    }
}

/// Output of `switchctl oracle-compare`.
#[derive(Debug, Serialize)]
pub struct OracleReport {
    pub horizon: usize,
    pub best_cost: f64,
    pub policy_cost: f64,
    pub gap: f64,
    pub tail_bound: f64,
    pub agreement_fraction: f64,
    pub clamped_successor_count: usize,
}

/// Grid box used for the buck instance's value-iteration comparison.
pub const ORACLE_GRID_BOX: oracle::GridBox = oracle::GridBox {
    lo: [-0.5, -1.5],
    hi: [1.5, 2.5],
};
const ORACLE_GRID_RESOLUTION: usize = 41;
const ORACLE_GRID_SWEEPS: usize = 30;

pub fn oracle_report(
    config: &RunConfig,
    instance: &Instance,
    horizon: usize,
    samples: usize,
) -> crate::error::Result<OracleReport> {
    let model = &instance.plant.model;
    let spec = &instance.spec;
    let comparison = oracle::compare_horizon(
        model,
        spec,
        &instance.policy,
        &config.x0,
        Switch::Off,
        horizon,
    )?;

    let mut rng = SeededUniform::new(config.seed ^ 0x0_0AC1E);
    let sample_points: Vec<(Vector, Switch)> = (0..samples.max(1))
        .map(|_| {
            (
                Vector::from_column_slice(&[
                    rng.in_range(controller::STATE_BOX.0, controller::STATE_BOX.1),
                    rng.in_range(controller::STATE_BOX.0, controller::STATE_BOX.1),
                ]),
                if rng.coin() { Switch::On } else { Switch::Off },
            )
        })
        .collect();
    let policy = instance.policy.clone();
    let mut decide = move |x: &Vector, z: Switch| policy.decide(x, z);
    let agreement =
        oracle::first_action_agreement(model, spec, &mut decide, &sample_points, horizon)?;

    let grid = oracle::grid_value_iteration(
        model,
        spec,
        ORACLE_GRID_BOX,
        ORACLE_GRID_RESOLUTION,
        ORACLE_GRID_SWEEPS,
        1e-12,
    )?;

    Ok(OracleReport {
        horizon,
        best_cost: comparison.best_cost,
        policy_cost: comparison.policy_cost,
        gap: comparison.gap,
        tail_bound: comparison.tail_bound,
        agreement_fraction: agreement.fraction,
        clamped_successor_count: grid.clamped_successor_count,
    })
}
