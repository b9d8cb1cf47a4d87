//! Ground-truth comparison: exhaustive enumeration over binary control
//! sequences and gridded value iteration on the exact two-branch Bellman
//! operator, measuring how far the closed-form affine policy sits from
//! optimal on its own plant.
//!
//!     cargo run --example oracle_compare

use switchctl::controller::{affine_coeffs, synthesize, ProblemSpec, Switch};
use switchctl::linalg::{Matrix, Vector};
use switchctl::oracle;
use switchctl::plant;
use switchctl::rng::SeededUniform;

fn main() {
    let model = plant::discretize_plant(
        &plant::nominal_per_unit(),
        20_000.0,
        plant::DEFAULT_OMEGA_BASE,
    )
    .unwrap();
    let q = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    let r = Vector::from_column_slice(&[0.4, 0.0]);
    // A feasible penalty so both the policy and the optimum actually switch.
    let spec = ProblemSpec::new(model.clone(), q, r, 0.9999, 0.02).unwrap();
    let vf = synthesize(&spec).unwrap();
    let pol = affine_coeffs(&vf, &spec).unwrap();

    let horizon = 12;
    let x0 = Vector::from_column_slice(&[0.0, 0.0]);
    let result = oracle::compare_horizon(&model, &spec, &pol, &x0, Switch::Off, horizon).unwrap();
    println!("truncated horizon N = {horizon} from a discharged start:");
    println!("  exhaustive optimum: {:.6}", result.best_cost);
    println!("  policy rollout:     {:.6}", result.policy_cost);
    println!("  gap:                {:.3e}", result.gap);
    println!(
        "  discount tail bound on the truncation: {:.3}",
        result.tail_bound
    );
    let seq: String = result
        .best_sequence
        .iter()
        .map(|&u| if u == Switch::On { '1' } else { '0' })
        .collect();
    println!("  optimal sequence: {seq}");

    // First-action agreement over sampled augmented states; ties where both
    // actions reach the optimum count as agreement.
    let mut rng = SeededUniform::new(11);
    let samples: Vec<(Vector, Switch)> = (0..200)
        .map(|_| {
            (
                Vector::from_column_slice(&[rng.in_range(-2.0, 2.0), rng.in_range(-2.0, 2.0)]),
                if rng.coin() { Switch::On } else { Switch::Off },
            )
        })
        .collect();
    let policy = pol.clone();
    let mut decide = move |x: &Vector, z: Switch| policy.decide(x, z);
    let report =
        oracle::first_action_agreement(&model, &spec, &mut decide, &samples, horizon).unwrap();
    println!(
        "\nfirst-action agreement over {} samples at N = {}: {:.3} (tail bound {:.3})",
        report.samples, report.horizon, report.fraction, report.tail_bound
    );

    // Grid value iteration on the exact Bellman operator.
    let grid = oracle::grid_value_iteration(
        &model,
        &spec,
        oracle::GridBox {
            lo: [-0.5, -1.5],
            hi: [1.5, 2.5],
        },
        101,
        60,
        1e-12,
    )
    .unwrap();
    let ratios: Vec<f64> = grid.sweep_changes.windows(2).map(|w| w[1] / w[0]).collect();
    println!(
        "\ngrid value iteration ({} sweeps, resolution {}):",
        grid.sweeps_run, grid.resolution
    );
    println!(
        "  final sweep contraction ratio: {:.6}",
        ratios.last().unwrap()
    );
    println!("  clamped successors: {}", grid.clamped_successor_count);
    println!(
        "  greedy policy keeps hysteresis containment: {}",
        grid.hysteresis_containment()
    );
    println!(
        "  agreement with the affine policy: {:.4}",
        grid.agreement_with(&pol)
    );
}
