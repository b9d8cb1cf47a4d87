//! Closed-form synthesis on the nominal buck design: solve the discounted
//! Lyapunov equation, recover the value-function center and floor, expand
//! the affine switching function, and check the Bellman identity at random
//! states.
//!
//!     cargo run --example synthesize

use switchctl::controller::{
    affine_coeffs, eq35_literal_coeffs, max_bellman_residual, synthesize, ProblemSpec,
};
use switchctl::linalg::{Matrix, Vector};
use switchctl::plant;

fn main() {
    let model = plant::discretize_plant(
        &plant::nominal_per_unit(),
        20_000.0,
        plant::DEFAULT_OMEGA_BASE,
    )
    .unwrap();
    println!("discrete plant A = {:.6}", model.a);
    println!("input vector   b = {:.6}", model.b.transpose());

    let q = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    let r = Vector::from_column_slice(&[0.4, 0.0]);
    let spec = ProblemSpec::new(model, q, r, 0.9999, 10.0).unwrap();

    let vf = synthesize(&spec).unwrap();
    println!("P     = {:.6}", vf.p);
    println!("theta = {:.6}", vf.theta.transpose());
    println!("v     = {:.6}", vf.v);

    let pol = affine_coeffs(&vf, &spec).unwrap();
    println!("delta = {:.6}", pol.delta.transpose());
    println!("zeta  = {:.6}", pol.zeta);
    println!(
        "hysteresis thresholds: turn on below {:.4}, turn off above {:.4}",
        -pol.beta / pol.alpha,
        pol.beta / pol.alpha
    );

    let worst = max_bellman_residual(&spec, &vf, 1000, 7);
    println!("max Bellman residual over 1000 random states: {worst:.3e}");

    // The literal published coefficient variant does not reproduce the
    // switching function; it is carried for discrepancy reporting only.
    let (d35, z35) = eq35_literal_coeffs(&vf, &spec.model);
    println!(
        "literal coefficient variant: delta' = {:.6}, zeta' = {:.6}",
        d35.transpose(),
        z35
    );
    println!(
        "deviation from the expansion-consistent form: |delta' - delta| = {:.3}, |zeta' - zeta| = {:.3}",
        (&d35 - &pol.delta).norm(),
        (z35 - pol.zeta).abs()
    );
}
