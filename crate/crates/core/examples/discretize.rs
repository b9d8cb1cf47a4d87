//! Plant construction: SI component values to per-unit, zero-order-hold
//! discretization, and the stability gates.
//!
//!     cargo run --example discretize

use switchctl::linalg::{mat_exp, spectral_radius, zoh_discretize};
use switchctl::plant::{self, build_continuous, build_continuous_with, to_per_unit, Eq39Sign};

fn main() {
    let si = plant::nominal_si();
    let bases = plant::nominal_bases();
    println!(
        "SI design: L = {} H, C = {} F, r_l = {} ohm, R = {} ohm, V_s = {} V",
        si.l, si.c, si.r_l, si.r, si.v_s
    );

    let pu = to_per_unit(&si, &bases).unwrap();
    println!(
        "per-unit (V_base = {} V, Z_base = {} ohm, omega_base = {:.1} rad/s):",
        bases.v_base, bases.z_base, bases.omega_base
    );
    println!(
        "  L = {:.4}, C = {:.4}, r_l = {:.4}, R = {:.4}, V_s = {:.4}",
        pu.l, pu.c, pu.r_l, pu.r, pu.v_s
    );

    let (a_c, b_c) = build_continuous(&pu).unwrap();
    println!("continuous A_c = {:.6}", a_c);
    println!("continuous b_c = {:.6}", b_c.transpose());

    let f_s = 20_000.0;
    let t_pu = bases.omega_base / f_s;
    println!("per-unit sample interval: {t_pu:.6} (f_s = {f_s} Hz)");
    let (a, b) = zoh_discretize(&a_c, &b_c, t_pu).unwrap();
    println!("discrete A = {:.6}", a);
    println!("discrete b = {:.6}", b.transpose());
    println!(
        "spectral radius rho(A) = {:.6}",
        spectral_radius(&a).unwrap()
    );

    // Cross-check: the A block equals the bare matrix exponential.
    let direct = mat_exp(&a_c, t_pu).unwrap();
    println!(
        "augmented-exponential A vs direct exponential: max diff {:.3e}",
        switchctl::linalg::max_abs(&(&a - &direct))
    );

    // The literal sign variant is a saddle and the construction refuses it.
    match build_continuous_with(&pu, Eq39Sign::PaperLiteral) {
        Err(e) => println!("literal sign variant rejected as expected: {e}"),
        Ok(_) => println!("unexpected: literal sign variant passed the stability gate"),
    }
}
