//! Small dense matrix/vector arithmetic for the controller stack: matrix
//! exponential, zero-order-hold discretization, spectral radius, the
//! discounted Lyapunov solve, and dense linear solves.
//!
//! Storage and elementary arithmetic are `nalgebra` dynamic matrices; the
//! operations here are the ones the rest of the crate depends on for its
//! numerical contracts. Everything is sized for small systems (n up to ~10).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Condition-number threshold above which a linear solve is rejected as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Fixed-point iteration controls for the discounted Lyapunov cross-check.
const LYAPUNOV_STEP_TOL: f64 = 1e-14;
const LYAPUNOV_MAX_ITERS: usize = 1_000_000;
/// Required agreement between the Kronecker and fixed-point routes.
const LYAPUNOV_ROUTE_TOL: f64 = 1e-10;
/// Residual bound enforced on the returned solution.
const LYAPUNOV_RESIDUAL_TOL: f64 = 1e-12;

fn ensure_finite_matrix(m: &Matrix, what: &str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "{what} contains non-finite entries"
        )))
    }
}

fn ensure_finite_vector(v: &Vector, what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "{what} contains non-finite entries"
        )))
    }
}

fn ensure_square(m: &Matrix, what: &str) -> Result<()> {
    if m.nrows() == m.ncols() {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

/// Infinity norm (max absolute row sum).
pub fn inf_norm(m: &Matrix) -> f64 {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest absolute entry.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Matrix exponential e^{Mt} by scaling-and-squaring with a truncated Taylor
/// series. The argument is halved until its infinity norm is at most 0.5, the
/// series is summed to machine-level convergence, and the result is squared
/// back up. For the small matrices in scope this reaches ~1e-15 relative
/// accuracy; simplicity is preferred over the Padé machinery a large-n code
/// would want.
pub fn mat_exp(m: &Matrix, t: f64) -> Result<Matrix> {
    ensure_square(m, "mat_exp input")?;
    ensure_finite_matrix(m, "mat_exp input")?;
    if !t.is_finite() {
        return Err(Error::Parameter("mat_exp time must be finite".into()));
    }
    let n = m.nrows();
    let scaled = m * t;
    let norm = inf_norm(&scaled);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let x = &scaled / 2f64.powi(squarings);

    let mut result = Matrix::identity(n, n);
    let mut term = Matrix::identity(n, n);
    for k in 1..=60u32 {
        term = &term * &x / f64::from(k);
        result += &term;
        if max_abs(&term) <= 1e-18 * max_abs(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

/// Zero-order-hold discretization of dx/dt = A_c x + b_c u over a step T:
/// A = e^{A_c T}, b = (integral of e^{A_c s} ds over [0, T]) b_c.
///
/// Both blocks come from one exponential of the augmented matrix
/// [[A_c, b_c], [0, 0]] scaled by T.
pub fn zoh_discretize(a_c: &Matrix, b_c: &Vector, t: f64) -> Result<(Matrix, Vector)> {
    ensure_square(a_c, "zoh A_c")?;
    let n = a_c.nrows();
    if b_c.len() != n {
        return Err(Error::Dimension(format!(
            "zoh b_c has length {} but A_c is {n}x{n}",
            b_c.len()
        )));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Parameter(format!(
            "zoh sample interval must be positive, got {t}"
        )));
    }
    let mut aug = Matrix::zeros(n + 1, n + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(a_c);
    aug.view_mut((0, n), (n, 1)).copy_from(b_c);
    let e = mat_exp(&aug, t)?;
    let a = e.view((0, 0), (n, n)).into_owned();
    let b = e.view((0, n), (n, 1)).column(0).into_owned();
    Ok((a, b))
}

/// Largest eigenvalue magnitude. Computed from the general complex
/// eigenvalues; the 2x2 characteristic-polynomial route lives in the tests as
/// an independent oracle.
pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    ensure_square(a, "spectral_radius input")?;
    ensure_finite_matrix(a, "spectral_radius input")?;
    if a.nrows() == 0 {
        return Ok(0.0);
    }
    let eigs = a.clone().complex_eigenvalues();
    Ok(eigs.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Solve M x = y by LU with partial pivoting, guarded by an SVD condition
/// estimate (rejected above [`CONDITION_LIMIT`]).
pub fn solve_linear(m: &Matrix, y: &Vector) -> Result<Vector> {
    ensure_square(m, "solve_linear matrix")?;
    ensure_finite_matrix(m, "solve_linear matrix")?;
    ensure_finite_vector(y, "solve_linear rhs")?;
    if y.len() != m.nrows() {
        return Err(Error::Dimension(format!(
            "rhs length {} does not match {}x{} matrix",
            y.len(),
            m.nrows(),
            m.ncols()
        )));
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(0.0f64, |a, &s| a.max(s));
    let smin = sv.iter().fold(f64::INFINITY, |a, &s| a.min(s));
    if smin <= 0.0 || smax / smin > CONDITION_LIMIT {
        return Err(Error::Singular(format!(
            "condition estimate {:.3e} exceeds limit {CONDITION_LIMIT:.0e}",
            if smin > 0.0 {
                smax / smin
            } else {
                f64::INFINITY
            }
        )));
    }
    let x = m
        .clone()
        .lu()
        .solve(y)
        .ok_or_else(|| Error::Singular("LU solve failed".into()))?;
    let ynorm = y.norm();
    if ynorm > 0.0 {
        let res = (m * &x - y).norm();
        if res > 1e-10 * ynorm {
            return Err(Error::Numeric(format!(
                "linear solve residual {res:.3e} exceeds 1e-10 relative"
            )));
        }
    }
    Ok(x)
}

pub(crate) fn check_symmetric_pub(q: &Matrix, what: &str) -> Result<()> {
    check_symmetric(q, what)
}

pub(crate) fn check_psd_pub(q: &Matrix, what: &str) -> Result<()> {
    check_psd(q, what)
}

fn check_symmetric(q: &Matrix, what: &str) -> Result<()> {
    let scale = 1.0 + max_abs(q);
    for i in 0..q.nrows() {
        for j in (i + 1)..q.ncols() {
            if (q[(i, j)] - q[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::Parameter(format!("{what} is not symmetric")));
            }
        }
    }
    Ok(())
}

fn check_psd(q: &Matrix, what: &str) -> Result<()> {
    let eigs = q.clone().symmetric_eigen().eigenvalues;
    let scale = 1.0 + max_abs(q);
    if eigs.iter().any(|&e| e < -1e-10 * scale) {
        return Err(Error::Parameter(format!(
            "{what} is not positive semidefinite"
        )));
    }
    Ok(())
}

/// Solve the discounted Lyapunov equation P = Q + alpha A^T P A.
///
/// The primary route is the linearized (Kronecker) direct solve of
/// (I - alpha A^T (x) A^T) vec(P) = vec(Q); a fixed-point iteration of the
/// recursion is run as an independent cross-check and the two must agree to
/// 1e-10. The returned P is symmetrized and its residual verified below
/// 1e-12. Requires alpha * rho(A)^2 < 1 so the defining series converges.
pub fn solve_discounted_lyapunov(a: &Matrix, q: &Matrix, alpha: f64) -> Result<Matrix> {
    ensure_square(a, "lyapunov A")?;
    ensure_finite_matrix(a, "lyapunov A")?;
    if q.nrows() != a.nrows() || q.ncols() != a.ncols() {
        return Err(Error::Dimension(format!(
            "Q is {}x{} but A is {}x{}",
            q.nrows(),
            q.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    check_symmetric(q, "lyapunov Q")?;
    check_psd(q, "lyapunov Q")?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!(
            "discount must lie in (0,1), got {alpha}"
        )));
    }
    let rho = spectral_radius(a)?;
    if alpha * rho * rho >= 1.0 {
        return Err(Error::NonConvergence(format!(
            "alpha * rho(A)^2 = {:.6} >= 1, series diverges",
            alpha * rho * rho
        )));
    }

    let n = a.nrows();
    let at = a.transpose();
    let kron = at.kronecker(&at);
    let system = Matrix::identity(n * n, n * n) - kron * alpha;
    let rhs = Vector::from_column_slice(q.as_slice());
    let vec_p = solve_linear(&system, &rhs)?;
    let p_direct = Matrix::from_column_slice(n, n, vec_p.as_slice());
    let p_direct = (&p_direct + p_direct.transpose()) * 0.5;

    // Cross-check: fixed-point iteration of P <- Q + alpha A^T P A.
    let mut p_iter = q.clone();
    let mut converged = false;
    for _ in 0..LYAPUNOV_MAX_ITERS {
        let next = q + (&at * &p_iter * a) * alpha;
        let step = max_abs(&(&next - &p_iter));
        p_iter = next;
        if step < LYAPUNOV_STEP_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence(format!(
            "fixed-point iteration did not reach {LYAPUNOV_STEP_TOL:e} within {LYAPUNOV_MAX_ITERS} iterations"
        )));
    }
    let disagreement = max_abs(&(&p_direct - &p_iter));
    if disagreement > LYAPUNOV_ROUTE_TOL {
        return Err(Error::Numeric(format!(
            "Kronecker and fixed-point routes disagree by {disagreement:.3e}"
        )));
    }

    let residual = max_abs(&(&p_direct - q - (&at * &p_direct * a) * alpha));
    if residual > LYAPUNOV_RESIDUAL_TOL {
        return Err(Error::Numeric(format!(
            "Lyapunov residual {residual:.3e} exceeds {LYAPUNOV_RESIDUAL_TOL:e}"
        )));
    }
    Ok(p_direct)
}
