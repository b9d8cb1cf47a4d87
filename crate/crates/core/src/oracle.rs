//! Independent ground-truth machinery: exhaustive finite-horizon search over
//! binary control sequences, and gridded value iteration on the exact
//! two-branch Bellman operator. Used to bound how far the closed-form
//! affine policy sits from optimal; the module never assumes the policy is
//! good, it measures.

use crate::controller::{AffinePolicy, ProblemSpec, Switch};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::plant::SystemModel;

/// Enumeration guard: 2^20 sequences at most.
pub const MAX_BRUTE_HORIZON: usize = 20;
/// Rollout guard.
pub const MAX_ROLLOUT_HORIZON: usize = 1_000_000;

/// One shared step of the truncated-horizon objective, used verbatim by the
/// naive enumeration, the Gray-code enumeration, and the policy rollout so
/// identical action sequences produce bit-identical costs.
#[inline]
fn horizon_step(
    model: &SystemModel,
    spec: &ProblemSpec,
    x: &Vector,
    z: Switch,
    u: Switch,
    alpha_pow: f64,
    acc: f64,
) -> (Vector, f64, f64) {
    let c = spec.stage_cost(x, z, u);
    let acc = acc + alpha_pow * c;
    let x_next = &model.a * x + &model.b * u.as_f64();
    (x_next, acc, c)
}

fn lex_less(a: &[Switch], b: &[Switch]) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.as_bit().cmp(&y.as_bit()) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

/// Exhaustive-search result over the truncated horizon.
#[derive(Clone, Debug)]
pub struct BruteForceResult {
    pub best_sequence: Vec<Switch>,
    pub best_cost: f64,
    /// Best cost among sequences opening with each first action; equal
    /// values mean both first actions are optimal.
    pub best_cost_first_off: f64,
    pub best_cost_first_on: f64,
    /// Largest stage cost observed anywhere in the enumeration tree,
    /// usable as a tail-bound ceiling.
    pub max_stage_cost: f64,
}

impl BruteForceResult {
    /// Whether taking `u` first can still reach the optimal truncated cost.
    pub fn first_action_is_optimal(&self, u: Switch) -> bool {
        let best = match u {
            Switch::Off => self.best_cost_first_off,
            Switch::On => self.best_cost_first_on,
        };
        best == self.best_cost
    }
}

fn check_horizon(n: usize) -> Result<()> {
    if n > MAX_BRUTE_HORIZON {
        return Err(Error::Parameter(format!(
            "enumeration horizon {n} exceeds the 2^{MAX_BRUTE_HORIZON} guard"
        )));
    }
    Ok(())
}

fn alpha_powers(alpha: f64, n: usize) -> Vec<f64> {
    let mut pows = Vec::with_capacity(n);
    let mut p = 1.0;
    for _ in 0..n {
        pows.push(p);
        p *= alpha;
    }
    pows
}

/// Exact argmin over all 2^N binary sequences of the truncated discounted
/// cost, visiting sequences in lexicographic order (so the first strict
/// improvement implements the lexicographic tie-break).
pub fn brute_force(
    model: &SystemModel,
    spec: &ProblemSpec,
    x0: &Vector,
    z0: Switch,
    n: usize,
) -> Result<BruteForceResult> {
    check_horizon(n)?;
    let pows = alpha_powers(spec.alpha, n);
    let mut best_cost = f64::INFINITY;
    let mut best_seq: Vec<Switch> = Vec::new();
    let mut best_off = f64::INFINITY;
    let mut best_on = f64::INFINITY;
    let mut max_stage = 0.0f64;

    let total: u64 = 1u64 << n;
    let mut seq = vec![Switch::Off; n];
    for m in 0..total {
        for (k, slot) in seq.iter_mut().enumerate() {
            *slot = Switch::from_bit(((m >> (n - 1 - k)) & 1) as u8);
        }
        let mut x = x0.clone();
        let mut z = z0;
        let mut acc = 0.0;
        for (k, &u) in seq.iter().enumerate() {
            let (xn, a, c) = horizon_step(model, spec, &x, z, u, pows[k], acc);
            x = xn;
            acc = a;
            z = u;
            max_stage = max_stage.max(c);
        }
        if n > 0 {
            let slot = if seq[0] == Switch::Off {
                &mut best_off
            } else {
                &mut best_on
            };
            if acc < *slot {
                *slot = acc;
            }
        }
        if acc < best_cost {
            best_cost = acc;
            best_seq = seq.clone();
        }
    }
    if n == 0 {
        best_cost = 0.0;
        best_off = 0.0;
        best_on = 0.0;
    }
    Ok(BruteForceResult {
        best_sequence: best_seq,
        best_cost,
        best_cost_first_off: best_off,
        best_cost_first_on: best_on,
        max_stage_cost: max_stage,
    })
}

/// The same argmin visited in binary-reflected Gray-code order with
/// incremental prefix reuse. Prefix states and partial sums are stored per
/// depth and recomputed only from the flipped position, through the same
/// step function as the naive order, so the two enumerations must agree
/// bit-for-bit.
pub fn brute_force_gray(
    model: &SystemModel,
    spec: &ProblemSpec,
    x0: &Vector,
    z0: Switch,
    n: usize,
) -> Result<BruteForceResult> {
    check_horizon(n)?;
    if n == 0 {
        return brute_force(model, spec, x0, z0, 0);
    }
    let pows = alpha_powers(spec.alpha, n);
    let mut seq = vec![Switch::Off; n];
    let mut states: Vec<Vector> = Vec::with_capacity(n + 1);
    let mut prefix = vec![0.0f64; n + 1];
    states.push(x0.clone());
    for _ in 0..n {
        states.push(Vector::zeros(x0.len()));
    }
    let mut max_stage = 0.0f64;

    let z_at = |seq: &[Switch], k: usize| if k == 0 { z0 } else { seq[k - 1] };

    // Fill depth range [from, n).
    let recompute = |seq: &[Switch],
                     states: &mut Vec<Vector>,
                     prefix: &mut Vec<f64>,
                     max_stage: &mut f64,
                     from: usize| {
        for k in from..n {
            let z = z_at(seq, k);
            let (xn, acc, c) = horizon_step(model, spec, &states[k], z, seq[k], pows[k], prefix[k]);
            states[k + 1] = xn;
            prefix[k + 1] = acc;
            *max_stage = max_stage.max(c);
        }
    };

    recompute(&seq, &mut states, &mut prefix, &mut max_stage, 0);
    let mut best_cost = prefix[n];
    let mut best_seq = seq.clone();
    let mut best_off = f64::INFINITY;
    let mut best_on = f64::INFINITY;
    let consider_first = |seq: &[Switch], cost: f64, off: &mut f64, on: &mut f64| {
        let slot = if seq[0] == Switch::Off { off } else { on };
        if cost < *slot {
            *slot = cost;
        }
    };
    consider_first(&seq, best_cost, &mut best_off, &mut best_on);

    let total: u64 = 1u64 << n;
    for m in 1..total {
        // Gray code flips exactly one bit per visit; low bit index tz maps to
        // sequence position n - 1 - tz under the naive decoding.
        let tz = m.trailing_zeros() as usize;
        let p = n - 1 - tz;
        seq[p] = Switch::from_bit(1 - seq[p].as_bit());
        recompute(&seq, &mut states, &mut prefix, &mut max_stage, p);
        let cost = prefix[n];
        consider_first(&seq, cost, &mut best_off, &mut best_on);
        if cost < best_cost || (cost == best_cost && lex_less(&seq, &best_seq)) {
            best_cost = cost;
            best_seq = seq.clone();
        }
    }

    Ok(BruteForceResult {
        best_sequence: best_seq,
        best_cost,
        best_cost_first_off: best_off,
        best_cost_first_on: best_on,
        max_stage_cost: max_stage,
    })
}

/// Truncated cost of the trajectory the affine policy generates, accumulated
/// through the same step function as the enumerations.
pub fn rollout_cost(
    model: &SystemModel,
    spec: &ProblemSpec,
    pol: &AffinePolicy,
    x0: &Vector,
    z0: Switch,
    n: usize,
) -> Result<f64> {
    if n > MAX_ROLLOUT_HORIZON {
        return Err(Error::Parameter(format!(
            "rollout horizon {n} exceeds the {MAX_ROLLOUT_HORIZON} guard"
        )));
    }
    let mut x = x0.clone();
    let mut z = z0;
    let mut acc = 0.0;
    let mut pow = 1.0;
    for _ in 0..n {
        let u = pol.decide(&x, z);
        let (xn, a, _) = horizon_step(model, spec, &x, z, u, pow, acc);
        x = xn;
        acc = a;
        z = u;
        pow *= spec.alpha;
    }
    Ok(acc)
}

/// Joint truncated-horizon comparison of the policy against the exhaustive
/// optimum from one initial condition.
#[derive(Clone, Debug)]
pub struct HorizonResult {
    pub best_sequence: Vec<Switch>,
    pub best_cost: f64,
    pub policy_cost: f64,
    pub gap: f64,
    /// alpha^N * c_max / (1 - alpha), the truncation-error ceiling to read
    /// the gap against.
    pub tail_bound: f64,
}

pub fn compare_horizon(
    model: &SystemModel,
    spec: &ProblemSpec,
    pol: &AffinePolicy,
    x0: &Vector,
    z0: Switch,
    n: usize,
) -> Result<HorizonResult> {
    let bf = brute_force(model, spec, x0, z0, n)?;
    let policy_cost = rollout_cost(model, spec, pol, x0, z0, n)?;
    let tail_bound = spec.alpha.powi(n as i32) * bf.max_stage_cost / (1.0 - spec.alpha);
    Ok(HorizonResult {
        best_sequence: bf.best_sequence,
        best_cost: bf.best_cost,
        policy_cost,
        gap: policy_cost - bf.best_cost,
        tail_bound,
    })
}

/// Fraction of sampled (x, z) pairs whose policy first action can still
/// reach the horizon-N optimum (ties count as agreement for either action).
#[derive(Clone, Debug)]
pub struct AgreementReport {
    pub fraction: f64,
    pub horizon: usize,
    pub tail_bound: f64,
    pub samples: usize,
}

pub fn first_action_agreement(
    model: &SystemModel,
    spec: &ProblemSpec,
    decide: &mut dyn FnMut(&Vector, Switch) -> Switch,
    samples: &[(Vector, Switch)],
    n: usize,
) -> Result<AgreementReport> {
    if n > 16 {
        return Err(Error::Parameter(format!(
            "agreement horizon {n} exceeds the guard of 16"
        )));
    }
    if samples.is_empty() {
        return Err(Error::Parameter(
            "agreement requires at least one sample".into(),
        ));
    }
    let mut agree = 0usize;
    let mut c_max = 0.0f64;
    for (x0, z0) in samples {
        let bf = brute_force(model, spec, x0, *z0, n)?;
        c_max = c_max.max(bf.max_stage_cost);
        if bf.first_action_is_optimal(decide(x0, *z0)) {
            agree += 1;
        }
    }
    Ok(AgreementReport {
        fraction: agree as f64 / samples.len() as f64,
        horizon: n,
        tail_bound: spec.alpha.powi(n as i32) * c_max / (1.0 - spec.alpha),
        samples: samples.len(),
    })
}

/// State-space rectangle for the value-iteration grid.
#[derive(Clone, Copy, Debug)]
pub struct GridBox {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

/// Converged (or truncated) grid value iteration output: value and greedy
/// policy tables per previous-switch state, with convergence diagnostics.
#[derive(Clone, Debug)]
pub struct GridValue {
    pub domain: GridBox,
    pub resolution: usize,
    /// Row-major [iv * resolution + ii] values for z = 0 and z = 1.
    pub v0: Vec<f64>,
    pub v1: Vec<f64>,
    pub policy0: Vec<Switch>,
    pub policy1: Vec<Switch>,
    /// Sup-norm change per sweep, in order.
    pub sweep_changes: Vec<f64>,
    /// (node, action) pairs whose successor fell outside the box and was
    /// clamped to the boundary.
    pub clamped_successor_count: usize,
    pub sweeps_run: usize,
    pub converged: bool,
}

impl GridValue {
    pub fn node_state(&self, iv: usize, ii: usize) -> Vector {
        let res = self.resolution as f64 - 1.0;
        Vector::from_column_slice(&[
            self.domain.lo[0] + (self.domain.hi[0] - self.domain.lo[0]) * iv as f64 / res,
            self.domain.lo[1] + (self.domain.hi[1] - self.domain.lo[1]) * ii as f64 / res,
        ])
    }

    /// Greedy-policy hysteresis containment: on(x, z=0) implies on(x, z=1)
    /// at every node.
    pub fn hysteresis_containment(&self) -> bool {
        self.policy0
            .iter()
            .zip(self.policy1.iter())
            .all(|(p0, p1)| *p0 != Switch::On || *p1 == Switch::On)
    }

    /// Fraction of (node, z) pairs where the greedy grid policy matches the
    /// affine policy's decision.
    pub fn agreement_with(&self, pol: &AffinePolicy) -> f64 {
        let mut agree = 0usize;
        let total = 2 * self.policy0.len();
        for iv in 0..self.resolution {
            for ii in 0..self.resolution {
                let x = self.node_state(iv, ii);
                let idx = iv * self.resolution + ii;
                if pol.decide(&x, Switch::Off) == self.policy0[idx] {
                    agree += 1;
                }
                if pol.decide(&x, Switch::On) == self.policy1[idx] {
                    agree += 1;
                }
            }
        }
        agree as f64 / total as f64
    }
}

struct Stencil {
    idx: [usize; 4],
    w: [f64; 4],
}

/// Value iteration on the exact Bellman operator
/// V(x, z) = min_u { c(x, z, u) + alpha V(Ax + bu, u) }
/// over a regular grid with bilinear interpolation of successor values.
/// Successors outside the box clamp to the boundary and are counted. Stops
/// on a sup-norm change below `tol` or after `max_sweeps`; raises a numeric
/// error if the change grows over five consecutive sweeps.
pub fn grid_value_iteration(
    model: &SystemModel,
    spec: &ProblemSpec,
    domain: GridBox,
    resolution: usize,
    max_sweeps: usize,
    tol: f64,
) -> Result<GridValue> {
    if model.n != 2 {
        return Err(Error::Parameter(
            "grid value iteration is implemented for 2-state plants".into(),
        ));
    }
    if resolution < 11 {
        return Err(Error::Parameter(format!(
            "resolution must be at least 11, got {resolution}"
        )));
    }
    if !(domain.hi[0] > domain.lo[0] && domain.hi[1] > domain.lo[1]) {
        return Err(Error::Parameter(
            "grid box must have positive extent".into(),
        ));
    }

    let res = resolution;
    let nodes = res * res;
    let span = [domain.hi[0] - domain.lo[0], domain.hi[1] - domain.lo[1]];
    let step = [span[0] / (res - 1) as f64, span[1] / (res - 1) as f64];
    let coord = |iv: usize, ii: usize| {
        Vector::from_column_slice(&[
            domain.lo[0] + step[0] * iv as f64,
            domain.lo[1] + step[1] * ii as f64,
        ])
    };

    // Precompute stage costs and successor stencils once; sweeps then touch
    // only the tables.
    let mut q_grid = vec![0.0f64; nodes];
    let mut stencils: [Vec<Stencil>; 2] = [Vec::with_capacity(nodes), Vec::with_capacity(nodes)];
    let mut clamped = 0usize;
    for iv in 0..res {
        for ii in 0..res {
            let x = coord(iv, ii);
            q_grid[iv * res + ii] = spec.quadratic_distance(&x);
            for (ui, stencil_list) in stencils.iter_mut().enumerate() {
                let y = &model.a * &x + &model.b * ui as f64;
                let mut yv = y[0];
                let mut yi = y[1];
                let mut was_clamped = false;
                if yv < domain.lo[0] || yv > domain.hi[0] {
                    yv = yv.clamp(domain.lo[0], domain.hi[0]);
                    was_clamped = true;
                }
                if yi < domain.lo[1] || yi > domain.hi[1] {
                    yi = yi.clamp(domain.lo[1], domain.hi[1]);
                    was_clamped = true;
                }
                if was_clamped {
                    clamped += 1;
                }
                let fv = ((yv - domain.lo[0]) / step[0]).clamp(0.0, (res - 2) as f64);
                let fi = ((yi - domain.lo[1]) / step[1]).clamp(0.0, (res - 2) as f64);
                let cv = fv.floor() as usize;
                let ci = fi.floor() as usize;
                let tv = fv - cv as f64;
                let ti = fi - ci as f64;
                stencil_list.push(Stencil {
                    idx: [
                        cv * res + ci,
                        cv * res + ci + 1,
                        (cv + 1) * res + ci,
                        (cv + 1) * res + ci + 1,
                    ],
                    w: [
                        (1.0 - tv) * (1.0 - ti),
                        (1.0 - tv) * ti,
                        tv * (1.0 - ti),
                        tv * ti,
                    ],
                });
            }
        }
    }

    let interp = |table: &[f64], s: &Stencil| -> f64 {
        s.w[0] * table[s.idx[0]]
            + s.w[1] * table[s.idx[1]]
            + s.w[2] * table[s.idx[2]]
            + s.w[3] * table[s.idx[3]]
    };

    let mut v0 = vec![0.0f64; nodes];
    let mut v1 = vec![0.0f64; nodes];
    let mut v0_next = vec![0.0f64; nodes];
    let mut v1_next = vec![0.0f64; nodes];
    let mut sweep_changes = Vec::with_capacity(max_sweeps);
    let mut converged = false;
    let mut sweeps_run = 0usize;

    for _ in 0..max_sweeps {
        let mut change = 0.0f64;
        for node in 0..nodes {
            let q = q_grid[node];
            let cont_off = spec.alpha * interp(&v0, &stencils[0][node]);
            let cont_on = spec.alpha * interp(&v1, &stencils[1][node]);
            // z = 0: staying off is free, turning on pays beta.
            let off_branch = q + cont_off;
            let on_branch = q + spec.beta + cont_on;
            let new0 = off_branch.min(on_branch);
            // z = 1: staying on is free, turning off pays beta.
            let off_branch1 = q + spec.beta + cont_off;
            let on_branch1 = q + cont_on;
            let new1 = off_branch1.min(on_branch1);
            change = change
                .max((new0 - v0[node]).abs())
                .max((new1 - v1[node]).abs());
            v0_next[node] = new0;
            v1_next[node] = new1;
        }
        std::mem::swap(&mut v0, &mut v0_next);
        std::mem::swap(&mut v1, &mut v1_next);
        sweep_changes.push(change);
        sweeps_run += 1;

        if sweep_changes.len() >= 6 {
            let tail = &sweep_changes[sweep_changes.len() - 6..];
            if tail.windows(2).all(|w| w[1] > w[0]) {
                return Err(Error::Numeric(
                    "value iteration is not contracting: sup-norm change grew over 5 sweeps".into(),
                ));
            }
        }
        if change < tol {
            converged = true;
            break;
        }
    }

    // Greedy policies from the final tables; ties resolve to On like the
    // affine policy.
    let mut policy0 = vec![Switch::Off; nodes];
    let mut policy1 = vec![Switch::Off; nodes];
    for node in 0..nodes {
        let q = q_grid[node];
        let cont_off = spec.alpha * interp(&v0, &stencils[0][node]);
        let cont_on = spec.alpha * interp(&v1, &stencils[1][node]);
        policy0[node] = if q + spec.beta + cont_on <= q + cont_off {
            Switch::On
        } else {
            Switch::Off
        };
        policy1[node] = if q + cont_on <= q + spec.beta + cont_off {
            Switch::On
        } else {
            Switch::Off
        };
    }

    Ok(GridValue {
        domain,
        resolution,
        v0,
        v1,
        policy0,
        policy1,
        sweep_changes,
        clamped_successor_count: clamped,
        sweeps_run,
        converged,
    })
}
