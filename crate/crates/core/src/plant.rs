//! Buck-converter model construction, per-unit normalization, and
//! discretization glue producing the [`SystemModel`] the controller and
//! simulator consume.
//!
//! The canonical frame is per-unit: synthesis and simulation run on
//! normalized states (capacitor voltage, inductor current), with SI values
//! appearing only on input/output conversion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// Default angular base reconciling the nominal design's per-unit inductance
/// and capacitance values with their SI counterparts (2*pi*40 kHz).
pub const DEFAULT_OMEGA_BASE: f64 = 2.0 * std::f64::consts::PI * 40_000.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnitSystem {
    Si,
    PerUnit,
}

/// Sign convention for the (2,1) entry of the continuous buck matrix.
///
/// The Hurwitz-consistent form is -1/L (inductor KVL); the literal published
/// variant carries +1/L, which yields a saddle (negative determinant) for any
/// sensible parameter set and is kept only so the discrepancy can be
/// demonstrated and reported.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Eq39Sign {
    #[default]
    HurwitzFixed,
    PaperLiteral,
}

/// Buck component values, either SI (henry/farad/ohm/volt) or per-unit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConverterParams {
    pub l: f64,
    pub c: f64,
    pub r_l: f64,
    pub r: f64,
    pub v_s: f64,
    pub unit_system: UnitSystem,
}

impl ConverterParams {
    pub fn new(
        l: f64,
        c: f64,
        r_l: f64,
        r: f64,
        v_s: f64,
        unit_system: UnitSystem,
    ) -> Result<Self> {
        for (name, v) in [("L", l), ("C", c), ("r_l", r_l), ("R", r), ("V_s", v_s)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!(
                    "converter parameter {name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(Self {
            l,
            c,
            r_l,
            r,
            v_s,
            unit_system,
        })
    }

    /// Advisory checks that do not reject the parameter set.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.r_l >= self.r {
            w.push(format!(
                "inductor loss resistance r_l = {} is not below the load R = {}; the converter is a poor regulator",
                self.r_l, self.r
            ));
        }
        w
    }
}

/// Normalization bases for the per-unit system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerUnitBases {
    pub v_base: f64,
    pub z_base: f64,
    pub omega_base: f64,
}

impl PerUnitBases {
    pub fn new(v_base: f64, z_base: f64, omega_base: f64) -> Result<Self> {
        for (name, v) in [
            ("V_base", v_base),
            ("Z_base", z_base),
            ("omega_base", omega_base),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!(
                    "base {name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(Self {
            v_base,
            z_base,
            omega_base,
        })
    }

    /// Current base implied by the voltage and impedance bases.
    pub fn i_base(&self) -> f64 {
        self.v_base / self.z_base
    }
}

/// Discrete-time plant x_{k+1} = A x_k + b u_k with its sampling metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemModel {
    pub a: Matrix,
    pub b: Vector,
    pub n: usize,
    /// Sample interval in seconds, kept for time axes.
    pub t_sample_s: f64,
    pub state_labels: Vec<String>,
}

impl SystemModel {
    /// Validating constructor: requires a stable discrete plant (rho(A) < 1).
    pub fn new(a: Matrix, b: Vector, t_sample_s: f64, state_labels: Vec<String>) -> Result<Self> {
        let rho = linalg::spectral_radius(&a)?;
        if rho >= 1.0 {
            return Err(Error::Stability(format!(
                "discrete plant is unstable: rho(A) = {rho:.6} >= 1"
            )));
        }
        Ok(Self::new_unchecked(a, b, t_sample_s, state_labels))
    }

    /// Constructor without the stability gate, for synthetic test systems.
    pub fn new_unchecked(a: Matrix, b: Vector, t_sample_s: f64, state_labels: Vec<String>) -> Self {
        let n = a.nrows();
        let labels = if state_labels.len() == n {
            state_labels
        } else {
            (0..n).map(|i| format!("x{}", i + 1)).collect()
        };
        Self {
            n,
            a,
            b,
            t_sample_s,
            state_labels: labels,
        }
    }
}

/// Continuous buck pair (A_c, b_c) with the Hurwitz-consistent sign.
pub fn build_continuous(params: &ConverterParams) -> Result<(Matrix, Vector)> {
    build_continuous_with(params, Eq39Sign::HurwitzFixed)
}

/// Continuous buck pair under an explicit sign convention. Asserts the result
/// is Hurwitz (trace < 0, det > 0) and fails with a stability error
/// otherwise, which is exactly what the literal sign variant does for any
/// parameter set with r_l < R.
pub fn build_continuous_with(params: &ConverterParams, sign: Eq39Sign) -> Result<(Matrix, Vector)> {
    let ConverterParams {
        l, c, r_l, r, v_s, ..
    } = *params;
    let a21 = match sign {
        Eq39Sign::HurwitzFixed => -1.0 / l,
        Eq39Sign::PaperLiteral => 1.0 / l,
    };
    let a_c = Matrix::from_row_slice(2, 2, &[-1.0 / (r * c), 1.0 / c, a21, -r_l / l]);
    let b_c = Vector::from_column_slice(&[0.0, v_s / l]);
    let trace = a_c[(0, 0)] + a_c[(1, 1)];
    let det = a_c[(0, 0)] * a_c[(1, 1)] - a_c[(0, 1)] * a_c[(1, 0)];
    if !(trace < 0.0 && det > 0.0) {
        return Err(Error::Stability(format!(
            "continuous plant matrix is not Hurwitz (trace = {trace:.6e}, det = {det:.6e})"
        )));
    }
    Ok((a_c, b_c))
}

/// SI -> per-unit conversion: resistances by Z_base, voltages by V_base,
/// reactive elements by the angular base (L_pu = w L / Z, C_pu = w C Z).
pub fn to_per_unit(params: &ConverterParams, bases: &PerUnitBases) -> Result<ConverterParams> {
    if params.unit_system != UnitSystem::Si {
        return Err(Error::Parameter("to_per_unit expects SI parameters".into()));
    }
    ConverterParams::new(
        bases.omega_base * params.l / bases.z_base,
        bases.omega_base * params.c * bases.z_base,
        params.r_l / bases.z_base,
        params.r / bases.z_base,
        params.v_s / bases.v_base,
        UnitSystem::PerUnit,
    )
}

/// Inverse of [`to_per_unit`].
pub fn to_si(params: &ConverterParams, bases: &PerUnitBases) -> Result<ConverterParams> {
    if params.unit_system != UnitSystem::PerUnit {
        return Err(Error::Parameter("to_si expects per-unit parameters".into()));
    }
    ConverterParams::new(
        params.l * bases.z_base / bases.omega_base,
        params.c / (bases.omega_base * bases.z_base),
        params.r_l * bases.z_base,
        params.r * bases.z_base,
        params.v_s * bases.v_base,
        UnitSystem::Si,
    )
}

/// Discretize a per-unit buck at switching frequency f_s. The per-unit sample
/// interval is omega_base / f_s; the SI interval 1/f_s is recorded on the
/// model for time axes.
pub fn discretize_plant(
    params: &ConverterParams,
    f_s_hz: f64,
    omega_base: f64,
) -> Result<SystemModel> {
    discretize_plant_with(params, f_s_hz, omega_base, Eq39Sign::HurwitzFixed)
}

pub fn discretize_plant_with(
    params: &ConverterParams,
    f_s_hz: f64,
    omega_base: f64,
    sign: Eq39Sign,
) -> Result<SystemModel> {
    if params.unit_system != UnitSystem::PerUnit {
        return Err(Error::Parameter(
            "discretize_plant expects per-unit parameters".into(),
        ));
    }
    if !(f_s_hz > 0.0 && f_s_hz.is_finite()) {
        return Err(Error::Parameter(format!(
            "switching frequency must be positive, got {f_s_hz}"
        )));
    }
    let (a_c, b_c) = build_continuous_with(params, sign)?;
    let t_pu = omega_base / f_s_hz;
    let (a, b) = linalg::zoh_discretize(&a_c, &b_c, t_pu)?;
    SystemModel::new(a, b, 1.0 / f_s_hz, vec!["v_c".into(), "i_l".into()])
}

/// A discretized plant bundled with everything needed to rebuild it when a
/// scenario event rescales the load.
#[derive(Clone, Debug)]
pub struct PlantInstance {
    pub params: ConverterParams,
    pub f_s_hz: f64,
    pub omega_base: f64,
    pub sign: Eq39Sign,
    pub model: SystemModel,
}

impl PlantInstance {
    pub fn from_per_unit(params: ConverterParams, f_s_hz: f64, omega_base: f64) -> Result<Self> {
        Self::from_per_unit_with(params, f_s_hz, omega_base, Eq39Sign::HurwitzFixed)
    }

    pub fn from_per_unit_with(
        params: ConverterParams,
        f_s_hz: f64,
        omega_base: f64,
        sign: Eq39Sign,
    ) -> Result<Self> {
        let model = discretize_plant_with(&params, f_s_hz, omega_base, sign)?;
        Ok(Self {
            params,
            f_s_hz,
            omega_base,
            sign,
            model,
        })
    }

    /// A synthetic instance wrapping a bare model; load events cannot be
    /// applied to it because there are no component values to rebuild from.
    pub fn synthetic(model: SystemModel) -> Self {
        let params = ConverterParams {
            l: 1.0,
            c: 1.0,
            r_l: 1.0,
            r: 1.0,
            v_s: 1.0,
            unit_system: UnitSystem::PerUnit,
        };
        Self {
            params,
            f_s_hz: 1.0 / model.t_sample_s,
            omega_base: 1.0,
            sign: Eq39Sign::HurwitzFixed,
            model,
        }
    }

    /// Rebuild the discrete plant with the load resistance scaled to
    /// `factor * R_nominal`. Controller gains are unaffected.
    pub fn rebuild_with_load_scale(&self, factor: f64) -> Result<SystemModel> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Parameter(format!(
                "load scale factor must be positive, got {factor}"
            )));
        }
        let mut scaled = self.params;
        scaled.r = factor * self.params.r;
        discretize_plant_with(&scaled, self.f_s_hz, self.omega_base, self.sign)
    }
}

/// Nominal per-unit design (the shipped presets' converter column).
pub fn nominal_per_unit() -> ConverterParams {
    ConverterParams {
        l: 27.9,
        c: 497.0,
        r_l: 0.17,
        r: 1.0,
        v_s: 1.0,
        unit_system: UnitSystem::PerUnit,
    }
}

/// Nominal SI design matching [`nominal_per_unit`] under the default bases.
pub fn nominal_si() -> ConverterParams {
    ConverterParams {
        l: 1e-3,
        c: 220e-6,
        r_l: 1.5,
        r: 9.0,
        v_s: 20.0,
        unit_system: UnitSystem::Si,
    }
}

/// Bases reconciling the two nominal parameter sets.
pub fn nominal_bases() -> PerUnitBases {
    PerUnitBases {
        v_base: 20.0,
        z_base: 9.0,
        omega_base: DEFAULT_OMEGA_BASE,
    }
}
