//! Scattered-field engine: load models, port currents, and pattern
//! superposition.
//!
//! Given a [`PortNetwork`], a per-port load assignment and an incident
//! wave, the engine solves (Z + Z_L) i = -v_oc and superposes the embedded
//! patterns, E_s = sum_m i_m E_m + E_oc.
//!
//! # Example
//!
//! ```
//! use ris_core::field::AngleGrid;
//! use ris_core::oracle::{synthesize_network, ArraySpec, IncidentWave};
//! use ris_core::engine::{scattered_pattern, LoadModel};
//!
//! let grid = AngleGrid::theta_sweep(-90.0, 90.0, 1.0, &[0.0]).unwrap();
//! let spec = ArraySpec::new(2, 2, 5.35e-3, 28e9);
//! let net = synthesize_network(&spec, &grid).unwrap();
//! let states = vec![LoadModel::OneBitShifter { state: 0 }; 4];
//! let wave = IncidentWave::new(0.0, 0.0, 28e9);
//! let result = scattered_pattern(&net, &states, &wave).unwrap();
//! assert_eq!(result.currents.len(), 4);
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RisError};
use crate::field::ComplexPattern;
use crate::linalg::{condition_estimate, lu_factor};
use crate::oracle::{IncidentWave, PortNetwork};

/// Reference impedance used for reflection-coefficient conversions.
pub const REFERENCE_IMPEDANCE_OHM: f64 = 50.0;
/// Impedance standing in for an ideal open circuit; keeps the port count
/// fixed across states so patterns stay comparable.
pub const OPEN_IMPEDANCE_OHM: f64 = 1e9;
/// PIN diode forward resistance.
pub const DIODE_ON_OHM: f64 = 1.0;
/// Condition-number ceiling for the loaded-network solve.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Measured 1-bit shifter reflection: state 0 is -2.2 dB at 0 degrees,
/// state 1 is -1 dB at 180 degrees.
const SHIFTER_STATE0_DB: f64 = -2.2;
const SHIFTER_STATE1_DB: f64 = -1.0;

/// Termination attached to one internal port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LoadModel {
    Open,
    Short,
    Impedance { re: f64, im: f64 },
    /// Reflective 1-bit phase shifter; `state` is 0 or 1.
    OneBitShifter { state: u8 },
    DiodeSwitch { on: bool },
}

impl LoadModel {
    pub fn impedance_ohm(&self) -> Complex64 {
        match *self {
            LoadModel::Open => Complex64::new(OPEN_IMPEDANCE_OHM, 0.0),
            LoadModel::Short => Complex64::new(0.0, 0.0),
            LoadModel::Impedance { re, im } => Complex64::new(re, im),
            LoadModel::OneBitShifter { state } => {
                let gamma = shifter_reflection(state);
                reflection_to_impedance(gamma)
            }
            LoadModel::DiodeSwitch { on } => {
                if on {
                    Complex64::new(DIODE_ON_OHM, 0.0)
                } else {
                    Complex64::new(OPEN_IMPEDANCE_OHM, 0.0)
                }
            }
        }
    }

    pub fn from_impedance(z: Complex64) -> Self {
        LoadModel::Impedance { re: z.re, im: z.im }
    }
}

/// Reflection coefficient of the 1-bit shifter in a given state.
pub fn shifter_reflection(state: u8) -> Complex64 {
    match state {
        0 => Complex64::from_polar(10f64.powf(SHIFTER_STATE0_DB / 20.0), 0.0),
        _ => Complex64::from_polar(10f64.powf(SHIFTER_STATE1_DB / 20.0), std::f64::consts::PI),
    }
}

/// Z = Z0 (1 + gamma) / (1 - gamma). A reflection within 1e-12 of +1 maps
/// to the open-circuit stand-in impedance.
pub fn reflection_to_impedance(gamma: Complex64) -> Complex64 {
    let denom = Complex64::new(1.0, 0.0) - gamma;
    if denom.norm() < 1e-12 {
        return Complex64::new(OPEN_IMPEDANCE_OHM, 0.0);
    }
    Complex64::new(REFERENCE_IMPEDANCE_OHM, 0.0) * (Complex64::new(1.0, 0.0) + gamma) / denom
}

/// Load for a reflective element with the given reflection coefficient.
pub fn reflective_load(gamma: Complex64) -> LoadModel {
    LoadModel::from_impedance(reflection_to_impedance(gamma))
}

/// Gamma = (Z - Z0) / (Z + Z0) of a load against the 50-ohm reference.
pub fn load_reflection(load: &LoadModel) -> Complex64 {
    let z = load.impedance_ohm();
    let z0 = Complex64::new(REFERENCE_IMPEDANCE_OHM, 0.0);
    (z - z0) / (z + z0)
}

/// The same load with its reflection coefficient rotated by a fixed
/// phase, as a mounting offset (element rotation or depth stagger) would
/// do.
pub fn rotated_load(load: &LoadModel, offset_deg: f64) -> LoadModel {
    if offset_deg == 0.0 {
        return *load;
    }
    let gamma = load_reflection(load) * Complex64::from_polar(1.0, offset_deg.to_radians());
    reflective_load(gamma)
}

/// Diagonal of Z_L for a state vector.
pub fn load_matrix(states: &[LoadModel]) -> Vec<Complex64> {
    states.iter().map(|s| s.impedance_ohm()).collect()
}

/// Solve (Z + Z_L) i = -v_oc by LU with partial pivoting.
///
/// Refuses systems whose estimated 1-norm condition number exceeds
/// [`CONDITION_LIMIT`].
pub fn port_currents(
    net: &PortNetwork,
    zl_diag: &[Complex64],
    v_oc: &[Complex64],
) -> Result<Vec<Complex64>> {
    let m = net.num_ports();
    if zl_diag.len() != m || v_oc.len() != m {
        return Err(RisError::DimensionMismatch(format!(
            "network has {m} ports, loads {} and voltages {}",
            zl_diag.len(),
            v_oc.len()
        )));
    }
    let mut a = net.z().clone();
    for (i, zl) in zl_diag.iter().enumerate() {
        a[(i, i)] += zl;
    }
    let lu = lu_factor(&a)?;
    let cond = condition_estimate(&a, &lu);
    if !cond.is_finite() || cond > CONDITION_LIMIT {
        return Err(RisError::SingularNetwork { condition: cond });
    }
    let neg_v: Vec<Complex64> = v_oc.iter().map(|v| -v).collect();
    Ok(lu.solve(&neg_v))
}

/// Port currents plus the superposed far-field pattern.
#[derive(Debug, Clone)]
pub struct ScatterResult {
    pub currents: Vec<Complex64>,
    pub pattern: ComplexPattern,
}

/// Full scattered pattern for a state vector under an incident wave.
pub fn scattered_pattern(
    net: &PortNetwork,
    states: &[LoadModel],
    wave: &IncidentWave,
) -> Result<ScatterResult> {
    let currents = currents_for_states(net, states, wave)?;
    let grid = net.grid().clone();
    let mut values: Vec<Complex64> = net.oc_pattern().values().to_vec();
    for (m, pattern) in net.port_patterns().iter().enumerate() {
        let im = currents[m];
        for (acc, pv) in values.iter_mut().zip(pattern.values()) {
            *acc += im * pv;
        }
    }
    Ok(ScatterResult {
        currents,
        pattern: ComplexPattern::new(grid, values)?,
    })
}

/// Currents excited by `wave` with the given loads attached.
pub fn currents_for_states(
    net: &PortNetwork,
    states: &[LoadModel],
    wave: &IncidentWave,
) -> Result<Vec<Complex64>> {
    if states.len() != net.num_ports() {
        return Err(RisError::DimensionMismatch(format!(
            "state vector length {} vs {} ports",
            states.len(),
            net.num_ports()
        )));
    }
    let v_oc = net.open_circuit_voltages(wave)?;
    port_currents(net, &load_matrix(states), &v_oc)
}

/// Scattered field evaluated only at the given directions.
///
/// Uses the same analytic embedded-pattern formula the synthesized grids
/// were sampled from, so grid-point evaluations agree with
/// [`scattered_pattern`] exactly. A nonzero open-circuit pattern restricts
/// directions to grid points.
pub fn scattered_field_at(
    net: &PortNetwork,
    states: &[LoadModel],
    wave: &IncidentWave,
    directions: &[(f64, f64)],
) -> Result<Vec<Complex64>> {
    let currents = currents_for_states(net, states, wave)?;
    field_from_currents(net, &currents, directions)
}

/// Superpose an explicit current vector at the given directions.
pub fn field_from_currents(
    net: &PortNetwork,
    currents: &[Complex64],
    directions: &[(f64, f64)],
) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(directions.len());
    for &(theta, phi) in directions {
        let mut acc = net.oc_field_at(theta, phi)?;
        for m in 0..net.num_ports() {
            acc += currents[m] * net.port_field_at(m, theta, phi);
        }
        out.push(acc);
    }
    Ok(out)
}

// ── state-vector JSON interchange ───────────────────────────────────────

pub fn write_states_json<W: std::io::Write>(w: W, states: &[LoadModel]) -> Result<()> {
    serde_json::to_writer_pretty(w, states)
        .map_err(|e| RisError::Parse(format!("state serialization failed: {e}")))
}

pub fn read_states_json<R: std::io::BufRead>(r: R) -> Result<Vec<LoadModel>> {
    serde_json::from_reader(r).map_err(|e| RisError::Parse(format!("state json: {e}")))
}

/// Currents JSON export: one (re, im) pair per port.
pub fn write_currents_json<W: std::io::Write>(w: W, currents: &[Complex64]) -> Result<()> {
    let pairs: Vec<(f64, f64)> = currents.iter().map(|c| (c.re, c.im)).collect();
    serde_json::to_writer_pretty(w, &pairs)
        .map_err(|e| RisError::Parse(format!("current serialization failed: {e}")))
}
