//! Synthetic desk-scale electromagnetics: array geometry, per-port
//! embedded patterns, a reciprocal coupling impedance matrix, and
//! plane-wave open-circuit voltages.
//!
//! This stands in for a full-wave solver. The coupling model is a
//! phase-retarded exponential decay chosen because it is passive-checkable,
//! monotone in distance, and produces a non-trivial solve; it makes no
//! claim to match any particular hardware.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

use crate::error::{Result, RisError};
use crate::field::{AngleGrid, ComplexPattern};
use crate::linalg::{sym_eigenvalues, CMatrix};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Tolerance factors for the reciprocity and passivity checks.
const SYMMETRY_TOL: f64 = 1e-9;
const PASSIVITY_TOL: f64 = 1e-9;

/// Rectangular array description for the synthetic oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    pub rows: usize,
    pub cols: usize,
    /// Element spacing in meters.
    pub spacing_m: f64,
    pub frequency_hz: f64,
    /// Element factor exponent q in cos^q(theta).
    pub element_exponent_q: f64,
    /// Per-port self impedance in ohms (re, im).
    pub self_impedance: (f64, f64),
    /// Dimensionless mutual-coupling strength (0 disables coupling).
    pub coupling_strength: f64,
    /// Coupling decay rate in 1/m.
    pub coupling_decay_per_m: f64,
}

impl ArraySpec {
    pub fn new(rows: usize, cols: usize, spacing_m: f64, frequency_hz: f64) -> Self {
        Self {
            rows,
            cols,
            spacing_m,
            frequency_hz,
            element_exponent_q: 1.0,
            self_impedance: (50.0, 0.0),
            coupling_strength: 0.1,
            coupling_decay_per_m: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows * self.cols == 0 {
            return Err(RisError::InvalidInput("array needs at least one element".into()));
        }
        if self.spacing_m <= 0.0 || self.frequency_hz <= 0.0 {
            return Err(RisError::InvalidInput(
                "spacing and frequency must be positive".into(),
            ));
        }
        if self.element_exponent_q < 0.0 {
            return Err(RisError::InvalidInput("element exponent must be >= 0".into()));
        }
        Ok(())
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.frequency_hz / SPEED_OF_LIGHT
    }

    /// Element (x, y) positions in meters, row-major, centered on the origin.
    pub fn positions(&self) -> Vec<(f64, f64)> {
        let cx = (self.cols as f64 - 1.0) / 2.0;
        let cy = (self.rows as f64 - 1.0) / 2.0;
        let mut out = Vec::with_capacity(self.rows * self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push((
                    (c as f64 - cx) * self.spacing_m,
                    (r as f64 - cy) * self.spacing_m,
                ));
            }
        }
        out
    }
}

/// Incident plane wave, identified by the direction it arrives from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncidentWave {
    pub theta_deg: f64,
    pub phi_deg: f64,
    /// Complex amplitude (re, im).
    pub amplitude: (f64, f64),
    pub frequency_hz: f64,
}

impl IncidentWave {
    pub fn new(theta_deg: f64, phi_deg: f64, frequency_hz: f64) -> Self {
        Self {
            theta_deg,
            phi_deg,
            amplitude: (1.0, 0.0),
            frequency_hz,
        }
    }

    pub fn amplitude_c(&self) -> Complex64 {
        Complex64::new(self.amplitude.0, self.amplitude.1)
    }
}

/// Multiport scattering description: coupling impedances, port positions,
/// embedded per-port patterns and the all-ports-open pattern.
#[derive(Debug, Clone)]
pub struct PortNetwork {
    z: CMatrix,
    port_positions: Vec<(f64, f64)>,
    port_patterns: Vec<ComplexPattern>,
    oc_pattern: ComplexPattern,
    frequency_hz: f64,
    element_exponent_q: f64,
}

/// Direction cosines (u_x, u_y) for angles in degrees.
fn direction_cosines(theta_deg: f64, phi_deg: f64) -> (f64, f64) {
    let st = theta_deg.to_radians().sin();
    let ph = phi_deg.to_radians();
    (st * ph.cos(), st * ph.sin())
}

fn element_factor(theta_deg: f64, q: f64) -> f64 {
    let c = theta_deg.to_radians().cos();
    if q == 0.0 {
        1.0
    } else {
        c.max(0.0).powf(q)
    }
}

/// Embedded pattern value of a port at (x, y): cos^q(theta) with the
/// geometric phase advance of the port position.
fn port_field(
    k: f64,
    q: f64,
    pos: (f64, f64),
    theta_deg: f64,
    phi_deg: f64,
) -> Complex64 {
    let (ux, uy) = direction_cosines(theta_deg, phi_deg);
    let phase = k * (pos.0 * ux + pos.1 * uy);
    Complex64::from_polar(element_factor(theta_deg, q), phase)
}

/// Build the synthetic coupling impedance matrix for ports at `positions`.
///
/// Z_mn = strength * Z_self * exp(-decay d) * exp(-j k d) / max(k d, 1)
/// for m != n, symmetrized; the diagonal carries the self impedance.
fn coupling_matrix(
    positions: &[(f64, f64)],
    k: f64,
    self_impedance: Complex64,
    strength: f64,
    decay: f64,
) -> CMatrix {
    let m = positions.len();
    let mut z = CMatrix::zeros(m);
    for i in 0..m {
        z[(i, i)] = self_impedance;
        for j in (i + 1)..m {
            let dx = positions[i].0 - positions[j].0;
            let dy = positions[i].1 - positions[j].1;
            let d = (dx * dx + dy * dy).sqrt();
            let kd = k * d;
            let mutual = self_impedance
                * Complex64::from_polar((-decay * d).exp() * strength / kd.max(1.0), -kd);
            z[(i, j)] = mutual;
            z[(j, i)] = mutual;
        }
    }
    z.symmetrized()
}

/// Synthesize a network for ports on an arbitrary planar layout.
pub fn synthesize_network_at(
    positions: Vec<(f64, f64)>,
    frequency_hz: f64,
    element_exponent_q: f64,
    self_impedance: Complex64,
    coupling_strength: f64,
    coupling_decay_per_m: f64,
    grid: &AngleGrid,
) -> Result<PortNetwork> {
    if positions.is_empty() {
        return Err(RisError::InvalidInput("network needs at least one port".into()));
    }
    let k = 2.0 * std::f64::consts::PI * frequency_hz / SPEED_OF_LIGHT;
    let z = coupling_matrix(
        &positions,
        k,
        self_impedance,
        coupling_strength,
        coupling_decay_per_m,
    );

    // Passivity: Re(Z) must be positive semidefinite.
    let eigenvalues = sym_eigenvalues(&z.real_part());
    let smallest = eigenvalues.first().copied().unwrap_or(0.0);
    if smallest < -PASSIVITY_TOL * z.max_abs() {
        return Err(RisError::NonPassiveNetwork { eigenvalue: smallest });
    }

    let port_patterns: Vec<ComplexPattern> = positions
        .iter()
        .map(|&pos| {
            let mut values = Vec::with_capacity(grid.len());
            for &t in grid.theta_samples() {
                for &p in grid.phi_samples() {
                    values.push(port_field(k, element_exponent_q, pos, t, p));
                }
            }
            ComplexPattern::new(grid.clone(), values)
        })
        .collect::<Result<_>>()?;

    Ok(PortNetwork {
        z,
        port_positions: positions,
        port_patterns,
        oc_pattern: ComplexPattern::zero(grid.clone()),
        frequency_hz,
        element_exponent_q,
    })
}

/// Synthesize the network for a rectangular array.
pub fn synthesize_network(spec: &ArraySpec, grid: &AngleGrid) -> Result<PortNetwork> {
    spec.validate()?;
    synthesize_network_at(
        spec.positions(),
        spec.frequency_hz,
        spec.element_exponent_q,
        Complex64::new(spec.self_impedance.0, spec.self_impedance.1),
        spec.coupling_strength,
        spec.coupling_decay_per_m,
        grid,
    )
}

impl PortNetwork {
    /// Assemble a network from an explicit impedance matrix; the embedded
    /// patterns are synthesized analytically from the port positions.
    pub fn from_parts(
        z: CMatrix,
        port_positions: Vec<(f64, f64)>,
        frequency_hz: f64,
        element_exponent_q: f64,
        grid: &AngleGrid,
    ) -> Result<Self> {
        if z.n() != port_positions.len() {
            return Err(RisError::DimensionMismatch(format!(
                "impedance matrix is {}x{} but there are {} ports",
                z.n(),
                z.n(),
                port_positions.len()
            )));
        }
        let k = 2.0 * std::f64::consts::PI * frequency_hz / SPEED_OF_LIGHT;
        let port_patterns: Vec<ComplexPattern> = port_positions
            .iter()
            .map(|&pos| {
                let mut values = Vec::with_capacity(grid.len());
                for &t in grid.theta_samples() {
                    for &p in grid.phi_samples() {
                        values.push(port_field(k, element_exponent_q, pos, t, p));
                    }
                }
                ComplexPattern::new(grid.clone(), values)
            })
            .collect::<Result<_>>()?;
        let net = Self {
            z,
            port_positions,
            port_patterns,
            oc_pattern: ComplexPattern::zero(grid.clone()),
            frequency_hz,
            element_exponent_q,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn num_ports(&self) -> usize {
        self.port_positions.len()
    }

    pub fn z(&self) -> &CMatrix {
        &self.z
    }

    pub fn port_positions(&self) -> &[(f64, f64)] {
        &self.port_positions
    }

    pub fn port_patterns(&self) -> &[ComplexPattern] {
        &self.port_patterns
    }

    pub fn oc_pattern(&self) -> &ComplexPattern {
        &self.oc_pattern
    }

    pub fn grid(&self) -> &AngleGrid {
        self.port_patterns[0].grid()
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }

    pub fn element_exponent_q(&self) -> f64 {
        self.element_exponent_q
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.frequency_hz / SPEED_OF_LIGHT
    }

    /// Replace the all-open pattern (zero by default) with a caller-supplied
    /// one on the same grid.
    pub fn with_oc_pattern(mut self, oc: ComplexPattern) -> Result<Self> {
        if oc.grid() != self.grid() {
            return Err(RisError::DimensionMismatch(
                "open-circuit pattern grid differs from network grid".into(),
            ));
        }
        self.oc_pattern = oc;
        Ok(self)
    }

    /// Reciprocity and passivity invariants; cheap enough to run after any
    /// hand construction.
    pub fn validate(&self) -> Result<()> {
        let scale = self.z.max_abs();
        if self.z.asymmetry() > SYMMETRY_TOL * scale {
            return Err(RisError::InvalidInput(
                "impedance matrix violates reciprocity".into(),
            ));
        }
        let eig = sym_eigenvalues(&self.z.real_part());
        let smallest = eig.first().copied().unwrap_or(0.0);
        if smallest < -PASSIVITY_TOL * scale {
            return Err(RisError::NonPassiveNetwork { eigenvalue: smallest });
        }
        Ok(())
    }

    /// Analytic embedded-pattern value of port `m` at any direction.
    ///
    /// Identical to the sampled pattern at grid points; used where the
    /// evaluation direction is not tied to the grid.
    pub fn port_field_at(&self, m: usize, theta_deg: f64, phi_deg: f64) -> Complex64 {
        port_field(
            self.wavenumber(),
            self.element_exponent_q,
            self.port_positions[m],
            theta_deg,
            phi_deg,
        )
    }

    /// Open-circuit pattern value at a direction; must be a grid point when
    /// the pattern is nonzero.
    pub fn oc_field_at(&self, theta_deg: f64, phi_deg: f64) -> Result<Complex64> {
        if self.oc_pattern.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let it = self.grid().theta_index_of(theta_deg);
        let ip = self.grid().phi_index_of(phi_deg);
        match (it, ip) {
            (Some(it), Some(ip)) => Ok(self.oc_pattern.value(it, ip)),
            _ => Err(RisError::InvalidInput(format!(
                "direction ({theta_deg}, {phi_deg}) not on grid; required for a nonzero open-circuit pattern"
            ))),
        }
    }

    /// Plane-wave open-circuit voltages.
    ///
    /// v_m = A cos^q(theta_inc) exp(+j k r_m . u_inc): the phase is the
    /// incoming wavefront's arrival phase at each port, so a uniform load
    /// distribution re-radiates into the specular direction.
    pub fn open_circuit_voltages(&self, wave: &IncidentWave) -> Result<Vec<Complex64>> {
        if !self.grid().contains_direction(wave.theta_deg, wave.phi_deg) {
            return Err(RisError::InvalidInput(format!(
                "incident direction ({}, {}) outside grid bounds",
                wave.theta_deg, wave.phi_deg
            )));
        }
        let k = self.wavenumber();
        let (ux, uy) = direction_cosines(wave.theta_deg, wave.phi_deg);
        let gain = element_factor(wave.theta_deg, self.element_exponent_q);
        Ok(self
            .port_positions
            .iter()
            .map(|&(x, y)| {
                wave.amplitude_c() * Complex64::from_polar(gain, k * (x * ux + y * uy))
            })
            .collect())
    }

    /// The matched-scatterer structural pattern sum v_m E_m / (2 Z0).
    ///
    /// Installing this as the open-circuit pattern makes each port's total
    /// re-radiation proportional to its load reflection coefficient when
    /// the self impedance equals `z0_ohm`, which is how a reflective
    /// phase-shifter element is normally abstracted.
    pub fn structural_oc_pattern(
        &self,
        wave: &IncidentWave,
        z0_ohm: f64,
    ) -> Result<ComplexPattern> {
        let v = self.open_circuit_voltages(wave)?;
        let grid = self.grid().clone();
        let scale = Complex64::new(1.0 / (2.0 * z0_ohm), 0.0);
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (m, pattern) in self.port_patterns.iter().enumerate() {
            let w = v[m] * scale;
            for (acc, pv) in values.iter_mut().zip(pattern.values()) {
                *acc += w * pv;
            }
        }
        ComplexPattern::new(grid, values)
    }
}

// ── JSON interchange ────────────────────────────────────────────────────

#[derive(Serialize, Deserialize)]
struct GridDto {
    theta_deg: Vec<f64>,
    phi_deg: Vec<f64>,
}

/// Network file layout: Z as row-major (re, im) pairs plus the geometry
/// needed to rebuild the analytic patterns.
#[derive(Serialize, Deserialize)]
struct NetworkDto {
    frequency_hz: f64,
    element_exponent_q: f64,
    grid: GridDto,
    port_positions: Vec<(f64, f64)>,
    z: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    oc_pattern: Option<Vec<(f64, f64)>>,
}

pub fn write_network_json<W: Write>(w: W, net: &PortNetwork) -> Result<()> {
    let dto = NetworkDto {
        frequency_hz: net.frequency_hz,
        element_exponent_q: net.element_exponent_q,
        grid: GridDto {
            theta_deg: net.grid().theta_samples().to_vec(),
            phi_deg: net.grid().phi_samples().to_vec(),
        },
        port_positions: net.port_positions.clone(),
        z: net.z.as_slice().iter().map(|c| (c.re, c.im)).collect(),
        oc_pattern: if net.oc_pattern.is_zero() {
            None
        } else {
            Some(net.oc_pattern.values().iter().map(|c| (c.re, c.im)).collect())
        },
    };
    serde_json::to_writer_pretty(w, &dto)
        .map_err(|e| RisError::Parse(format!("network serialization failed: {e}")))
}

pub fn read_network_json<R: BufRead>(r: R) -> Result<PortNetwork> {
    let dto: NetworkDto = serde_json::from_reader(r)
        .map_err(|e| RisError::Parse(format!("network json: {e}")))?;
    let grid = AngleGrid::new(dto.grid.theta_deg, dto.grid.phi_deg)?;
    let m = dto.port_positions.len();
    if dto.z.len() != m * m {
        return Err(RisError::Parse(format!(
            "z has {} entries, expected {}",
            dto.z.len(),
            m * m
        )));
    }
    let z = CMatrix::from_flat(
        m,
        dto.z.iter().map(|&(re, im)| Complex64::new(re, im)).collect(),
    )?;
    let net = PortNetwork::from_parts(
        z,
        dto.port_positions,
        dto.frequency_hz,
        dto.element_exponent_q,
        &grid,
    )?;
    match dto.oc_pattern {
        Some(vals) => {
            if vals.len() != grid.len() {
                return Err(RisError::Parse(
                    "oc_pattern length does not match grid".into(),
                ));
            }
            let oc = ComplexPattern::new(
                grid,
                vals.iter().map(|&(re, im)| Complex64::new(re, im)).collect(),
            )?;
            net.with_oc_pattern(oc)
        }
        None => Ok(net),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> AngleGrid {
        AngleGrid::theta_sweep(-90.0, 90.0, 5.0, &[0.0]).unwrap()
    }

    #[test]
    fn single_element_has_pure_element_factor() {
        let spec = ArraySpec {
            coupling_strength: 0.0,
            ..ArraySpec::new(1, 1, 5e-3, 28e9)
        };
        let net = synthesize_network(&spec, &small_grid()).unwrap();
        assert_eq!(net.num_ports(), 1);
        assert_eq!(net.z()[(0, 0)], Complex64::new(50.0, 0.0));
        let p = &net.port_patterns()[0];
        for (i, &t) in p.grid().theta_samples().iter().enumerate() {
            let expect = t.to_radians().cos().max(0.0);
            assert!((p.value(i, 0).norm() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_coupling_gives_diagonal_z() {
        let spec = ArraySpec {
            coupling_strength: 0.0,
            ..ArraySpec::new(2, 1, 5e-3, 28e9)
        };
        let net = synthesize_network(&spec, &small_grid()).unwrap();
        assert_eq!(net.z()[(0, 1)], Complex64::new(0.0, 0.0));
        assert_eq!(net.z()[(1, 0)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn half_wave_pair_mutual_magnitude() {
        // k d = pi, decay 0, strength 0.2 -> |Z01| = 0.2 |Z00| / pi.
        let f = 28e9;
        let lambda = SPEED_OF_LIGHT / f;
        let spec = ArraySpec {
            coupling_strength: 0.2,
            ..ArraySpec::new(2, 1, lambda / 2.0, f)
        };
        let net = synthesize_network(&spec, &small_grid()).unwrap();
        let expect = 0.2 * 50.0 / std::f64::consts::PI;
        assert!((net.z()[(0, 1)].norm() - expect).abs() < 1e-9);
    }

    #[test]
    fn excessive_coupling_is_rejected_as_non_passive() {
        let f = 28e9;
        let lambda = SPEED_OF_LIGHT / f;
        let spec = ArraySpec {
            coupling_strength: 10.0,
            ..ArraySpec::new(2, 2, lambda / 2.0, f)
        };
        match synthesize_network(&spec, &small_grid()) {
            Err(RisError::NonPassiveNetwork { eigenvalue }) => assert!(eigenvalue < 0.0),
            other => panic!("expected non-passive error, got {other:?}"),
        }
    }

    #[test]
    fn normal_incidence_voltages_are_unit() {
        let spec = ArraySpec::new(2, 2, 5e-3, 28e9);
        let net = synthesize_network(&spec, &small_grid()).unwrap();
        let v = net
            .open_circuit_voltages(&IncidentWave::new(0.0, 0.0, 28e9))
            .unwrap();
        for vm in v {
            assert!((vm - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn grazing_pair_has_opposite_phase() {
        // Two ports half a wavelength apart along x, incidence at theta=90:
        // arrival phases differ by exactly 180 degrees.
        let f = 28e9;
        let lambda = SPEED_OF_LIGHT / f;
        let spec = ArraySpec {
            coupling_strength: 0.0,
            ..ArraySpec::new(1, 2, lambda / 2.0, f)
        };
        let net = synthesize_network(&spec, &small_grid()).unwrap();
        let v = net
            .open_circuit_voltages(&IncidentWave::new(90.0, 0.0, f))
            .unwrap();
        let ratio = v[0] / v[1];
        let phase = ratio.arg().to_degrees().abs();
        assert!((phase - 180.0).abs() < 1e-9);
    }

    #[test]
    fn zero_amplitude_gives_zero_voltages() {
        let spec = ArraySpec::new(2, 2, 5e-3, 28e9);
        let net = synthesize_network(&spec, &small_grid()).unwrap();
        let wave = IncidentWave {
            amplitude: (0.0, 0.0),
            ..IncidentWave::new(30.0, 0.0, 28e9)
        };
        let v = net.open_circuit_voltages(&wave).unwrap();
        assert!(v.iter().all(|vm| vm.norm() == 0.0));
    }

    #[test]
    fn network_json_round_trip() {
        let spec = ArraySpec::new(2, 3, 5e-3, 28e9);
        let net = synthesize_network(&spec, &small_grid()).unwrap();
        let mut buf = Vec::new();
        write_network_json(&mut buf, &net).unwrap();
        let back = read_network_json(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back.num_ports(), net.num_ports());
        assert!(back
            .z()
            .as_slice()
            .iter()
            .zip(net.z().as_slice())
            .all(|(a, b)| (a - b).norm() < 1e-15));
        assert_eq!(back.port_patterns()[4], net.port_patterns()[4]);
    }
}
