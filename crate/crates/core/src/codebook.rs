//! Discrete beam-steering state search: an ideal conjugate phase profile,
//! nearest-phase quantization against the element's available states, and
//! greedy single-flip refinement on the actual scattered field.
//!
//! An exhaustive search over all state combinations is hopeless for real
//! apertures (two states on 64 elements is already 2^64), so steering uses
//! this two-stage search instead.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::engine::{reflective_load, scattered_pattern, LoadModel};
use crate::error::{Result, RisError};
use crate::field::{pattern_metrics, PatternMetrics};
use crate::oracle::{IncidentWave, PortNetwork};

/// Where the beam should go and what illuminates the surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringTarget {
    pub beam_theta_deg: f64,
    pub beam_phi_deg: f64,
    pub incident: IncidentWave,
}

/// The discrete states one element can take: a reflection phase per state
/// and the load realizing it.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementStateTable {
    phases_deg: Vec<f64>,
    loads: Vec<LoadModel>,
}

impl ElementStateTable {
    pub fn new(phases_deg: Vec<f64>, loads: Vec<LoadModel>) -> Result<Self> {
        if phases_deg.is_empty() || phases_deg.len() != loads.len() {
            return Err(RisError::EmptyPhaseTable);
        }
        Ok(Self { phases_deg, loads })
    }

    /// The measured 1-bit phase shifter: state 0 reflects at 0 degrees,
    /// state 1 at 180 degrees.
    pub fn one_bit_shifter() -> Self {
        Self {
            phases_deg: vec![0.0, 180.0],
            loads: vec![
                LoadModel::OneBitShifter { state: 0 },
                LoadModel::OneBitShifter { state: 1 },
            ],
        }
    }

    /// Ideal full-reflection binary element: open (+1) and short (-1).
    pub fn ideal_binary() -> Self {
        Self {
            phases_deg: vec![0.0, 180.0],
            loads: vec![LoadModel::Open, LoadModel::Short],
        }
    }

    /// Build reflective loads realizing the given phases with a common
    /// reflection magnitude.
    pub fn from_phases(phases_deg: &[f64], magnitude: f64) -> Result<Self> {
        if phases_deg.is_empty() {
            return Err(RisError::EmptyPhaseTable);
        }
        if !(0.0..=1.0).contains(&magnitude) {
            return Err(RisError::InvalidInput(
                "reflection magnitude outside [0, 1]".into(),
            ));
        }
        let loads = phases_deg
            .iter()
            .map(|&p| reflective_load(Complex64::from_polar(magnitude, p.to_radians())))
            .collect();
        Ok(Self {
            phases_deg: phases_deg.to_vec(),
            loads,
        })
    }

    pub fn len(&self) -> usize {
        self.loads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loads.is_empty()
    }

    pub fn phases_deg(&self) -> &[f64] {
        &self.phases_deg
    }

    pub fn load(&self, state: usize) -> LoadModel {
        self.loads[state]
    }

    pub fn loads_for(&self, states: &[usize]) -> Vec<LoadModel> {
        states.iter().map(|&s| self.loads[s]).collect()
    }
}

/// A per-element state assignment with the metrics it achieved.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SteeringCodebook {
    pub states: Vec<usize>,
    pub metrics: PatternMetrics,
    /// |E_s| at the steering target.
    pub achieved_target_magnitude: f64,
    pub method: String,
    /// Single-element flips accepted during refinement.
    pub accepted_flips: usize,
}

/// Continuous conjugate phase profile in degrees, one entry per element.
///
/// phi_n = -k r_n . (u_beam + u_inc) folded into [0, 360): the phase each
/// element must add so the incident-path delay and the outgoing path to
/// the target cancel. At the specular direction the profile is uniform.
pub fn ideal_phase_profile(
    target: &SteeringTarget,
    positions: &[(f64, f64)],
    frequency_hz: f64,
) -> Vec<f64> {
    let k = 2.0 * std::f64::consts::PI * frequency_hz / crate::oracle::SPEED_OF_LIGHT;
    let u = |theta: f64, phi: f64| {
        let st = theta.to_radians().sin();
        (st * phi.to_radians().cos(), st * phi.to_radians().sin())
    };
    let (bx, by) = u(target.beam_theta_deg, target.beam_phi_deg);
    let (ix, iy) = u(target.incident.theta_deg, target.incident.phi_deg);
    positions
        .iter()
        .map(|&(x, y)| {
            let phase = -k * (x * (bx + ix) + y * (by + iy));
            phase.to_degrees().rem_euclid(360.0)
        })
        .collect()
}

/// Shortest angular distance between two phases in degrees.
fn wrapped_distance_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Nearest available state per element; ties pick the lower state index.
pub fn quantize_states(profile: &[f64], table: &ElementStateTable) -> Result<Vec<usize>> {
    if table.is_empty() {
        return Err(RisError::EmptyPhaseTable);
    }
    Ok(profile
        .iter()
        .map(|&ideal| {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (s, &p) in table.phases_deg.iter().enumerate() {
                let d = wrapped_distance_deg(p, ideal);
                if d < best_d {
                    best_d = d;
                    best = s;
                }
            }
            best
        })
        .collect())
}

/// Search controls for the quantize-and-refine pipeline.
#[derive(Debug, Clone, Default)]
pub struct SteeringOptions {
    /// Accepted single-element flips allowed during refinement.
    pub refine_budget: usize,
    /// Fixed per-element mounting phase offsets in degrees (sequential
    /// rotation layouts); empty table-relative phases when None.
    pub base_offsets_deg: Option<Vec<f64>>,
}

impl SteeringOptions {
    pub fn with_budget(refine_budget: usize) -> Self {
        Self {
            refine_budget,
            base_offsets_deg: None,
        }
    }

    fn offsets_for(&self, n: usize) -> Result<Vec<f64>> {
        match &self.base_offsets_deg {
            Some(v) if v.len() != n => Err(RisError::DimensionMismatch(format!(
                "{} base offsets for {n} elements",
                v.len()
            ))),
            Some(v) => Ok(v.clone()),
            None => Ok(vec![0.0; n]),
        }
    }
}

/// Loads realizing a state assignment, with per-element mounting offsets
/// applied as reflection-coefficient rotations.
pub fn realized_loads(
    table: &ElementStateTable,
    states: &[usize],
    options: &SteeringOptions,
) -> Result<Vec<LoadModel>> {
    let offsets = options.offsets_for(states.len())?;
    Ok(realize(table, states, &offsets))
}

fn realize(table: &ElementStateTable, states: &[usize], offsets: &[f64]) -> Vec<LoadModel> {
    states
        .iter()
        .zip(offsets)
        .map(|(&s, &o)| crate::engine::rotated_load(&table.loads[s], o))
        .collect()
}

/// |E_s|^2 at the target for a state assignment.
fn target_power(
    net: &PortNetwork,
    table: &ElementStateTable,
    states: &[usize],
    offsets: &[f64],
    target: &SteeringTarget,
) -> Result<f64> {
    let loads = realize(table, states, offsets);
    let field = crate::engine::scattered_field_at(
        net,
        &loads,
        &target.incident,
        &[(target.beam_theta_deg, target.beam_phi_deg)],
    )?[0];
    Ok(field.norm_sqr())
}

/// Greedy coordinate ascent on |E_s(target)|^2 by single-element state
/// flips. Each accepted flip strictly increases the objective; stops at a
/// local optimum or when `budget` accepted flips have been spent. Metrics
/// cover the full pattern of the final assignment.
pub fn refine_codebook(
    net: &PortNetwork,
    table: &ElementStateTable,
    initial: Vec<usize>,
    target: &SteeringTarget,
    budget: usize,
    base_offsets_deg: Option<&[f64]>,
) -> Result<SteeringCodebook> {
    if initial.len() != net.num_ports() {
        return Err(RisError::DimensionMismatch(format!(
            "{} states for {} ports",
            initial.len(),
            net.num_ports()
        )));
    }
    if let Some(&bad) = initial.iter().find(|&&s| s >= table.len()) {
        return Err(RisError::InvalidInput(format!(
            "state index {bad} out of range for a {}-state table",
            table.len()
        )));
    }
    let offsets = match base_offsets_deg {
        Some(v) => {
            if v.len() != initial.len() {
                return Err(RisError::DimensionMismatch(format!(
                    "{} base offsets for {} elements",
                    v.len(),
                    initial.len()
                )));
            }
            v.to_vec()
        }
        None => vec![0.0; initial.len()],
    };
    let mut states = initial;
    let mut power = target_power(net, table, &states, &offsets, target)?;
    let mut accepted = 0usize;

    while accepted < budget {
        let mut best_flip: Option<(usize, usize, f64)> = None;
        for e in 0..states.len() {
            let original = states[e];
            for s in 0..table.len() {
                if s == original {
                    continue;
                }
                states[e] = s;
                let p = target_power(net, table, &states, &offsets, target)?;
                if p > power && best_flip.map_or(true, |(_, _, bp)| p > bp) {
                    best_flip = Some((e, s, p));
                }
            }
            states[e] = original;
        }
        match best_flip {
            Some((e, s, p)) => {
                states[e] = s;
                power = p;
                accepted += 1;
            }
            None => break,
        }
    }

    let loads = realize(table, &states, &offsets);
    let result = scattered_pattern(net, &loads, &target.incident)?;
    let metrics = pattern_metrics(&result.pattern, target.beam_phi_deg)?;
    Ok(SteeringCodebook {
        states,
        metrics,
        achieved_target_magnitude: power.sqrt(),
        method: "quantize+greedy".into(),
        accepted_flips: accepted,
    })
}

/// Quantize-then-refine for one target. Each element quantizes against
/// the ideal profile minus its mounting offset.
pub fn steer(
    net: &PortNetwork,
    table: &ElementStateTable,
    target: &SteeringTarget,
    options: &SteeringOptions,
) -> Result<SteeringCodebook> {
    let offsets = options.offsets_for(net.num_ports())?;
    let profile = ideal_phase_profile(target, net.port_positions(), net.frequency_hz());
    let shifted: Vec<f64> = profile
        .iter()
        .zip(&offsets)
        .map(|(p, o)| (p - o).rem_euclid(360.0))
        .collect();
    let initial = quantize_states(&shifted, table)?;
    refine_codebook(net, table, initial, target, options.refine_budget, Some(&offsets))
}

/// One row of a steering-range report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SteeringRow {
    pub target_theta_deg: f64,
    pub achieved_theta_deg: f64,
    pub pointing_error_deg: f64,
    pub sidelobe_level_db: f64,
    /// Achieved target-field level relative to the best row, dB.
    pub peak_rel_db: f64,
}

/// Steer to every target on the cut and report pointing error and
/// sidelobe level per target.
pub fn steering_report(
    net: &PortNetwork,
    table: &ElementStateTable,
    target_thetas_deg: &[f64],
    incident: &IncidentWave,
    options: &SteeringOptions,
) -> Result<Vec<SteeringRow>> {
    let mut rows = Vec::with_capacity(target_thetas_deg.len());
    let mut peaks = Vec::with_capacity(target_thetas_deg.len());
    for &theta in target_thetas_deg {
        let target = SteeringTarget {
            beam_theta_deg: theta,
            beam_phi_deg: 0.0,
            incident: *incident,
        };
        let book = steer(net, table, &target, options)?;
        peaks.push(book.achieved_target_magnitude);
        rows.push(SteeringRow {
            target_theta_deg: theta,
            achieved_theta_deg: book.metrics.peak_theta_deg,
            pointing_error_deg: (book.metrics.peak_theta_deg - theta).abs(),
            sidelobe_level_db: book.metrics.sidelobe_level_db,
            peak_rel_db: 0.0,
        });
    }
    let best = peaks.iter().copied().fold(0.0, f64::max);
    for (row, peak) in rows.iter_mut().zip(&peaks) {
        row.peak_rel_db = if *peak > 0.0 && best > 0.0 {
            20.0 * (peak / best).log10()
        } else {
            crate::field::DB_FLOOR
        };
    }
    Ok(rows)
}

pub fn write_report_csv<W: std::io::Write>(mut w: W, rows: &[SteeringRow]) -> Result<()> {
    writeln!(
        w,
        "target_theta,achieved_theta,pointing_error,sll_db,peak_rel_db"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.target_theta_deg,
            r.achieved_theta_deg,
            r.pointing_error_deg,
            r.sidelobe_level_db,
            r.peak_rel_db
        )?;
    }
    Ok(())
}

pub fn write_codebook_json<W: std::io::Write>(w: W, book: &SteeringCodebook) -> Result<()> {
    serde_json::to_writer_pretty(w, book)
        .map_err(|e| RisError::Parse(format!("codebook serialization failed: {e}")))
}

/// Sum of per-element attainable contributions at the target: the upper
/// bound a continuous-phase unit-reflection aperture could reach. Used to
/// check the classic binary-quantization gain factor.
pub fn continuous_phase_bound(
    net: &PortNetwork,
    incident: &IncidentWave,
    target: (f64, f64),
    z0_ohm: f64,
) -> Result<f64> {
    let v = net.open_circuit_voltages(incident)?;
    let mut bound = 0.0;
    for m in 0..net.num_ports() {
        bound += v[m].norm() * net.port_field_at(m, target.0, target.1).norm() / (2.0 * z0_ohm);
    }
    Ok(bound)
}
