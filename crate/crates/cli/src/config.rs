//! Experiment configuration: one JSON document drives every command.

use serde::Deserialize;
use std::path::PathBuf;

use num_complex::Complex64;
use ris_core::codebook::{ElementStateTable, SteeringOptions};
use ris_core::error::{Result, RisError};
use ris_core::field::AngleGrid;
use ris_core::oracle::{ArraySpec, IncidentWave};
use ris_core::topology::{EntropyObjectiveSpec, FeedingSpec, GaParams, PortIncidenceMatrix};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub band: Band,
    pub seed: u64,
    #[serde(default)]
    pub array: Option<ArrayConfig>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub incident: Option<IncidentConfig>,
    /// Attach the matched-scatterer structural pattern to the synthesized
    /// network.
    #[serde(default)]
    pub structural_oc: bool,
    #[serde(default = "default_z0")]
    pub structural_z0_ohm: f64,
    #[serde(default)]
    pub targets_theta_deg: Option<Vec<f64>>,
    #[serde(default)]
    pub element_states: Option<ElementStatesConfig>,
    #[serde(default)]
    pub refine_budget: usize,
    #[serde(default)]
    pub export_step_deg: Option<f64>,
    #[serde(default)]
    pub topology: Option<TopologyConfig>,
    #[serde(default)]
    pub ga: Option<GaConfig>,
    #[serde(default)]
    pub independence: Option<IndependenceConfig>,
    /// Load the scattering network from a file instead of synthesizing.
    #[serde(default)]
    pub network_file: Option<PathBuf>,
}

fn default_z0() -> f64 {
    50.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    Sub6,
    Mmwave,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub rows: usize,
    pub cols: usize,
    pub spacing_m: f64,
    pub frequency_hz: f64,
    #[serde(default = "default_q")]
    pub element_exponent_q: f64,
    #[serde(default = "default_self")]
    pub self_impedance: (f64, f64),
    #[serde(default = "default_coupling")]
    pub coupling_strength: f64,
    #[serde(default)]
    pub coupling_decay_per_m: f64,
}

fn default_q() -> f64 {
    1.0
}
fn default_self() -> (f64, f64) {
    (50.0, 0.0)
}
fn default_coupling() -> f64 {
    0.1
}

impl ArrayConfig {
    pub fn to_spec(&self) -> ArraySpec {
        ArraySpec {
            rows: self.rows,
            cols: self.cols,
            spacing_m: self.spacing_m,
            frequency_hz: self.frequency_hz,
            element_exponent_q: self.element_exponent_q,
            self_impedance: self.self_impedance,
            coupling_strength: self.coupling_strength,
            coupling_decay_per_m: self.coupling_decay_per_m,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub theta_start_deg: f64,
    pub theta_stop_deg: f64,
    pub theta_step_deg: f64,
    #[serde(default = "default_phi")]
    pub phi_deg: Vec<f64>,
}

fn default_phi() -> Vec<f64> {
    vec![0.0]
}

impl GridConfig {
    pub fn to_grid(&self) -> Result<AngleGrid> {
        AngleGrid::theta_sweep(
            self.theta_start_deg,
            self.theta_stop_deg,
            self.theta_step_deg,
            &self.phi_deg,
        )
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentConfig {
    pub theta_deg: f64,
    pub phi_deg: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: (f64, f64),
}

fn default_amplitude() -> (f64, f64) {
    (1.0, 0.0)
}

impl IncidentConfig {
    pub fn to_wave(&self, frequency_hz: f64) -> IncidentWave {
        IncidentWave {
            theta_deg: self.theta_deg,
            phi_deg: self.phi_deg,
            amplitude: self.amplitude,
            frequency_hz,
        }
    }
}

/// Per-element discrete state set for steering.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementStatesConfig {
    /// The measured 1-bit shifter (0 and 180 degrees).
    OneBitShifter {
        #[serde(default)]
        base_offsets: BaseOffsets,
    },
    /// Reflective states at explicit phases with a common magnitude.
    Phases {
        phases_deg: Vec<f64>,
        reflection_magnitude: f64,
        #[serde(default)]
        base_offsets: BaseOffsets,
    },
}

/// Fixed mounting offsets per element.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "snake_case", untagged)]
pub enum BaseOffsets {
    #[default]
    #[serde(skip)]
    None,
    Named(NamedOffsets),
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedOffsets {
    None,
    /// 2x2 super-cells cycling 0/90/180/270 degrees.
    Seq4,
    /// Alternating 0/180 checkerboard.
    Checker,
}

impl BaseOffsets {
    pub fn resolve(&self, rows: usize, cols: usize) -> Option<Vec<f64>> {
        match self {
            BaseOffsets::None | BaseOffsets::Named(NamedOffsets::None) => None,
            BaseOffsets::Named(NamedOffsets::Seq4) => Some(
                (0..rows * cols)
                    .map(|n| 90.0 * (((n / cols) % 2) * 2 + (n % cols) % 2) as f64)
                    .collect(),
            ),
            BaseOffsets::Named(NamedOffsets::Checker) => Some(
                (0..rows * cols)
                    .map(|n| if (n / cols + n % cols) % 2 == 0 { 0.0 } else { 180.0 })
                    .collect(),
            ),
            BaseOffsets::Explicit(v) => Some(v.clone()),
        }
    }
}

impl ElementStatesConfig {
    pub fn to_table(&self) -> Result<ElementStateTable> {
        match self {
            ElementStatesConfig::OneBitShifter { .. } => Ok(ElementStateTable::one_bit_shifter()),
            ElementStatesConfig::Phases {
                phases_deg,
                reflection_magnitude,
                ..
            } => ElementStateTable::from_phases(phases_deg, *reflection_magnitude),
        }
    }

    pub fn to_options(&self, rows: usize, cols: usize, refine_budget: usize) -> SteeringOptions {
        let offsets = match self {
            ElementStatesConfig::OneBitShifter { base_offsets }
            | ElementStatesConfig::Phases { base_offsets, .. } => {
                base_offsets.resolve(rows, cols)
            }
        };
        SteeringOptions {
            refine_budget,
            base_offsets_deg: offsets,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    pub rows: usize,
    pub cols: usize,
    pub q: usize,
    pub feeding: FeedingConfig,
    pub pitch_m: f64,
    #[serde(default = "default_topology_self")]
    pub self_impedance: (f64, f64),
    pub coupling_strength: f64,
    #[serde(default)]
    pub coupling_decay_per_m: f64,
    #[serde(default = "default_z0")]
    pub structural_z0_ohm: f64,
    pub objective: ObjectiveConfig,
    /// Observation direction for the reported reflection phases.
    #[serde(default)]
    pub observation_deg: (f64, f64),
}

fn default_topology_self() -> (f64, f64) {
    (40.0, 0.0)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedingConfig {
    pub ground: usize,
    pub controls: [usize; 3],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub angles_deg: Vec<(f64, f64)>,
    pub frequencies_hz: Vec<f64>,
}

impl TopologyConfig {
    pub fn incidence(&self) -> PortIncidenceMatrix {
        PortIncidenceMatrix::grid(self.rows, self.cols)
    }

    pub fn feeding_spec(&self) -> Result<FeedingSpec> {
        FeedingSpec::new(
            self.feeding.ground,
            self.feeding.controls,
            self.rows * self.cols,
        )
    }

    pub fn objective_spec(&self) -> EntropyObjectiveSpec {
        EntropyObjectiveSpec {
            angles_deg: self.objective.angles_deg.clone(),
            frequencies_hz: self.objective.frequencies_hz.clone(),
            weights: None,
        }
    }

    /// Gap-port midpoint positions for the element grid.
    pub fn port_positions(&self) -> Vec<(f64, f64)> {
        let incidence = self.incidence();
        let cc = (self.cols as f64 - 1.0) / 2.0;
        let cr = (self.rows as f64 - 1.0) / 2.0;
        let pos = |e: usize| {
            (
                ((e % self.cols) as f64 - cc) * self.pitch_m,
                ((e / self.cols) as f64 - cr) * self.pitch_m,
            )
        };
        incidence
            .pairs()
            .iter()
            .map(|&(a, b)| {
                let (xa, ya) = pos(a);
                let (xb, yb) = pos(b);
                ((xa + xb) / 2.0, (ya + yb) / 2.0)
            })
            .collect()
    }

    pub fn network(
        &self,
        frequency_hz: f64,
        grid: &AngleGrid,
    ) -> Result<ris_core::oracle::PortNetwork> {
        let net = ris_core::oracle::synthesize_network_at(
            self.port_positions(),
            frequency_hz,
            1.0,
            Complex64::new(self.self_impedance.0, self.self_impedance.1),
            self.coupling_strength,
            self.coupling_decay_per_m,
            grid,
        )?;
        let wave = IncidentWave::new(0.0, 0.0, frequency_hz);
        let oc = net.structural_oc_pattern(&wave, self.structural_z0_ohm)?;
        net.with_oc_pattern(oc)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    #[serde(default)]
    pub mutation_rate: Option<f64>,
    #[serde(default = "default_crossover")]
    pub crossover_rate: f64,
    #[serde(default = "default_tournament")]
    pub tournament: usize,
    #[serde(default = "default_init_budget")]
    pub init_resample_budget: usize,
}

fn default_crossover() -> f64 {
    0.9
}
fn default_tournament() -> usize {
    3
}
fn default_init_budget() -> usize {
    50
}

impl GaConfig {
    pub fn to_params(&self, seed: u64) -> GaParams {
        GaParams {
            population: self.population,
            generations: self.generations,
            mutation_rate: self.mutation_rate,
            crossover_rate: self.crossover_rate,
            tournament: self.tournament,
            seed,
            init_resample_budget: self.init_resample_budget,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndependenceConfig {
    /// Cross-band coupling injection; 0 keeps the bands decoupled.
    #[serde(default)]
    pub epsilon: f64,
    /// Number of low-band switch bits driving the injected detuning.
    #[serde(default = "default_sub6_bits")]
    pub sub6_state_bits: u32,
}

fn default_sub6_bits() -> u32 {
    3
}

pub fn load_config(path: &std::path::Path, seed_override: Option<u64>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut config: ExperimentConfig = serde_json::from_str(&text).map_err(|e| {
        RisError::Parse(format!(
            "{}: line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    if config.version != CONFIG_VERSION {
        return Err(RisError::InvalidInput(format!(
            "config version {} unsupported (expected {CONFIG_VERSION})",
            config.version
        )));
    }
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    Ok(config)
}
