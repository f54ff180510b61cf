//! Element-interconnection topology for the low-band element: geometry
//! vectors over internal ports, the DC-feeding connectivity constraint,
//! per-state reflection phases, and a constrained genetic algorithm that
//! maximizes mean phase entropy.
//!
//! Elements are indexed 0..N-1 and internal ports 0..M-1 throughout; a
//! port joins exactly one unordered pair of elements.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{currents_for_states, field_from_currents, LoadModel};
use crate::entropy::{entropy_bits, PhaseSet};
use crate::error::{Result, RisError};
use crate::oracle::{IncidentWave, PortNetwork};

/// Which endpoint of a port carries the diode anode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnodeSide {
    /// Anode on the lower-numbered element of the pair.
    First,
    /// Anode on the higher-numbered element of the pair.
    Second,
}

/// One RF switch: the port it sits on and its orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchGene {
    pub port: usize,
    pub anode_side: AnodeSide,
}

/// Mapping between indexed element pairs and internal port IDs.
///
/// Equivalent to an N x N symmetric matrix whose (n1, n2) entry names the
/// port joining those elements (or nothing); stored as the per-port pair
/// list with each pair canonicalized to (low, high).
#[derive(Debug, Clone, PartialEq)]
pub struct PortIncidenceMatrix {
    n_elements: usize,
    pairs: Vec<(usize, usize)>,
}

impl PortIncidenceMatrix {
    pub fn new(n_elements: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for &(a, b) in &pairs {
            if a == b {
                return Err(RisError::IncidenceMatrixInvalid(format!(
                    "port joins element {a} to itself"
                )));
            }
            if a >= n_elements || b >= n_elements {
                return Err(RisError::IncidenceMatrixInvalid(format!(
                    "pair ({a}, {b}) outside 0..{n_elements}"
                )));
            }
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                return Err(RisError::IncidenceMatrixInvalid(format!(
                    "elements {} and {} are joined by more than one port",
                    key.0, key.1
                )));
            }
        }
        let pairs = pairs
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        Ok(Self { n_elements, pairs })
    }

    /// Incidence for a rows x cols element grid: one port per horizontal
    /// neighbor pair, then one per vertical pair, numbered row-major.
    pub fn grid(rows: usize, cols: usize) -> Self {
        let idx = |r: usize, c: usize| r * cols + c;
        let mut pairs = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    pairs.push((idx(r, c), idx(r, c + 1)));
                }
                if r + 1 < rows {
                    pairs.push((idx(r, c), idx(r + 1, c)));
                }
            }
        }
        Self::new(rows * cols, pairs).expect("grid incidence is always valid")
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn n_ports(&self) -> usize {
        self.pairs.len()
    }

    pub fn endpoints(&self, port: usize) -> (usize, usize) {
        self.pairs[port]
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// The matrix entry for an element pair: the joining port, if any.
    pub fn port_between(&self, n1: usize, n2: usize) -> Option<usize> {
        let key = (n1.min(n2), n1.max(n2));
        self.pairs.iter().position(|&p| p == key)
    }
}

/// Hard connections plus switch placements decoded from the genome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryVector {
    /// Per-port hard-connection flags (true = soldered short).
    pub x0: Vec<bool>,
    /// One gene per RF switch.
    pub switches: Vec<SwitchGene>,
}

impl GeometryVector {
    pub fn q(&self) -> usize {
        self.switches.len()
    }

    /// Structural validity: switch ports distinct, in range, and not also
    /// hard-connected.
    pub fn is_well_formed(&self, y: &PortIncidenceMatrix) -> bool {
        if self.x0.len() != y.n_ports() {
            return false;
        }
        let mut seen = std::collections::BTreeSet::new();
        for sw in &self.switches {
            if sw.port >= y.n_ports() || self.x0[sw.port] || !seen.insert(sw.port) {
                return false;
            }
        }
        true
    }

    /// Anode and cathode elements of switch `q`.
    pub fn switch_terminals(&self, y: &PortIncidenceMatrix, q: usize) -> (usize, usize) {
        let sw = self.switches[q];
        let (a, b) = y.endpoints(sw.port);
        match sw.anode_side {
            AnodeSide::First => (a, b),
            AnodeSide::Second => (b, a),
        }
    }
}

/// Fixed DC feeding points: one shared ground and three control lines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedingSpec {
    pub ground: usize,
    pub controls: [usize; 3],
}

impl FeedingSpec {
    pub fn new(ground: usize, controls: [usize; 3], n_elements: usize) -> Result<Self> {
        let mut all = vec![ground, controls[0], controls[1], controls[2]];
        all.sort_unstable();
        all.dedup();
        if all.len() != 4 {
            return Err(RisError::InvalidInput(
                "feeding points must be four distinct elements".into(),
            ));
        }
        if all.iter().any(|&e| e >= n_elements) {
            return Err(RisError::InvalidInput(format!(
                "feeding point outside 0..{n_elements}"
            )));
        }
        Ok(Self { ground, controls })
    }

    pub fn points(&self) -> [usize; 4] {
        [self.ground, self.controls[0], self.controls[1], self.controls[2]]
    }
}

/// DC-wiring feasibility of a geometry.
///
/// Builds the element graph whose edges are the hard-connected ports
/// (switches never conduct DC here: feasibility must hold in every RF
/// state) and checks that
///
/// 1. every switch cathode lands in the ground point's component,
/// 2. the switch anodes pair off one-to-one with the control points, and
/// 3. the four feeding points sit in four distinct components.
pub fn feeding_constraint(
    y: &PortIncidenceMatrix,
    x: &GeometryVector,
    spec: &FeedingSpec,
) -> Result<bool> {
    if x.x0.len() != y.n_ports() {
        return Err(RisError::IncidenceMatrixInvalid(format!(
            "geometry has {} connection flags for {} ports",
            x.x0.len(),
            y.n_ports()
        )));
    }
    if spec.points().iter().any(|&e| e >= y.n_elements()) {
        return Err(RisError::InvalidInput(
            "feeding point outside the element range".into(),
        ));
    }
    if !x.is_well_formed(y) {
        return Ok(false);
    }

    let component = components_by_bfs(y, &x.x0);

    // Condition 3 first: feeding points pairwise disconnected.
    let pts = spec.points();
    for i in 0..4 {
        for j in (i + 1)..4 {
            if component[pts[i]] == component[pts[j]] {
                return Ok(false);
            }
        }
    }

    // Condition 1: all cathodes in the ground component.
    let ground_comp = component[spec.ground];
    for q in 0..x.q() {
        let (_, cathode) = x.switch_terminals(y, q);
        if component[cathode] != ground_comp {
            return Ok(false);
        }
    }

    // Condition 2: anode components contain exactly one control point each,
    // and the assignment is one-to-one.
    let mut used = [false; 3];
    for q in 0..x.q() {
        let (anode, _) = x.switch_terminals(y, q);
        let anode_comp = component[anode];
        let mut matched: Option<usize> = None;
        for (ci, &ctrl) in spec.controls.iter().enumerate() {
            if component[ctrl] == anode_comp {
                if matched.is_some() {
                    return Ok(false); // two controls in one component
                }
                matched = Some(ci);
            }
        }
        match matched {
            Some(ci) if !used[ci] => used[ci] = true,
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Connected-component labels via breadth-first search over the
/// hard-connection edges.
fn components_by_bfs(y: &PortIncidenceMatrix, x0: &[bool]) -> Vec<usize> {
    let n = y.n_elements();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (port, &(a, b)) in y.pairs().iter().enumerate() {
        if x0[port] {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
    }
    let mut component = vec![usize::MAX; n];
    let mut next = 0;
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        component[start] = next;
        queue.push_back(start);
        while let Some(e) = queue.pop_front() {
            for &nb in &adjacency[e] {
                if component[nb] == usize::MAX {
                    component[nb] = next;
                    queue.push_back(nb);
                }
            }
        }
        next += 1;
    }
    component
}

/// All 2^Q RF states: hard connections short, bare ports open, switch
/// ports carry their diode with the on/off bit taken from the combination
/// index (switch q follows bit q).
pub fn element_states(x: &GeometryVector, n_ports: usize) -> Vec<Vec<LoadModel>> {
    let q = x.q();
    (0..1usize << q)
        .map(|combo| {
            let mut loads: Vec<LoadModel> = x
                .x0
                .iter()
                .map(|&on| if on { LoadModel::Short } else { LoadModel::Open })
                .collect();
            loads.resize(n_ports, LoadModel::Open);
            for (bit, sw) in x.switches.iter().enumerate() {
                loads[sw.port] = LoadModel::DiodeSwitch {
                    on: combo >> bit & 1 == 1,
                };
            }
            loads
        })
        .collect()
}

/// Scattered-field phase of every RF state at one observation direction,
/// folded into [0, 360).
pub fn reflection_phases(
    net: &PortNetwork,
    x: &GeometryVector,
    wave: &IncidentWave,
    observation: (f64, f64),
) -> Result<PhaseSet> {
    let states = element_states(x, net.num_ports());
    let mut phases = Vec::with_capacity(states.len());
    for (s, loads) in states.iter().enumerate() {
        let currents = currents_for_states(net, loads, wave)?;
        let field = field_from_currents(net, &currents, &[observation])?[0];
        if field.norm() < 1e-12 {
            return Err(RisError::NullField { state: s });
        }
        phases.push(field.arg().to_degrees().rem_euclid(360.0));
    }
    PhaseSet::new(phases)
}

/// Angle and frequency sampling for the entropy objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyObjectiveSpec {
    /// Observation directions (theta, phi) in degrees.
    pub angles_deg: Vec<(f64, f64)>,
    pub frequencies_hz: Vec<f64>,
    /// Optional per-(angle, frequency) weights, angle-major; uniform when
    /// omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl EntropyObjectiveSpec {
    pub fn validate(&self) -> Result<()> {
        if self.angles_deg.is_empty() || self.frequencies_hz.is_empty() {
            return Err(RisError::InvalidInput(
                "objective needs at least one angle and one frequency".into(),
            ));
        }
        if let Some(w) = &self.weights {
            let expect = self.angles_deg.len() * self.frequencies_hz.len();
            if w.len() != expect {
                return Err(RisError::DimensionMismatch(format!(
                    "{} weights for {expect} samples",
                    w.len()
                )));
            }
        }
        Ok(())
    }
}

/// Entropy objective with per-frequency networks resynthesized up front.
pub struct EntropyObjective {
    networks: Vec<PortNetwork>,
    waves: Vec<IncidentWave>,
    spec: EntropyObjectiveSpec,
}

/// Outcome of one objective evaluation.
#[derive(Debug, Clone, Copy)]
pub struct ObjectiveValue {
    /// Weighted mean entropy in bits.
    pub mean_entropy: f64,
    /// Samples that hit a null field and contributed zero entropy.
    pub null_samples: usize,
}

impl EntropyObjective {
    /// `synth` builds the network for each frequency sample; the incident
    /// wave keeps its direction but follows the sample frequency.
    pub fn new(
        spec: EntropyObjectiveSpec,
        wave_direction: (f64, f64),
        synth: impl Fn(f64) -> Result<PortNetwork>,
    ) -> Result<Self> {
        spec.validate()?;
        let mut networks = Vec::with_capacity(spec.frequencies_hz.len());
        let mut waves = Vec::with_capacity(spec.frequencies_hz.len());
        for &f in &spec.frequencies_hz {
            networks.push(synth(f)?);
            waves.push(IncidentWave::new(wave_direction.0, wave_direction.1, f));
        }
        Ok(Self {
            networks,
            waves,
            spec,
        })
    }

    pub fn spec(&self) -> &EntropyObjectiveSpec {
        &self.spec
    }

    pub fn networks(&self) -> &[PortNetwork] {
        &self.networks
    }

    /// Weighted mean of H over all (angle, frequency) samples. Null-field
    /// samples count as zero entropy rather than aborting the evaluation.
    pub fn evaluate(&self, x: &GeometryVector) -> Result<ObjectiveValue> {
        let k = self.spec.angles_deg.len();
        let l = self.spec.frequencies_hz.len();
        let uniform = 1.0 / (k * l) as f64;
        let mut mean = 0.0;
        let mut nulls = 0;

        // Per frequency: one solve per state, then every angle reuses the
        // same currents.
        for (li, (net, wave)) in self.networks.iter().zip(&self.waves).enumerate() {
            let states = element_states(x, net.num_ports());
            let mut fields: Vec<Vec<Complex64>> = Vec::with_capacity(states.len());
            for loads in &states {
                let currents = currents_for_states(net, loads, wave)?;
                fields.push(field_from_currents(net, &currents, &self.spec.angles_deg)?);
            }
            for ki in 0..k {
                let mut phases = Vec::with_capacity(states.len());
                let mut null_here = false;
                for state_fields in &fields {
                    let f = state_fields[ki];
                    if f.norm() < 1e-12 {
                        null_here = true;
                        break;
                    }
                    phases.push(f.arg().to_degrees().rem_euclid(360.0));
                }
                let h = if null_here {
                    nulls += 1;
                    0.0
                } else {
                    entropy_bits(&PhaseSet::new(phases)?)
                };
                let w = match &self.spec.weights {
                    Some(w) => w[ki * l + li] / w.iter().sum::<f64>(),
                    None => uniform,
                };
                mean += w * h;
            }
        }
        Ok(ObjectiveValue {
            mean_entropy: mean,
            null_samples: nulls,
        })
    }
}

// ── feasible-geometry sampling ──────────────────────────────────────────

/// Draw a random geometry that satisfies the feeding constraint by
/// construction: place the switches, wire each cathode to the ground
/// point and each anode to a distinct control point along random paths,
/// then sprinkle extra connections that keep the four feeding nets
/// separate. Returns None when the attempt wires itself into a corner;
/// callers retry with fresh randomness.
///
/// Rejection sampling is useless here: a uniformly random geometry is
/// feasible with probability around 1e-5 on the reference instance.
pub fn sample_feasible_geometry(
    rng: &mut ChaCha8Rng,
    y: &PortIncidenceMatrix,
    q: usize,
    feeding: &FeedingSpec,
    extra_density: f64,
) -> Option<GeometryVector> {
    let m = y.n_ports();
    let n = y.n_elements();
    if q > 3 || m == 0 {
        return None;
    }

    // Distinct random switch ports with random orientations.
    let mut port_ids: Vec<usize> = (0..m).collect();
    for i in 0..q.min(m) {
        let j = rng.random_range(i..m);
        port_ids.swap(i, j);
    }
    if q > m {
        return None;
    }
    let mut switches: Vec<SwitchGene> = (0..q)
        .map(|i| SwitchGene {
            port: port_ids[i],
            anode_side: if rng.random_bool(0.5) {
                AnodeSide::Second
            } else {
                AnodeSide::First
            },
        })
        .collect();
    let switch_ports: std::collections::BTreeSet<usize> =
        switches.iter().map(|s| s.port).collect();

    // Net labels: 0 = ground, 1..=3 = controls, None = free.
    let mut net_of: Vec<Option<u8>> = vec![None; n];
    net_of[feeding.ground] = Some(0);
    for (i, &c) in feeding.controls.iter().enumerate() {
        net_of[c] = Some(1 + i as u8);
    }

    // A switch endpoint that happens to be a feeding point forces the
    // orientation: ground must sit on the cathode side, a control on the
    // anode side.
    for sw in switches.iter_mut() {
        let (a, b) = y.endpoints(sw.port);
        let (anode, cathode) = match sw.anode_side {
            AnodeSide::First => (a, b),
            AnodeSide::Second => (b, a),
        };
        let flip = net_of[anode] == Some(0) || matches!(net_of[cathode], Some(l) if l > 0);
        if flip {
            sw.anode_side = match sw.anode_side {
                AnodeSide::First => AnodeSide::Second,
                AnodeSide::Second => AnodeSide::First,
            };
        }
    }

    let mut x0 = vec![false; m];
    let geometry = GeometryVector {
        x0: x0.clone(),
        switches: switches.clone(),
    };

    // Switch terminals must stay out of other nets' wiring paths: each one
    // still has its own net to join.
    let mut reserved = vec![false; n];
    for (si, _) in switches.iter().enumerate() {
        let (anode, cathode) = geometry.switch_terminals(y, si);
        reserved[anode] = true;
        reserved[cathode] = true;
    }

    // Element adjacency excluding switch ports.
    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (port, &(a, b)) in y.pairs().iter().enumerate() {
        if !switch_ports.contains(&port) {
            adjacency[a].push((b, port));
            adjacency[b].push((a, port));
        }
    }

    // Wire a terminal element into a target net along a random free path
    // that avoids foreign nets and other switches' terminals.
    let connect = |start: usize,
                       target: u8,
                       net_of: &mut Vec<Option<u8>>,
                       x0: &mut Vec<bool>,
                       rng: &mut ChaCha8Rng|
     -> bool {
        if let Some(label) = net_of[start] {
            return label == target;
        }
        // Randomized BFS over free elements until the target net is hit.
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut visited = vec![false; n];
        visited[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        let mut hit: Option<usize> = None;
        'search: while let Some(e) = queue.pop_front() {
            let mut order: Vec<(usize, usize)> = adjacency[e].clone();
            // Shuffle expansion order so paths vary between draws.
            for i in (1..order.len()).rev() {
                order.swap(i, rng.random_range(0..=i));
            }
            for (nb, port) in order {
                match net_of[nb] {
                    Some(label) if label == target => {
                        parent[nb] = Some((e, port));
                        hit = Some(nb);
                        break 'search;
                    }
                    Some(_) => continue, // foreign net: do not cross
                    None => {
                        if !visited[nb] && !reserved[nb] {
                            visited[nb] = true;
                            parent[nb] = Some((e, port));
                            queue.push_back(nb);
                        }
                    }
                }
            }
        }
        let Some(mut at) = hit else { return false };
        // Turn on the path edges and absorb the free elements into the net.
        while let Some((prev, port)) = parent[at] {
            x0[port] = true;
            if net_of[at].is_none() {
                net_of[at] = Some(target);
            }
            at = prev;
        }
        net_of[start] = Some(target);
        true
    };

    // Wire every cathode to ground, then each anode to any still-unused
    // control (trying them in random order).
    let mut control_used = [false; 3];
    for (si, _) in switches.iter().enumerate() {
        let (anode, cathode) = geometry.switch_terminals(y, si);
        if !connect(cathode, 0, &mut net_of, &mut x0, rng) {
            return None;
        }
        let mut order = [0u8, 1, 2];
        for i in (1..3).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let mut wired = false;
        if let Some(label) = net_of[anode] {
            // Already on a control net (the endpoint is that feeding point).
            let ci = label.checked_sub(1).map(|v| v as usize);
            match ci {
                Some(ci) if ci < 3 && !control_used[ci] => {
                    control_used[ci] = true;
                    wired = true;
                }
                _ => return None,
            }
        } else {
            for &ci in order.iter() {
                if control_used[ci as usize] {
                    continue;
                }
                if connect(anode, 1 + ci, &mut net_of, &mut x0, rng) {
                    control_used[ci as usize] = true;
                    wired = true;
                    break;
                }
            }
        }
        if !wired {
            return None;
        }
    }

    // Sprinkle extra connections that never merge two feeding nets.
    let mut order: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let points = feeding.points();
    for port in order {
        if x0[port] || switch_ports.contains(&port) || !rng.random_bool(extra_density) {
            continue;
        }
        x0[port] = true;
        let comp = components_by_bfs(y, &x0);
        let mut clash = false;
        'pairs: for i in 0..4 {
            for j in (i + 1)..4 {
                if comp[points[i]] == comp[points[j]] {
                    clash = true;
                    break 'pairs;
                }
            }
        }
        if clash {
            x0[port] = false;
        }
    }

    let candidate = GeometryVector { x0, switches };
    match feeding_constraint(y, &candidate, feeding) {
        Ok(true) => Some(candidate),
        _ => None,
    }
}

// ── genome encoding ─────────────────────────────────────────────────────

/// Bits needed to index a port.
pub fn port_index_bits(n_ports: usize) -> usize {
    (usize::BITS - (n_ports - 1).leading_zeros()) as usize
}

/// Genome length: M hard-connection bits plus, per switch, a port index
/// and one orientation bit.
pub fn genome_len(n_ports: usize, q: usize) -> usize {
    n_ports + q * (port_index_bits(n_ports) + 1)
}

/// Decode a genome. Returns None when a switch index lands outside the
/// port range or switches collide; out-of-range indices are never wrapped.
pub fn decode_genome(bits: &[bool], y: &PortIncidenceMatrix, q: usize) -> Option<GeometryVector> {
    let m = y.n_ports();
    let idx_bits = port_index_bits(m);
    if bits.len() != genome_len(m, q) {
        return None;
    }
    let x0: Vec<bool> = bits[..m].to_vec();
    let mut switches = Vec::with_capacity(q);
    for s in 0..q {
        let base = m + s * (idx_bits + 1);
        let mut port = 0usize;
        for b in 0..idx_bits {
            port = (port << 1) | bits[base + b] as usize;
        }
        if port >= m {
            return None;
        }
        let anode_side = if bits[base + idx_bits] {
            AnodeSide::Second
        } else {
            AnodeSide::First
        };
        switches.push(SwitchGene { port, anode_side });
    }
    let x = GeometryVector { x0, switches };
    x.is_well_formed(y).then_some(x)
}

/// Inverse of [`decode_genome`] for well-formed geometries.
pub fn encode_genome(x: &GeometryVector, n_ports: usize) -> Vec<bool> {
    let idx_bits = port_index_bits(n_ports);
    let mut bits = Vec::with_capacity(genome_len(n_ports, x.q()));
    bits.extend_from_slice(&x.x0);
    for sw in &x.switches {
        for b in (0..idx_bits).rev() {
            bits.push(sw.port >> b & 1 == 1);
        }
        bits.push(sw.anode_side == AnodeSide::Second);
    }
    bits
}

// ── genetic algorithm ───────────────────────────────────────────────────

/// GA controls. The defaults are population 64, generations 100,
/// tournament 3, crossover 0.9, per-bit mutation 1/len, elitism 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    pub population: usize,
    pub generations: usize,
    /// Per-bit mutation probability; defaults to 1/genome_len when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation_rate: Option<f64>,
    pub crossover_rate: f64,
    pub tournament: usize,
    pub seed: u64,
    /// Resampling attempts per individual while seeding the initial
    /// population with feasible geometries.
    #[serde(default = "default_init_budget")]
    pub init_resample_budget: usize,
}

fn default_init_budget() -> usize {
    50
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population: 64,
            generations: 100,
            mutation_rate: None,
            crossover_rate: 0.9,
            tournament: 3,
            seed: 1,
            init_resample_budget: default_init_budget(),
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 || self.generations < 1 || self.tournament < 1 {
            return Err(RisError::InvalidInput(
                "GA needs population >= 2, generations >= 1, tournament >= 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(RisError::InvalidInput("crossover rate outside [0, 1]".into()));
        }
        if let Some(m) = self.mutation_rate {
            if !(0.0..=1.0).contains(&m) {
                return Err(RisError::InvalidInput("mutation rate outside [0, 1]".into()));
            }
        }
        Ok(())
    }
}

/// Per-generation statistics. Infeasible-only generations carry -inf best.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaHistoryRow {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub feasible_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct GaResult {
    pub best: GeometryVector,
    pub best_fitness: f64,
    pub history: Vec<GaHistoryRow>,
    pub evaluations: usize,
}

/// Maximize the entropy objective over genomes subject to the feeding
/// constraint. Infeasible decodes score -inf; runs are bit-reproducible
/// for a fixed seed.
pub fn optimize(
    objective: &EntropyObjective,
    y: &PortIncidenceMatrix,
    feeding: &FeedingSpec,
    q: usize,
    params: &GaParams,
) -> Result<GaResult> {
    params.validate()?;
    let m = y.n_ports();
    let len = genome_len(m, q);
    let mutation = params.mutation_rate.unwrap_or(1.0 / len as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut evaluations = 0usize;

    let fitness_of = |bits: &[bool], evals: &mut usize| -> Result<f64> {
        let Some(x) = decode_genome(bits, y, q) else {
            return Ok(f64::NEG_INFINITY);
        };
        if !feeding_constraint(y, &x, feeding)? {
            return Ok(f64::NEG_INFINITY);
        }
        *evals += 1;
        Ok(objective.evaluate(&x)?.mean_entropy)
    };

    // Initial population: constructively sampled feasible geometries with
    // spread connection densities (uniform random bitstrings are feasible
    // far too rarely to seed anything).
    let mut population: Vec<Vec<bool>> = Vec::with_capacity(params.population);
    for i in 0..params.population {
        let density = 0.3 * (i as f64 / (params.population - 1).max(1) as f64);
        let mut chosen: Option<Vec<bool>> = None;
        for _ in 0..params.init_resample_budget.max(1) {
            if let Some(x) = sample_feasible_geometry(&mut rng, y, q, feeding, density) {
                chosen = Some(encode_genome(&x, m));
                break;
            }
        }
        population.push(chosen.unwrap_or_else(|| {
            (0..len).map(|_| rng.random_bool(0.2)).collect()
        }));
    }

    let mut fitness = Vec::with_capacity(params.population);
    for ind in &population {
        fitness.push(fitness_of(ind, &mut evaluations)?);
    }

    let mut history = Vec::with_capacity(params.generations);
    let mut best_ever: Option<(Vec<bool>, f64)> = None;

    for generation in 0..params.generations {
        let mut best_idx = 0;
        for i in 1..params.population {
            if fitness[i] > fitness[best_idx] {
                best_idx = i;
            }
        }
        if fitness[best_idx].is_finite()
            && best_ever.as_ref().map_or(true, |(_, f)| fitness[best_idx] > *f)
        {
            best_ever = Some((population[best_idx].clone(), fitness[best_idx]));
        }

        let feasible = fitness.iter().filter(|f| f.is_finite()).count();
        let mean = if feasible > 0 {
            fitness.iter().filter(|f| f.is_finite()).sum::<f64>() / feasible as f64
        } else {
            f64::NEG_INFINITY
        };
        history.push(GaHistoryRow {
            generation,
            best: best_ever.as_ref().map_or(f64::NEG_INFINITY, |(_, f)| *f),
            mean,
            feasible_fraction: feasible as f64 / params.population as f64,
        });

        if generation + 1 == params.generations {
            break;
        }

        let mut next: Vec<Vec<bool>> = Vec::with_capacity(params.population);
        // Elitism: the best individual survives unchanged.
        next.push(
            best_ever
                .as_ref()
                .map(|(b, _)| b.clone())
                .unwrap_or_else(|| population[best_idx].clone()),
        );
        while next.len() < params.population {
            let p1 = tournament_pick(&population, &fitness, params.tournament, &mut rng);
            let p2 = tournament_pick(&population, &fitness, params.tournament, &mut rng);
            let (mut c1, mut c2) = if rng.random_bool(params.crossover_rate) {
                uniform_crossover(&population[p1], &population[p2], &mut rng)
            } else {
                (population[p1].clone(), population[p2].clone())
            };
            mutate(&mut c1, mutation, &mut rng);
            mutate(&mut c2, mutation, &mut rng);
            next.push(c1);
            if next.len() < params.population {
                next.push(c2);
            }
        }
        population = next;
        fitness.clear();
        for ind in &population {
            fitness.push(fitness_of(ind, &mut evaluations)?);
        }
    }

    match best_ever {
        Some((bits, best_fitness)) => Ok(GaResult {
            best: decode_genome(&bits, y, q).expect("best individual decodes"),
            best_fitness,
            history,
            evaluations,
        }),
        None => Err(RisError::InfeasiblePopulation {
            evaluations: params.population * params.generations,
        }),
    }
}

fn tournament_pick(
    population: &[Vec<bool>],
    fitness: &[f64],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> usize {
    let mut best = rng.random_range(0..population.len());
    for _ in 1..k {
        let other = rng.random_range(0..population.len());
        if fitness[other] > fitness[best] {
            best = other;
        }
    }
    best
}

fn uniform_crossover(
    a: &[bool],
    b: &[bool],
    rng: &mut ChaCha8Rng,
) -> (Vec<bool>, Vec<bool>) {
    let mut c1 = Vec::with_capacity(a.len());
    let mut c2 = Vec::with_capacity(a.len());
    for i in 0..a.len() {
        if rng.random_bool(0.5) {
            c1.push(a[i]);
            c2.push(b[i]);
        } else {
            c1.push(b[i]);
            c2.push(a[i]);
        }
    }
    (c1, c2)
}

fn mutate(bits: &mut [bool], rate: f64, rng: &mut ChaCha8Rng) {
    for b in bits.iter_mut() {
        if rng.random_bool(rate) {
            *b = !*b;
        }
    }
}

// ── geometry JSON interchange ───────────────────────────────────────────

#[derive(Serialize, Deserialize)]
struct GeometryDto {
    /// Hard-connection flags as a bitstring, port 0 first.
    x0: String,
    switches: Vec<SwitchGene>,
}

pub fn write_geometry_json<W: std::io::Write>(w: W, x: &GeometryVector) -> Result<()> {
    let dto = GeometryDto {
        x0: x.x0.iter().map(|&b| if b { '1' } else { '0' }).collect(),
        switches: x.switches.clone(),
    };
    serde_json::to_writer_pretty(w, &dto)
        .map_err(|e| RisError::Parse(format!("geometry serialization failed: {e}")))
}

pub fn read_geometry_json<R: std::io::BufRead>(r: R) -> Result<GeometryVector> {
    let dto: GeometryDto =
        serde_json::from_reader(r).map_err(|e| RisError::Parse(format!("geometry json: {e}")))?;
    let mut x0 = Vec::with_capacity(dto.x0.len());
    for ch in dto.x0.chars() {
        match ch {
            '0' => x0.push(false),
            '1' => x0.push(true),
            other => {
                return Err(RisError::Parse(format!(
                    "x0 bitstring contains '{other}'"
                )))
            }
        }
    }
    Ok(GeometryVector {
        x0,
        switches: dto.switches,
    })
}
