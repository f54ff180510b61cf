//! Independent oracles for verifying the RIS core. Everything here
//! deliberately reimplements the math along a different route than the
//! library: explicit Gauss-Jordan inversion instead of an LU solve,
//! direct per-point summation instead of pattern containers, union-find
//! instead of breadth-first search.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use ris_core::engine::LoadModel;
use ris_core::oracle::{IncidentWave, PortNetwork};
use ris_core::topology::{AnodeSide, FeedingSpec, GeometryVector, PortIncidenceMatrix, SwitchGene};

// ── brute-force scattered field ─────────────────────────────────────────

/// Invert a dense complex matrix by Gauss-Jordan elimination with partial
/// pivoting. Panics on singular input (oracle usage only).
pub fn gauss_jordan_inverse(a: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = a.len();
    let mut aug: Vec<Vec<Complex64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| {
                if i == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| {
                aug[i][col]
                    .norm()
                    .partial_cmp(&aug[j][col].norm())
                    .unwrap()
            })
            .unwrap();
        assert!(aug[pivot_row][col].norm() > 0.0, "singular matrix in oracle");
        aug.swap(col, pivot_row);
        let pivot = aug[col][col];
        for v in aug[col].iter_mut() {
            *v /= pivot;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = aug[row][col];
            if factor.norm() == 0.0 {
                continue;
            }
            for j in 0..2 * n {
                let sub = factor * aug[col][j];
                aug[row][j] -= sub;
            }
        }
    }
    aug.into_iter().map(|row| row[n..].to_vec()).collect()
}

/// Brute-force currents: i = -(Z + Z_L)^{-1} v_oc via the explicit inverse.
pub fn brute_force_currents(
    net: &PortNetwork,
    states: &[LoadModel],
    wave: &IncidentWave,
) -> Vec<Complex64> {
    let m = net.num_ports();
    let mut a: Vec<Vec<Complex64>> = (0..m)
        .map(|i| (0..m).map(|j| net.z()[(i, j)]).collect())
        .collect();
    for (i, s) in states.iter().enumerate() {
        a[i][i] += s.impedance_ohm();
    }
    let inv = gauss_jordan_inverse(&a);
    let v = net.open_circuit_voltages(wave).expect("oracle wave on grid");
    (0..m)
        .map(|i| -(0..m).map(|j| inv[i][j] * v[j]).sum::<Complex64>())
        .collect()
}

/// Brute-force scattered field at every grid point by direct summation
/// over ports of the stored embedded patterns.
pub fn brute_force_pattern(
    net: &PortNetwork,
    states: &[LoadModel],
    wave: &IncidentWave,
) -> Vec<Complex64> {
    let currents = brute_force_currents(net, states, wave);
    let grid = net.grid();
    let mut out = Vec::with_capacity(grid.len());
    for it in 0..grid.n_theta() {
        for ip in 0..grid.n_phi() {
            let mut acc = net.oc_pattern().value(it, ip);
            for (m, current) in currents.iter().enumerate() {
                acc += current * net.port_patterns()[m].value(it, ip);
            }
            out.push(acc);
        }
    }
    out
}

// ── union-find connectivity oracle ──────────────────────────────────────

pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }

    pub fn connected(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }
}

/// Independent evaluation of the DC-feeding conditions with union-find.
pub fn feeding_oracle(
    y: &PortIncidenceMatrix,
    x: &GeometryVector,
    spec: &FeedingSpec,
) -> bool {
    if !x.is_well_formed(y) {
        return false;
    }
    let mut uf = UnionFind::new(y.n_elements());
    for (port, &(a, b)) in y.pairs().iter().enumerate() {
        if x.x0[port] {
            uf.union(a, b);
        }
    }
    let pts = spec.points();
    for i in 0..4 {
        for j in (i + 1)..4 {
            if uf.connected(pts[i], pts[j]) {
                return false;
            }
        }
    }
    // Cathodes all reach ground.
    for q in 0..x.q() {
        let (_, cathode) = x.switch_terminals(y, q);
        if !uf.connected(cathode, spec.ground) {
            return false;
        }
    }
    // Anodes reach the three controls one-to-one.
    let mut used = [false; 3];
    for q in 0..x.q() {
        let (anode, _) = x.switch_terminals(y, q);
        let mut hit: Option<usize> = None;
        for (ci, &ctrl) in spec.controls.iter().enumerate() {
            if uf.connected(anode, ctrl) {
                if hit.is_some() {
                    return false;
                }
                hit = Some(ci);
            }
        }
        match hit {
            Some(ci) if !used[ci] => used[ci] = true,
            _ => return false,
        }
    }
    true
}

// ── random instance generators ──────────────────────────────────────────

/// Random valid incidence structure: up to `max_ports` distinct element
/// pairs over `n_elements`.
pub fn random_incidence(
    rng: &mut ChaCha8Rng,
    n_elements: usize,
    max_ports: usize,
) -> PortIncidenceMatrix {
    let mut pairs = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    let attempts = max_ports * 4;
    for _ in 0..attempts {
        if pairs.len() >= max_ports {
            break;
        }
        let a = rng.random_range(0..n_elements);
        let b = rng.random_range(0..n_elements);
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if seen.insert(key) {
            pairs.push(key);
        }
    }
    PortIncidenceMatrix::new(n_elements, pairs).expect("generated pairs are valid")
}

/// Random geometry over an incidence structure: Bernoulli hard
/// connections plus `q` random switch genes (possibly malformed, which is
/// part of what the constraint check has to classify).
pub fn random_geometry(
    rng: &mut ChaCha8Rng,
    y: &PortIncidenceMatrix,
    q: usize,
    density: f64,
) -> GeometryVector {
    let x0: Vec<bool> = (0..y.n_ports()).map(|_| rng.random_bool(density)).collect();
    let switches = (0..q)
        .map(|_| SwitchGene {
            port: rng.random_range(0..y.n_ports()),
            anode_side: if rng.random_bool(0.5) {
                AnodeSide::Second
            } else {
                AnodeSide::First
            },
        })
        .collect();
    GeometryVector { x0, switches }
}

/// Draw geometries (mixing bit densities) until one satisfies the feeding
/// constraint; panics after a generous budget so a broken sampler fails
/// loudly in tests.
pub fn random_feasible_geometry(
    rng: &mut ChaCha8Rng,
    y: &PortIncidenceMatrix,
    q: usize,
    spec: &FeedingSpec,
) -> GeometryVector {
    for _ in 0..200_000 {
        let density = rng.random_range(0.02..0.5);
        let x = random_geometry(rng, y, q, density);
        if feeding_oracle(y, &x, spec) {
            return x;
        }
    }
    panic!("no feasible geometry found in 200k draws");
}

/// Random load mix covering every model kind.
pub fn random_states(rng: &mut ChaCha8Rng, m: usize) -> Vec<LoadModel> {
    (0..m)
        .map(|_| match rng.random_range(0..5) {
            0 => LoadModel::Open,
            1 => LoadModel::Short,
            2 => LoadModel::Impedance {
                re: rng.random_range(1.0..300.0),
                im: rng.random_range(-150.0..150.0),
            },
            3 => LoadModel::OneBitShifter {
                state: rng.random_range(0..2u8),
            },
            _ => LoadModel::DiodeSwitch {
                on: rng.random_bool(0.5),
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_jordan_inverts_identity() {
        let eye = vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ];
        let inv = gauss_jordan_inverse(&eye);
        assert_eq!(inv, eye);
    }

    #[test]
    fn gauss_jordan_known_inverse() {
        // [[1, 1], [0, 2]]^{-1} = [[1, -0.5], [0, 0.5]].
        let a = vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)],
        ];
        let inv = gauss_jordan_inverse(&a);
        assert!((inv[0][0] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((inv[0][1] - Complex64::new(-0.5, 0.0)).norm() < 1e-14);
        assert!((inv[1][0]).norm() < 1e-14);
        assert!((inv[1][1] - Complex64::new(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn union_find_basic() {
        let mut uf = UnionFind::new(5);
        uf.union(0, 1);
        uf.union(3, 4);
        assert!(uf.connected(0, 1));
        assert!(!uf.connected(1, 3));
        uf.union(1, 3);
        assert!(uf.connected(0, 4));
    }
}
