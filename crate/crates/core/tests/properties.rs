//! Property tests for the module invariants.

use num_complex::Complex64;
use proptest::prelude::*;

use ris_core::entropy::{entropy_bits, phase_gaps, PhaseSet};
use ris_core::field::{pattern_db, pattern_metrics, AngleGrid, ComplexPattern};
use ris_core::oracle::{synthesize_network, synthesize_network_at, ArraySpec, IncidentWave};

fn phase_vec(q: u32) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..360.0f64, 1usize << q)
}

proptest! {
    #[test]
    fn entropy_bounds_hold(q in 1u32..=3, phases in phase_vec(3)) {
        let phases = phases[..1usize << q].to_vec();
        let set = PhaseSet::new(phases).unwrap();
        let h = entropy_bits(&set);
        prop_assert!(h >= 0.0);
        prop_assert!(h <= q as f64 + 1e-12);
    }

    #[test]
    fn entropy_rotation_invariant(q in 1u32..=3, phases in phase_vec(3), shift in 0.0..360.0f64) {
        let phases = phases[..1usize << q].to_vec();
        let rotated: Vec<f64> = phases.iter().map(|p| (p + shift).rem_euclid(360.0)).collect();
        let h0 = entropy_bits(&PhaseSet::new(phases).unwrap());
        let h1 = entropy_bits(&PhaseSet::new(rotated).unwrap());
        prop_assert!((h0 - h1).abs() <= 1e-12);
    }

    #[test]
    fn entropy_permutation_invariant(q in 1u32..=3, phases in phase_vec(3), seed in 0u64..1000) {
        let phases = phases[..1usize << q].to_vec();
        let mut shuffled = phases.clone();
        // Cheap deterministic shuffle.
        let n = shuffled.len();
        for i in (1..n).rev() {
            let j = (seed as usize).wrapping_mul(31).wrapping_add(i * 7) % (i + 1);
            shuffled.swap(i, j);
        }
        let h0 = entropy_bits(&PhaseSet::new(phases).unwrap());
        let h1 = entropy_bits(&PhaseSet::new(shuffled).unwrap());
        prop_assert!((h0 - h1).abs() <= 1e-12);
    }

    #[test]
    fn gaps_sum_to_circle(q in 1u32..=3, phases in phase_vec(3)) {
        let phases = phases[..1usize << q].to_vec();
        let gaps = phase_gaps(&PhaseSet::new(phases).unwrap());
        let total: f64 = gaps.iter().sum();
        prop_assert!((total - 360.0).abs() <= 1e-9);
        prop_assert!(gaps.iter().all(|&g| g >= 0.0));
    }

    #[test]
    fn max_entropy_iff_uniform_gaps(q in 1u32..=3, phases in phase_vec(3)) {
        let phases = phases[..1usize << q].to_vec();
        let set = PhaseSet::new(phases).unwrap();
        let h = entropy_bits(&set);
        let gaps = phase_gaps(&set);
        let uniform = 360.0 / gaps.len() as f64;
        let gaps_uniform = gaps.iter().all(|&g| (g - uniform).abs() <= 1e-9);
        if gaps_uniform {
            prop_assert!((h - set.bits() as f64).abs() <= 1e-9);
        }
        if (h - set.bits() as f64).abs() <= 1e-9 {
            prop_assert!(gaps_uniform);
        }
    }
}

fn uniform_phase_set(q: u32, offset: f64) -> PhaseSet {
    let n = 1usize << q;
    PhaseSet::new(
        (0..n)
            .map(|i| (offset + 360.0 * i as f64 / n as f64).rem_euclid(360.0))
            .collect(),
    )
    .unwrap()
}

#[test]
fn uniform_sets_reach_max_entropy() {
    for q in 1..=3u32 {
        for offset in [0.0, 13.7, 211.9] {
            let h = entropy_bits(&uniform_phase_set(q, offset));
            assert!((h - q as f64).abs() < 1e-12);
        }
    }
}

// ── pattern properties ──────────────────────────────────────────────────

fn lobe_pattern(grid: &AngleGrid) -> Vec<Complex64> {
    grid.theta_samples()
        .iter()
        .map(|&t| {
            let u = t.to_radians().sin();
            let psi = std::f64::consts::PI * u;
            let den = (psi / 2.0).sin();
            let af = if den.abs() < 1e-12 {
                6.0
            } else {
                (3.0 * psi).sin() / den
            };
            Complex64::new(af, 0.1 * af)
        })
        .collect()
}

proptest! {
    #[test]
    fn pattern_db_scale_invariant(re in -3.0..3.0f64, im in -3.0..3.0f64) {
        prop_assume!(re.abs() + im.abs() > 1e-3);
        let grid = AngleGrid::theta_sweep(-90.0, 90.0, 1.0, &[0.0]).unwrap();
        let base = lobe_pattern(&grid);
        let scaled: Vec<Complex64> = base.iter().map(|v| v * Complex64::new(re, im)).collect();
        let p0 = ComplexPattern::new(grid.clone(), base).unwrap();
        let p1 = ComplexPattern::new(grid, scaled).unwrap();
        let db0 = pattern_db(&p0).unwrap();
        let db1 = pattern_db(&p1).unwrap();
        for (a, b) in db0.iter().zip(&db1) {
            prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
        let m0 = pattern_metrics(&p0, 0.0).unwrap();
        let m1 = pattern_metrics(&p1, 0.0).unwrap();
        prop_assert_eq!(m0.peak_theta_deg, m1.peak_theta_deg);
    }
}

#[test]
fn hpbw_matches_analytic_scan_for_uniform_array() {
    // 8-element half-wavelength broadside array factor on the 1-degree
    // grid versus a fine-grained scan of the analytic expression.
    let n = 8.0;
    let af = |theta_deg: f64| -> f64 {
        let u = theta_deg.to_radians().sin();
        let psi = std::f64::consts::PI * u;
        let den = (psi / 2.0).sin();
        if den.abs() < 1e-12 {
            n
        } else {
            ((n * psi / 2.0).sin() / den).abs()
        }
    };
    let grid = AngleGrid::theta_sweep(-90.0, 90.0, 1.0, &[0.0]).unwrap();
    let values: Vec<Complex64> = grid
        .theta_samples()
        .iter()
        .map(|&t| Complex64::new(af(t), 0.0))
        .collect();
    let p = ComplexPattern::new(grid, values).unwrap();
    let metrics = pattern_metrics(&p, 0.0).unwrap();

    // Brute-force -3 dB scan at millidegree resolution.
    let threshold = n / 2.0_f64.sqrt();
    let mut left = 0.0;
    let mut right = 0.0;
    let step = 0.001;
    let mut t = 0.0;
    while t < 90.0 {
        if af(t) <= threshold {
            right = t;
            break;
        }
        t += step;
    }
    let mut t = 0.0;
    while t > -90.0 {
        if af(t) <= threshold {
            left = t;
            break;
        }
        t -= step;
    }
    let brute = right - left;
    assert!(
        (metrics.half_power_beamwidth_deg - brute).abs() <= 1.0,
        "interpolated {} vs scanned {brute}",
        metrics.half_power_beamwidth_deg
    );
}

// ── oracle properties ───────────────────────────────────────────────────

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn synthesized_networks_are_reciprocal(
        rows in 1usize..=3,
        cols in 1usize..=3,
        strength in 0.0..0.4f64,
        decay in 0.0..100.0f64,
    ) {
        let spec = ArraySpec {
            coupling_strength: strength,
            coupling_decay_per_m: decay,
            ..ArraySpec::new(rows, cols, 5.3534e-3, 28e9)
        };
        let grid = AngleGrid::theta_sweep(-90.0, 90.0, 15.0, &[0.0]).unwrap();
        let net = synthesize_network(&spec, &grid).unwrap();
        let z = net.z();
        prop_assert!(z.asymmetry() <= 1e-9 * z.max_abs().max(1e-30));
    }

    #[test]
    fn voltage_phase_progression_matches_geometry(
        theta in -80.0..80.0f64,
        phi in 0.0..360.0f64,
    ) {
        let f = 28e9;
        let spec = ArraySpec::new(2, 4, 4.1e-3, f);
        let grid = AngleGrid::theta_sweep(-90.0, 90.0, 15.0, &[0.0]).unwrap();
        let net = synthesize_network(&spec, &grid).unwrap();
        let v = net
            .open_circuit_voltages(&IncidentWave::new(theta, phi, f))
            .unwrap();
        let k = net.wavenumber();
        let (ux, uy) = (
            theta.to_radians().sin() * phi.to_radians().cos(),
            theta.to_radians().sin() * phi.to_radians().sin(),
        );
        for m in 0..net.num_ports() {
            for n in 0..net.num_ports() {
                let (xm, ym) = net.port_positions()[m];
                let (xn, yn) = net.port_positions()[n];
                let expect = k * ((xm - xn) * ux + (ym - yn) * uy);
                let got = (v[m] / v[n]).arg();
                let diff = (got - expect).rem_euclid(2.0 * std::f64::consts::PI);
                let diff = diff.min(2.0 * std::f64::consts::PI - diff);
                prop_assert!(diff <= 1e-9, "ports {m},{n}: {got} vs {expect}");
            }
        }
    }

    #[test]
    fn voltages_translation_covariant(
        dx in -0.05..0.05f64,
        dy in -0.05..0.05f64,
        theta in -80.0..80.0f64,
    ) {
        // Shifting every port multiplies all voltages by one common phase.
        let f = 3.5e9;
        let grid = AngleGrid::theta_sweep(-90.0, 90.0, 15.0, &[0.0]).unwrap();
        let positions: Vec<(f64, f64)> = vec![(0.0, 0.0), (0.02, 0.0), (0.01, 0.03)];
        let shifted: Vec<(f64, f64)> =
            positions.iter().map(|&(x, y)| (x + dx, y + dy)).collect();
        let make = |pos: Vec<(f64, f64)>| {
            synthesize_network_at(
                pos,
                f,
                1.0,
                Complex64::new(50.0, 0.0),
                0.1,
                0.0,
                &grid,
            )
            .unwrap()
        };
        let wave = IncidentWave::new(theta, 40.0, f);
        let v0 = make(positions).open_circuit_voltages(&wave).unwrap();
        let v1 = make(shifted).open_circuit_voltages(&wave).unwrap();
        // Pairwise ratios must be unchanged.
        for m in 1..3 {
            let r0 = v0[m] / v0[0];
            let r1 = v1[m] / v1[0];
            prop_assert!((r0 - r1).norm() <= 1e-9);
        }
    }
}
