//! Simulation-vs-measurement comparison under controlled perturbations.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use ris_core::field::{AngleGrid, ComplexPattern};
use ris_core::measurement::{pattern_compare, S21Trace, TraceLabel};

fn beam_pattern() -> ComplexPattern {
    let grid = AngleGrid::theta_sweep(-90.0, 90.0, 1.0, &[0.0]).unwrap();
    let values: Vec<Complex64> = grid
        .theta_samples()
        .iter()
        .map(|&t| {
            let u = (t - 10.0).to_radians().sin();
            let psi = 8.0 * std::f64::consts::PI * u / 2.0;
            let den = (std::f64::consts::PI * u / 2.0).sin();
            let af = if den.abs() < 1e-12 { 8.0 } else { psi.sin() / den };
            Complex64::new(af, 0.0)
        })
        .collect();
    ComplexPattern::new(grid, values).unwrap()
}

fn sample_trace(p: &ComplexPattern, noise_sigma: f64, seed: u64) -> S21Trace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = move || {
        // Box-Muller.
        let u1: f64 = rng.random_range(1e-12..1.0);
        let u2: f64 = rng.random_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let thetas: Vec<f64> = (0..37).map(|i| -90.0 + 5.0 * i as f64).collect();
    let peak = p.max_abs();
    let values: Vec<Complex64> = thetas
        .iter()
        .map(|&t| {
            let it = p.grid().theta_index_of(t).unwrap();
            let noise = Complex64::new(gauss(), gauss()) * (noise_sigma * peak);
            p.value(it, 0) + noise
        })
        .collect();
    S21Trace::new(thetas, values, 3.5e9, TraceLabel::Scat).unwrap()
}

#[test]
fn noiseless_resampling_compares_exactly() {
    let p = beam_pattern();
    let trace = sample_trace(&p, 0.0, 0);
    let report = pattern_compare(&p, 0.0, &trace).unwrap();
    assert_eq!(report.peak_offset_deg, 0.0);
    assert!(report.rms_db_error < 1e-9);
}

#[test]
fn minus_25_db_noise_stays_under_2_db_rms() {
    // sigma = -25 dB relative to the pattern peak, fixed seed.
    let p = beam_pattern();
    let sigma = 10f64.powf(-25.0 / 20.0);
    for seed in [1u64, 2, 3, 4, 5] {
        let trace = sample_trace(&p, sigma, seed);
        let report = pattern_compare(&p, 0.0, &trace).unwrap();
        assert!(
            report.rms_db_error <= 2.0,
            "seed {seed}: rms {} dB over {} samples",
            report.rms_db_error,
            report.samples
        );
        assert!(report.peak_offset_deg <= 5.0);
    }
}

#[test]
fn rms_is_symmetric_for_identical_supports() {
    // Two perturbed versions of the same beam, compared both ways over
    // the same main-lobe support, give the same RMS.
    let p = beam_pattern();
    let sigma = 10f64.powf(-30.0 / 20.0);
    let trace_a = sample_trace(&p, sigma, 7);
    let trace_b = sample_trace(&p, sigma, 8);

    // Build patterns on the 5-degree grid from each trace so either side
    // can play the simulated role.
    let grid5 = AngleGrid::theta_sweep(-90.0, 90.0, 5.0, &[0.0]).unwrap();
    let pat_a = ComplexPattern::new(grid5.clone(), trace_a.values.clone()).unwrap();
    let pat_b = ComplexPattern::new(grid5, trace_b.values.clone()).unwrap();

    let ab = pattern_compare(&pat_a, 0.0, &trace_b).unwrap();
    let ba = pattern_compare(&pat_b, 0.0, &trace_a).unwrap();
    // Same support (identical grids, same lobe), so the pointwise dB
    // differences are negatives of each other.
    assert_eq!(ab.samples, ba.samples);
    assert!(
        (ab.rms_db_error - ba.rms_db_error).abs() <= 1e-9,
        "{} vs {}",
        ab.rms_db_error,
        ba.rms_db_error
    );
}

#[test]
fn disjoint_supports_are_rejected() {
    let p = beam_pattern();
    let thetas: Vec<f64> = (0..4).map(|i| -89.0 + i as f64).collect();
    let values = vec![Complex64::new(1.0, 0.0); 4];
    let trace = S21Trace::new(thetas, values, 3.5e9, TraceLabel::Scat).unwrap();
    // The trace only covers angles far outside the main lobe.
    assert!(pattern_compare(&p, 0.0, &trace).is_err());
}
