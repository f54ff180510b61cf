//! Measurement post-processing: complex background subtraction of S21
//! traces and simulation-vs-measurement comparison on a cut.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

use crate::error::{Result, RisError};
use crate::field::ComplexPattern;

/// What a trace captured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceLabel {
    /// Environment only, surface absent.
    Env,
    /// Surface plus environment.
    Total,
    /// Background-subtracted scattering.
    Scat,
}

impl std::fmt::Display for TraceLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TraceLabel::Env => write!(f, "env"),
            TraceLabel::Total => write!(f, "total"),
            TraceLabel::Scat => write!(f, "scat"),
        }
    }
}

impl std::str::FromStr for TraceLabel {
    type Err = RisError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "env" => Ok(TraceLabel::Env),
            "total" => Ok(TraceLabel::Total),
            "scat" => Ok(TraceLabel::Scat),
            other => Err(RisError::Parse(format!("unknown trace label '{other}'"))),
        }
    }
}

/// Complex S21 vs receiver angle on one cut (5-degree stepping by
/// default in the shipped examples).
#[derive(Debug, Clone, PartialEq)]
pub struct S21Trace {
    pub theta_deg: Vec<f64>,
    pub values: Vec<Complex64>,
    pub frequency_hz: f64,
    pub label: TraceLabel,
}

impl S21Trace {
    pub fn new(
        theta_deg: Vec<f64>,
        values: Vec<Complex64>,
        frequency_hz: f64,
        label: TraceLabel,
    ) -> Result<Self> {
        if theta_deg.len() != values.len() || theta_deg.is_empty() {
            return Err(RisError::DimensionMismatch(
                "trace needs matching non-empty angle and value lists".into(),
            ));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(RisError::InvalidInput("trace values must be finite".into()));
        }
        Ok(Self {
            theta_deg,
            values,
            frequency_hz,
            label,
        })
    }
}

/// S21_scat = S21_total - S21_env, pointwise complex subtraction.
/// Grids and frequencies must match exactly.
pub fn background_subtract(total: &S21Trace, env: &S21Trace) -> Result<S21Trace> {
    if total.theta_deg != env.theta_deg {
        return Err(RisError::IncompatibleTraces(
            "angle grids differ".into(),
        ));
    }
    if total.frequency_hz != env.frequency_hz {
        return Err(RisError::IncompatibleTraces(format!(
            "frequencies differ: {} vs {}",
            total.frequency_hz, env.frequency_hz
        )));
    }
    let values = total
        .values
        .iter()
        .zip(&env.values)
        .map(|(t, e)| t - e)
        .collect();
    S21Trace::new(
        total.theta_deg.clone(),
        values,
        total.frequency_hz,
        TraceLabel::Scat,
    )
}

/// Peak offset and in-lobe dB error between a simulated cut and a trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub peak_offset_deg: f64,
    /// RMS of the dB difference over the simulated pattern's -10 dB
    /// main-lobe region, both sides normalized to their own peak.
    pub rms_db_error: f64,
    /// Trace samples that entered the RMS.
    pub samples: usize,
}

/// Compare a simulated pattern cut against a measured trace.
///
/// Both are normalized to their own peak. The main-lobe region is where
/// the simulated cut stays within 10 dB of its peak, walked outward from
/// the peak; the simulated curve is linearly interpolated in dB onto the
/// trace angles inside that region.
pub fn pattern_compare(
    pattern: &ComplexPattern,
    cut_phi_deg: f64,
    trace: &S21Trace,
) -> Result<CompareReport> {
    let sim_mags = pattern.cut_magnitudes(cut_phi_deg)?;
    let sim_theta = pattern.grid().theta_samples();
    let sim_peak = sim_mags.iter().copied().fold(0.0, f64::max);
    let meas_peak = trace.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if sim_peak == 0.0 || meas_peak == 0.0 {
        return Err(RisError::EmptyPattern);
    }

    let sim_db: Vec<f64> = sim_mags
        .iter()
        .map(|&m| to_db(m / sim_peak))
        .collect();
    let meas_db: Vec<f64> = trace
        .values
        .iter()
        .map(|v| to_db(v.norm() / meas_peak))
        .collect();

    let sim_peak_idx = argmax(&sim_mags);
    let meas_peak_idx = argmax(&trace.values.iter().map(|v| v.norm()).collect::<Vec<_>>());
    let peak_offset_deg = (sim_theta[sim_peak_idx] - trace.theta_deg[meas_peak_idx]).abs();

    // Main-lobe span in simulated angles: contiguous region >= -10 dB.
    let mut lo = sim_peak_idx;
    while lo > 0 && sim_db[lo - 1] >= -10.0 {
        lo -= 1;
    }
    let mut hi = sim_peak_idx;
    while hi + 1 < sim_db.len() && sim_db[hi + 1] >= -10.0 {
        hi += 1;
    }
    let (lobe_lo, lobe_hi) = (sim_theta[lo], sim_theta[hi]);

    let mut sum_sq = 0.0;
    let mut count = 0usize;
    for (i, &t) in trace.theta_deg.iter().enumerate() {
        if t < lobe_lo - 1e-9 || t > lobe_hi + 1e-9 {
            continue;
        }
        let Some(sim_at) = interp(sim_theta, &sim_db, t) else {
            continue;
        };
        let d = sim_at - meas_db[i];
        sum_sq += d * d;
        count += 1;
    }
    if count == 0 {
        return Err(RisError::IncompatibleTraces(
            "no trace samples fall inside the simulated main lobe".into(),
        ));
    }
    Ok(CompareReport {
        peak_offset_deg,
        rms_db_error: (sum_sq / count as f64).sqrt(),
        samples: count,
    })
}

fn to_db(ratio: f64) -> f64 {
    if ratio <= 0.0 {
        crate::field::DB_FLOOR
    } else {
        (20.0 * ratio.log10()).max(crate::field::DB_FLOOR)
    }
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > values[best] { i } else { best })
}

/// Linear interpolation of y(x) at `at`; None outside the x range.
fn interp(x: &[f64], y: &[f64], at: f64) -> Option<f64> {
    if at < x[0] - 1e-9 || at > x[x.len() - 1] + 1e-9 {
        return None;
    }
    match x.iter().position(|&xi| xi >= at - 1e-9) {
        Some(0) => Some(y[0]),
        Some(i) => {
            let frac = (at - x[i - 1]) / (x[i] - x[i - 1]);
            Some(y[i - 1] + frac * (y[i] - y[i - 1]))
        }
        None => Some(y[y.len() - 1]),
    }
}

// ── trace CSV interchange ───────────────────────────────────────────────

/// Trace files carry `# key=value` metadata lines before the header:
/// `# freq_hz=...` and `# label=...`, then `theta_deg,re,im` rows.
pub fn write_trace_csv<W: Write>(mut w: W, trace: &S21Trace) -> Result<()> {
    writeln!(w, "# freq_hz={}", trace.frequency_hz)?;
    writeln!(w, "# label={}", trace.label)?;
    writeln!(w, "theta_deg,re,im")?;
    for (t, v) in trace.theta_deg.iter().zip(&trace.values) {
        writeln!(w, "{},{},{}", t, v.re, v.im)?;
    }
    Ok(())
}

pub fn read_trace_csv<R: BufRead>(r: R) -> Result<S21Trace> {
    let mut frequency_hz: Option<f64> = None;
    let mut label: Option<TraceLabel> = None;
    let mut theta = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(meta) = t.strip_prefix('#') {
            let meta = meta.trim();
            if let Some(v) = meta.strip_prefix("freq_hz=") {
                frequency_hz = Some(v.trim().parse().map_err(|e| {
                    RisError::Parse(format!("line {}: bad freq_hz: {e}", lineno + 1))
                })?);
            } else if let Some(v) = meta.strip_prefix("label=") {
                label = Some(v.trim().parse()?);
            }
            continue;
        }
        if t.starts_with("theta_deg") {
            continue;
        }
        let fields: Vec<&str> = t.split(',').collect();
        if fields.len() != 3 {
            return Err(RisError::Parse(format!(
                "line {}: expected 3 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| RisError::Parse(format!("line {}: {e}", lineno + 1)))
        };
        theta.push(parse(fields[0])?);
        let re = parse(fields[1])?;
        let im = parse(fields[2])?;
        values.push(Complex64::new(re, im));
    }
    let frequency_hz =
        frequency_hz.ok_or_else(|| RisError::Parse("missing # freq_hz= metadata".into()))?;
    let label = label.ok_or_else(|| RisError::Parse("missing # label= metadata".into()))?;
    S21Trace::new(theta, values, frequency_hz, label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::AngleGrid;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn five_deg_thetas() -> Vec<f64> {
        (0..19).map(|i| -45.0 + 5.0 * i as f64).collect()
    }

    #[test]
    fn subtract_total_equals_env_gives_zero() {
        let thetas = five_deg_thetas();
        let vals: Vec<Complex64> = thetas.iter().map(|&t| c(t * 0.01, -t * 0.02)).collect();
        let total = S21Trace::new(thetas.clone(), vals.clone(), 3.5e9, TraceLabel::Total).unwrap();
        let env = S21Trace::new(thetas, vals, 3.5e9, TraceLabel::Env).unwrap();
        let scat = background_subtract(&total, &env).unwrap();
        assert!(scat.values.iter().all(|v| v.norm() == 0.0));
        assert_eq!(scat.label, TraceLabel::Scat);
    }

    #[test]
    fn subtract_zero_env_is_identity() {
        let thetas = five_deg_thetas();
        let vals: Vec<Complex64> = thetas.iter().map(|&t| c(0.1, t * 1e-3)).collect();
        let total = S21Trace::new(thetas.clone(), vals.clone(), 3.5e9, TraceLabel::Total).unwrap();
        let env = S21Trace::new(
            thetas,
            vec![c(0.0, 0.0); vals.len()],
            3.5e9,
            TraceLabel::Env,
        )
        .unwrap();
        let scat = background_subtract(&total, &env).unwrap();
        assert_eq!(scat.values, vals);
    }

    #[test]
    fn subtract_pointwise_complex_arithmetic() {
        let thetas = five_deg_thetas();
        let n = thetas.len();
        let total =
            S21Trace::new(thetas.clone(), vec![c(0.3, 0.1); n], 3.5e9, TraceLabel::Total).unwrap();
        let env = S21Trace::new(thetas, vec![c(0.1, -0.2); n], 3.5e9, TraceLabel::Env).unwrap();
        let scat = background_subtract(&total, &env).unwrap();
        for v in scat.values {
            assert!((v - c(0.2, 0.3)).norm() < 1e-15);
        }
    }

    #[test]
    fn subtract_rejects_grid_mismatch() {
        let a = S21Trace::new(vec![0.0, 5.0], vec![c(1.0, 0.0); 2], 3.5e9, TraceLabel::Total)
            .unwrap();
        let b = S21Trace::new(vec![0.0, 10.0], vec![c(1.0, 0.0); 2], 3.5e9, TraceLabel::Env)
            .unwrap();
        assert!(matches!(
            background_subtract(&a, &b),
            Err(RisError::IncompatibleTraces(_))
        ));
    }

    #[test]
    fn subtraction_is_linear_in_halves() {
        let thetas = five_deg_thetas();
        let n = thetas.len();
        let total = S21Trace::new(
            thetas.clone(),
            (0..n).map(|i| c(i as f64, -(i as f64))).collect(),
            3.5e9,
            TraceLabel::Total,
        )
        .unwrap();
        let env_vals: Vec<Complex64> = (0..n).map(|i| c(0.5 * i as f64, 0.25)).collect();
        let env = S21Trace::new(thetas.clone(), env_vals.clone(), 3.5e9, TraceLabel::Env).unwrap();
        let half = S21Trace::new(
            thetas,
            env_vals.iter().map(|v| v * 0.5).collect(),
            3.5e9,
            TraceLabel::Env,
        )
        .unwrap();
        let once = background_subtract(&total, &env).unwrap();
        let twice = background_subtract(&background_subtract(&total, &half).unwrap(), &half)
            .unwrap();
        for (a, b) in once.values.iter().zip(&twice.values) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    fn lobe_pattern() -> ComplexPattern {
        let grid = AngleGrid::theta_sweep(-90.0, 90.0, 1.0, &[0.0]).unwrap();
        let values: Vec<Complex64> = grid
            .theta_samples()
            .iter()
            .map(|&t| {
                let x: f64 = (t - 10.0) / 25.0;
                c((1.0 - x.abs()).max(0.02), 0.0)
            })
            .collect();
        ComplexPattern::new(grid, values).unwrap()
    }

    #[test]
    fn compare_identical_samples_is_exact() {
        let p = lobe_pattern();
        let thetas: Vec<f64> = (0..25).map(|i| -50.0 + 5.0 * i as f64).collect();
        let values: Vec<Complex64> = thetas
            .iter()
            .map(|&t| {
                let it = p.grid().theta_index_of(t).unwrap();
                p.value(it, 0)
            })
            .collect();
        let trace = S21Trace::new(thetas, values, 3.5e9, TraceLabel::Scat).unwrap();
        let report = pattern_compare(&p, 0.0, &trace).unwrap();
        assert_eq!(report.peak_offset_deg, 0.0);
        assert!(report.rms_db_error < 1e-9);
    }

    #[test]
    fn compare_shifted_trace_reports_peak_offset() {
        let p = lobe_pattern();
        let thetas: Vec<f64> = (0..25).map(|i| -50.0 + 5.0 * i as f64).collect();
        let values: Vec<Complex64> = thetas
            .iter()
            .map(|&t| {
                let shifted = (t - 5.0).clamp(-90.0, 90.0);
                let it = p.grid().theta_index_of(shifted).unwrap();
                p.value(it, 0)
            })
            .collect();
        let trace = S21Trace::new(thetas, values, 3.5e9, TraceLabel::Scat).unwrap();
        let report = pattern_compare(&p, 0.0, &trace).unwrap();
        assert_eq!(report.peak_offset_deg, 5.0);
    }

    #[test]
    fn trace_csv_round_trip() {
        let trace = S21Trace::new(
            five_deg_thetas(),
            five_deg_thetas()
                .iter()
                .map(|&t| c(t * 1e-3, 0.5 - t * 1e-3))
                .collect(),
            3.5e9,
            TraceLabel::Total,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &trace).unwrap();
        let back = read_trace_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(trace, back);
    }
}
