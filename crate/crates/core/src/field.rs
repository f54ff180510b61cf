//! Angle grids, complex far-field patterns, and scalar pattern metrics.
//!
//! Patterns are scalar complex fields sampled on a rectangular
//! (theta, phi) grid in degrees. Everything downstream (the scattering
//! engine, codebook search, measurement comparison) works in terms of
//! these containers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

use crate::error::{Result, RisError};

/// Level assigned to zero-magnitude samples in dB exports.
pub const DB_FLOOR: f64 = -120.0;

const ANGLE_EPS: f64 = 1e-9;

/// Rectangular angle grid in degrees: theta in [-90, 90], phi in [0, 360).
///
/// Both axes must be uniformly stepped; the declared step is stored with
/// the grid (a single-sample axis stores step 0).
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid {
    theta_deg: Vec<f64>,
    phi_deg: Vec<f64>,
    theta_step_deg: f64,
    phi_step_deg: f64,
}

impl AngleGrid {
    pub fn new(theta_deg: Vec<f64>, phi_deg: Vec<f64>) -> Result<Self> {
        if theta_deg.is_empty() || phi_deg.is_empty() {
            return Err(RisError::InvalidGrid("grid axes must be non-empty".into()));
        }
        for &t in &theta_deg {
            if !(-90.0 - ANGLE_EPS..=90.0 + ANGLE_EPS).contains(&t) {
                return Err(RisError::InvalidGrid(format!(
                    "theta sample {t} outside [-90, 90]"
                )));
            }
        }
        for &p in &phi_deg {
            if !(-ANGLE_EPS..360.0).contains(&p) {
                return Err(RisError::InvalidGrid(format!(
                    "phi sample {p} outside [0, 360)"
                )));
            }
        }
        let theta_step_deg = uniform_step(&theta_deg, "theta")?;
        let phi_step_deg = uniform_step(&phi_deg, "phi")?;
        Ok(Self {
            theta_deg,
            phi_deg,
            theta_step_deg,
            phi_step_deg,
        })
    }

    /// Uniform theta sweep over a fixed list of phi cuts.
    pub fn theta_sweep(start: f64, stop: f64, step: f64, phi_deg: &[f64]) -> Result<Self> {
        if step <= 0.0 || stop <= start {
            return Err(RisError::InvalidGrid(
                "theta sweep needs stop > start and step > 0".into(),
            ));
        }
        let count = ((stop - start) / step).round() as usize + 1;
        let theta: Vec<f64> = (0..count).map(|i| start + step * i as f64).collect();
        Self::new(theta, phi_deg.to_vec())
    }

    pub fn theta_samples(&self) -> &[f64] {
        &self.theta_deg
    }

    pub fn phi_samples(&self) -> &[f64] {
        &self.phi_deg
    }

    pub fn theta_step_deg(&self) -> f64 {
        self.theta_step_deg
    }

    pub fn phi_step_deg(&self) -> f64 {
        self.phi_step_deg
    }

    pub fn n_theta(&self) -> usize {
        self.theta_deg.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phi_deg.len()
    }

    pub fn len(&self) -> usize {
        self.n_theta() * self.n_phi()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees non-empty axes
    }

    /// Flat index of grid point (theta index, phi index); theta is the
    /// outer axis.
    pub fn index(&self, i_theta: usize, i_phi: usize) -> usize {
        i_theta * self.n_phi() + i_phi
    }

    pub fn point(&self, flat: usize) -> (f64, f64) {
        let it = flat / self.n_phi();
        let ip = flat % self.n_phi();
        (self.theta_deg[it], self.phi_deg[ip])
    }

    pub fn theta_index_of(&self, theta: f64) -> Option<usize> {
        self.theta_deg
            .iter()
            .position(|&t| (t - theta).abs() < ANGLE_EPS)
    }

    pub fn phi_index_of(&self, phi: f64) -> Option<usize> {
        self.phi_deg
            .iter()
            .position(|&p| (p - phi).abs() < ANGLE_EPS)
    }

    /// True when the direction lies inside the covered angular ranges.
    pub fn contains_direction(&self, theta: f64, phi: f64) -> bool {
        let t_lo = *self.theta_deg.first().unwrap();
        let t_hi = *self.theta_deg.last().unwrap();
        (t_lo - ANGLE_EPS..=t_hi + ANGLE_EPS).contains(&theta)
            && (-ANGLE_EPS..360.0).contains(&phi)
    }
}

fn uniform_step(samples: &[f64], axis: &str) -> Result<f64> {
    if samples.len() < 2 {
        return Ok(0.0);
    }
    let step = samples[1] - samples[0];
    if step <= 0.0 {
        return Err(RisError::InvalidGrid(format!(
            "{axis} samples must be strictly increasing"
        )));
    }
    for w in samples.windows(2) {
        if ((w[1] - w[0]) - step).abs() > ANGLE_EPS {
            return Err(RisError::InvalidGrid(format!(
                "{axis} step is not uniform: {} vs {step}",
                w[1] - w[0]
            )));
        }
    }
    Ok(step)
}

/// Complex far-field amplitude sampled on an [`AngleGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPattern {
    grid: AngleGrid,
    values: Vec<Complex64>,
}

impl ComplexPattern {
    pub fn new(grid: AngleGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(RisError::DimensionMismatch(format!(
                "pattern has {} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(RisError::InvalidInput(
                "pattern values must all be finite".into(),
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn zero(grid: AngleGrid) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn grid(&self) -> &AngleGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, i_theta: usize, i_phi: usize) -> Complex64 {
        self.values[self.grid.index(i_theta, i_phi)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.norm() == 0.0)
    }

    /// Magnitudes along a fixed-phi cut.
    pub fn cut_magnitudes(&self, cut_phi: f64) -> Result<Vec<f64>> {
        let ip = self.grid.phi_index_of(cut_phi).ok_or_else(|| {
            RisError::InvalidInput(format!("cut phi {cut_phi} not on grid"))
        })?;
        Ok((0..self.grid.n_theta())
            .map(|it| self.value(it, ip).norm())
            .collect())
    }

    /// Complex values along a fixed-phi cut.
    pub fn cut_values(&self, cut_phi: f64) -> Result<Vec<Complex64>> {
        let ip = self.grid.phi_index_of(cut_phi).ok_or_else(|| {
            RisError::InvalidInput(format!("cut phi {cut_phi} not on grid"))
        })?;
        Ok((0..self.grid.n_theta())
            .map(|it| self.value(it, ip))
            .collect())
    }

    /// Keep every k-th theta sample so the cut step becomes `step_deg`.
    /// The requested step must be an integer multiple of the grid step.
    pub fn resample_theta(&self, step_deg: f64) -> Result<ComplexPattern> {
        let own = self.grid.theta_step_deg();
        if own <= 0.0 {
            return Err(RisError::InvalidGrid(
                "cannot resample a single-sample theta axis".into(),
            ));
        }
        let ratio = step_deg / own;
        if (ratio.round() - ratio).abs() > 1e-9 || ratio < 1.0 {
            return Err(RisError::InvalidInput(format!(
                "export step {step_deg} is not a multiple of grid step {own}"
            )));
        }
        let k = ratio.round() as usize;
        let theta: Vec<f64> = self
            .grid
            .theta_deg
            .iter()
            .copied()
            .step_by(k)
            .collect();
        let grid = AngleGrid::new(theta, self.grid.phi_deg.clone())?;
        let mut values = Vec::with_capacity(grid.len());
        for it in (0..self.grid.n_theta()).step_by(k) {
            for ip in 0..self.grid.n_phi() {
                values.push(self.value(it, ip));
            }
        }
        ComplexPattern::new(grid, values)
    }
}

/// Summary of a pattern cut: where the beam points and how clean it is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternMetrics {
    pub peak_theta_deg: f64,
    pub peak_phi_deg: f64,
    /// Cut-peak level relative to the pattern's global maximum (<= 0).
    pub peak_level_db: f64,
    /// Largest level outside the main lobe, dB below the cut peak (<= 0).
    pub sidelobe_level_db: f64,
    pub half_power_beamwidth_deg: f64,
}

/// 20*log10 magnitude normalized so the peak sits at exactly 0 dB.
/// Zero samples are clamped to [`DB_FLOOR`].
pub fn pattern_db(p: &ComplexPattern) -> Result<Vec<f64>> {
    let peak = p.max_abs();
    if peak == 0.0 {
        return Err(RisError::EmptyPattern);
    }
    Ok(p.values
        .iter()
        .map(|v| db_rel(v.norm(), peak))
        .collect())
}

fn db_rel(mag: f64, reference: f64) -> f64 {
    if mag <= 0.0 {
        DB_FLOOR
    } else {
        (20.0 * (mag / reference).log10()).max(DB_FLOOR)
    }
}

/// Half-power threshold relative to the peak (1/sqrt(2) in magnitude).
const HALF_POWER_DB: f64 = -3.010299956639812;
/// A local minimum this far below the peak ends the main lobe even if the
/// magnitude is still falling.
const NULL_DB: f64 = -20.0;

/// Peak direction, sidelobe level and half-power beamwidth on a fixed-phi
/// cut.
///
/// The main lobe extends from the peak out to the first null on each side,
/// where a null is the first sample (walking outward) that either turns
/// back up or has dropped 20 dB below the cut peak. The sidelobe level is
/// the largest magnitude outside that span. Half-power crossings are
/// located by linear interpolation of the dB curve; the argmax tie-break
/// favors smaller theta.
pub fn pattern_metrics(p: &ComplexPattern, cut_phi: f64) -> Result<PatternMetrics> {
    let global_peak = p.max_abs();
    if global_peak == 0.0 {
        return Err(RisError::EmptyPattern);
    }
    let mags = p.cut_magnitudes(cut_phi)?;
    let cut_peak = mags.iter().copied().fold(0.0, f64::max);
    if cut_peak == 0.0 {
        return Err(RisError::EmptyPattern);
    }
    let peak_idx = mags
        .iter()
        .enumerate()
        .fold(0usize, |best, (i, &m)| if m > mags[best] { i } else { best });
    let theta = p.grid().theta_samples();

    let (lo, hi) = main_lobe_span(&mags, peak_idx, cut_peak);

    let mut sidelobe = 0.0_f64;
    for (i, &m) in mags.iter().enumerate() {
        if i < lo || i > hi {
            sidelobe = sidelobe.max(m);
        }
    }
    let sidelobe_level_db = db_rel(sidelobe, cut_peak);

    let threshold = cut_peak * 10f64.powf(HALF_POWER_DB / 20.0);
    let left = half_power_crossing(theta, &mags, peak_idx, threshold, false);
    let right = half_power_crossing(theta, &mags, peak_idx, threshold, true);
    let half_power_beamwidth_deg = right - left;

    Ok(PatternMetrics {
        peak_theta_deg: theta[peak_idx],
        peak_phi_deg: cut_phi,
        peak_level_db: db_rel(cut_peak, global_peak),
        sidelobe_level_db,
        half_power_beamwidth_deg,
    })
}

/// Null-to-null index span around the peak (inclusive).
fn main_lobe_span(mags: &[f64], peak: usize, cut_peak: f64) -> (usize, usize) {
    let null_mag = cut_peak * 10f64.powf(NULL_DB / 20.0);
    let mut lo = 0;
    let mut i = peak;
    while i > 0 {
        let next = mags[i - 1];
        if next > mags[i] || mags[i] <= null_mag {
            lo = i;
            break;
        }
        i -= 1;
    }
    let mut hi = mags.len() - 1;
    let mut i = peak;
    while i + 1 < mags.len() {
        let next = mags[i + 1];
        if next > mags[i] || mags[i] <= null_mag {
            hi = i;
            break;
        }
        i += 1;
    }
    (lo, hi)
}

/// Theta where the cut crosses `threshold`, walking from the peak in the
/// requested direction; clamps to the grid edge when no crossing exists.
fn half_power_crossing(
    theta: &[f64],
    mags: &[f64],
    peak: usize,
    threshold: f64,
    forward: bool,
) -> f64 {
    let db = |m: f64| db_rel(m, 1.0); // absolute dB, only differences matter
    let target_db = db(threshold);
    let mut i = peak;
    loop {
        let j = if forward {
            if i + 1 >= theta.len() {
                return theta[theta.len() - 1];
            }
            i + 1
        } else {
            if i == 0 {
                return theta[0];
            }
            i - 1
        };
        if mags[j] <= threshold {
            let d_i = db(mags[i]);
            let d_j = db(mags[j]);
            let frac = if (d_i - d_j).abs() < 1e-30 {
                0.0
            } else {
                (d_i - target_db) / (d_i - d_j)
            };
            return theta[i] + frac * (theta[j] - theta[i]);
        }
        i = j;
    }
}

// ── CSV interchange ─────────────────────────────────────────────────────

/// Write a pattern as `theta_deg,phi_deg,re,im` rows.
pub fn write_pattern_csv<W: Write>(mut w: W, p: &ComplexPattern) -> Result<()> {
    writeln!(w, "theta_deg,phi_deg,re,im")?;
    for it in 0..p.grid().n_theta() {
        for ip in 0..p.grid().n_phi() {
            let v = p.value(it, ip);
            writeln!(
                w,
                "{},{},{},{}",
                p.grid().theta_samples()[it],
                p.grid().phi_samples()[ip],
                v.re,
                v.im
            )?;
        }
    }
    Ok(())
}

/// Read a pattern written by [`write_pattern_csv`]. The rows must cover a
/// full rectangular grid in theta-outer order.
pub fn read_pattern_csv<R: BufRead>(r: R) -> Result<ComplexPattern> {
    let mut theta = Vec::new();
    let mut phi = Vec::new();
    let mut rows: Vec<(f64, f64, Complex64)> = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || (lineno == 0 && trimmed.starts_with("theta_deg")) {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 4 {
            return Err(RisError::Parse(format!(
                "line {}: expected 4 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|e| {
                RisError::Parse(format!("line {}: bad {what}: {e}", lineno + 1))
            })
        };
        let t = parse(fields[0], "theta")?;
        let p = parse(fields[1], "phi")?;
        let re = parse(fields[2], "re")?;
        let im = parse(fields[3], "im")?;
        if theta.iter().all(|&x: &f64| (x - t).abs() > ANGLE_EPS) {
            theta.push(t);
        }
        if phi.iter().all(|&x: &f64| (x - p).abs() > ANGLE_EPS) {
            phi.push(p);
        }
        rows.push((t, p, Complex64::new(re, im)));
    }
    let grid = AngleGrid::new(theta, phi)?;
    if rows.len() != grid.len() {
        return Err(RisError::Parse(format!(
            "expected {} rows for the grid, got {}",
            grid.len(),
            rows.len()
        )));
    }
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (t, p, v) in rows {
        let it = grid
            .theta_index_of(t)
            .ok_or_else(|| RisError::Parse(format!("theta {t} not on derived grid")))?;
        let ip = grid
            .phi_index_of(p)
            .ok_or_else(|| RisError::Parse(format!("phi {p} not on derived grid")))?;
        values[grid.index(it, ip)] = v;
    }
    ComplexPattern::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cut_grid() -> AngleGrid {
        AngleGrid::theta_sweep(-90.0, 90.0, 1.0, &[0.0]).unwrap()
    }

    fn pattern_from_fn(grid: AngleGrid, f: impl Fn(f64) -> Complex64) -> ComplexPattern {
        let values: Vec<Complex64> = grid.theta_samples().iter().map(|&t| f(t)).collect();
        ComplexPattern::new(grid, values).unwrap()
    }

    #[test]
    fn grid_rejects_nonuniform_step() {
        let err = AngleGrid::new(vec![0.0, 1.0, 3.0], vec![0.0]);
        assert!(err.is_err());
    }

    #[test]
    fn grid_rejects_out_of_range() {
        assert!(AngleGrid::new(vec![-91.0, 0.0], vec![0.0]).is_err());
        assert!(AngleGrid::new(vec![0.0], vec![360.0]).is_err());
    }

    #[test]
    fn db_all_equal_is_zero() {
        let grid = cut_grid();
        let p = pattern_from_fn(grid, |_| Complex64::new(2.0, 0.0));
        let db = pattern_db(&p).unwrap();
        assert!(db.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn db_half_amplitude() {
        let grid = AngleGrid::new(vec![0.0, 1.0], vec![0.0]).unwrap();
        let p = ComplexPattern::new(
            grid,
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)],
        )
        .unwrap();
        let db = pattern_db(&p).unwrap();
        assert!((db[0] - 0.0).abs() < 1e-12);
        assert!((db[1] + 6.020599913279624).abs() < 1e-9);
    }

    #[test]
    fn db_floor_for_zero_sample() {
        let grid = AngleGrid::new(vec![0.0, 1.0], vec![0.0]).unwrap();
        let p = ComplexPattern::new(
            grid,
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        )
        .unwrap();
        let db = pattern_db(&p).unwrap();
        assert_eq!(db[1], DB_FLOOR);
    }

    #[test]
    fn db_rejects_all_zero() {
        let p = ComplexPattern::zero(cut_grid());
        assert!(matches!(pattern_db(&p), Err(RisError::EmptyPattern)));
    }

    #[test]
    fn metrics_reject_all_zero() {
        let p = ComplexPattern::zero(cut_grid());
        assert!(matches!(
            pattern_metrics(&p, 0.0),
            Err(RisError::EmptyPattern)
        ));
    }

    #[test]
    fn metrics_uniform_broadside_peak() {
        // 8-element half-wavelength broadside array factor.
        let grid = cut_grid();
        let p = pattern_from_fn(grid, |t| {
            let u = t.to_radians().sin();
            let psi = std::f64::consts::PI * u;
            let num = (4.0 * psi).sin();
            let den = (psi / 2.0).sin();
            let af = if den.abs() < 1e-12 { 8.0 } else { num / den };
            Complex64::new(af, 0.0)
        });
        let m = pattern_metrics(&p, 0.0).unwrap();
        assert_eq!(m.peak_theta_deg, 0.0);
        assert_eq!(m.peak_level_db, 0.0);
        assert!(m.sidelobe_level_db < -12.0 && m.sidelobe_level_db > -14.0);
    }

    #[test]
    fn metrics_synthetic_lobe_at_20() {
        // |sin|-shaped single lobe centered on 20 degrees, zero elsewhere.
        let grid = cut_grid();
        let p = pattern_from_fn(grid, |t| {
            let x = (t - 20.0) / 15.0;
            if x.abs() <= 1.0 {
                Complex64::new((std::f64::consts::FRAC_PI_2 * (1.0 - x.abs())).sin(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let m = pattern_metrics(&p, 0.0).unwrap();
        assert_eq!(m.peak_theta_deg, 20.0);
    }

    #[test]
    fn metrics_tie_breaks_toward_smaller_theta() {
        let grid = AngleGrid::new(vec![-1.0, 0.0, 1.0], vec![0.0]).unwrap();
        let p = ComplexPattern::new(
            grid,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        )
        .unwrap();
        let m = pattern_metrics(&p, 0.0).unwrap();
        assert_eq!(m.peak_theta_deg, -1.0);
    }

    #[test]
    fn metrics_scaling_invariance() {
        let grid = cut_grid();
        let base = pattern_from_fn(grid.clone(), |t| {
            let u = t.to_radians().sin();
            let psi = std::f64::consts::PI * u;
            let den = (psi / 2.0).sin();
            let af = if den.abs() < 1e-12 {
                6.0
            } else {
                (3.0 * psi).sin() / den
            };
            Complex64::new(af, 0.0)
        });
        let scaled = ComplexPattern::new(
            grid,
            base.values()
                .iter()
                .map(|v| v * Complex64::new(-2.5, 1.5))
                .collect(),
        )
        .unwrap();
        let m0 = pattern_metrics(&base, 0.0).unwrap();
        let m1 = pattern_metrics(&scaled, 0.0).unwrap();
        assert_eq!(m0.peak_theta_deg, m1.peak_theta_deg);
        assert!((m0.sidelobe_level_db - m1.sidelobe_level_db).abs() < 1e-9);
        assert!((m0.half_power_beamwidth_deg - m1.half_power_beamwidth_deg).abs() < 1e-9);
    }

    #[test]
    fn resample_to_five_degrees() {
        let grid = cut_grid();
        let p = pattern_from_fn(grid, |t| Complex64::new(t, -t));
        let down = p.resample_theta(5.0).unwrap();
        assert_eq!(down.grid().n_theta(), 37);
        assert_eq!(down.grid().theta_step_deg(), 5.0);
        assert_eq!(down.value(0, 0), Complex64::new(-90.0, 90.0));
    }

    #[test]
    fn csv_round_trip() {
        let grid = AngleGrid::theta_sweep(-10.0, 10.0, 5.0, &[0.0, 90.0]).unwrap();
        let values: Vec<Complex64> = (0..grid.len())
            .map(|i| Complex64::new(i as f64 * 0.25, -(i as f64) * 0.5))
            .collect();
        let p = ComplexPattern::new(grid, values).unwrap();
        let mut buf = Vec::new();
        write_pattern_csv(&mut buf, &p).unwrap();
        let q = read_pattern_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(p, q);
    }
}
