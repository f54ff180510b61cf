//! Equivalent circuit of the planar spiral inductor: a series via
//! inductance feeding a parallel L-C tank. The tank resonance blocks the
//! high band while the whole structure passes DC and the low band like a
//! plain wire.
//!
//! # Example
//!
//! ```
//! use ris_core::psi::{resonant_frequency_hz, PsiCircuit};
//!
//! let c = PsiCircuit::new(1.0e-9, 32.30e-15, 0.1e-9);
//! assert!((resonant_frequency_hz(&c) / 28.0e9 - 1.0).abs() < 1e-3);
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RisError};
use crate::field::DB_FLOOR;

/// Port reference impedance for isolation sweeps.
pub const Z0_OHM: f64 = 50.0;

/// Series L_V into a parallel (L_S, C_SP) tank; `r_s_ohm` is an optional
/// series resistance in the spiral branch (0 = lossless).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiCircuit {
    pub l_s_h: f64,
    pub c_sp_f: f64,
    pub l_v_h: f64,
    #[serde(default)]
    pub r_s_ohm: f64,
}

impl PsiCircuit {
    pub fn new(l_s_h: f64, c_sp_f: f64, l_v_h: f64) -> Self {
        Self {
            l_s_h,
            c_sp_f,
            l_v_h,
            r_s_ohm: 0.0,
        }
    }

    pub fn with_loss(mut self, r_s_ohm: f64) -> Self {
        self.r_s_ohm = r_s_ohm;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.l_s_h <= 0.0 || self.c_sp_f <= 0.0 || self.l_v_h <= 0.0 {
            return Err(RisError::InvalidInput(
                "psi circuit values must be positive".into(),
            ));
        }
        if self.r_s_ohm < 0.0 {
            return Err(RisError::InvalidInput("series resistance must be >= 0".into()));
        }
        Ok(())
    }
}

/// Linear frequency sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencySweep {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub points: usize,
}

impl FrequencySweep {
    pub fn new(start_hz: f64, stop_hz: f64, points: usize) -> Result<Self> {
        if start_hz >= stop_hz || points < 2 {
            return Err(RisError::InvalidInput(
                "sweep needs start < stop and at least 2 points".into(),
            ));
        }
        Ok(Self {
            start_hz,
            stop_hz,
            points,
        })
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let step = (self.stop_hz - self.start_hz) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| self.start_hz + step * i as f64)
            .collect()
    }
}

/// Tank resonance 1 / (2 pi sqrt(C_SP L_S)); the via inductance L_V does
/// not move it.
pub fn resonant_frequency_hz(c: &PsiCircuit) -> f64 {
    1.0 / (2.0 * std::f64::consts::PI * (c.c_sp_f * c.l_s_h).sqrt())
}

/// Two-terminal series impedance of the structure at `f_hz`.
pub fn series_impedance(c: &PsiCircuit, f_hz: f64) -> Complex64 {
    let omega = 2.0 * std::f64::consts::PI * f_hz;
    let z_spiral = Complex64::new(c.r_s_ohm, omega * c.l_s_h);
    let z_cap = Complex64::new(0.0, -1.0 / (omega * c.c_sp_f));
    let tank = z_spiral * z_cap / (z_spiral + z_cap);
    Complex64::new(0.0, omega * c.l_v_h) + tank
}

/// |S21| in dB of a series impedance between matched ports:
/// S21 = 2 Z0 / (2 Z0 + Z).
fn s21_db_of_series(z: Complex64) -> f64 {
    let s21 = Complex64::new(2.0 * Z0_OHM, 0.0) / (Complex64::new(2.0 * Z0_OHM, 0.0) + z);
    let mag = s21.norm();
    if mag <= 0.0 {
        DB_FLOOR
    } else {
        (20.0 * mag.log10()).max(DB_FLOOR)
    }
}

/// Isolation sweep of a single structure: (frequency, |S21| dB) rows.
pub fn two_port_isolation(c: &PsiCircuit, sweep: &FrequencySweep) -> Result<Vec<(f64, f64)>> {
    c.validate()?;
    Ok(sweep
        .frequencies()
        .iter()
        .map(|&f| (f, s21_db_of_series(series_impedance(c, f))))
        .collect())
}

/// 2x2 ABCD (chain) matrix.
#[derive(Debug, Clone, Copy)]
pub struct Abcd {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Abcd {
    pub fn series(z: Complex64) -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            b: z,
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    pub fn chain(&self, other: &Abcd) -> Self {
        Self {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn s21(&self, z0: f64) -> Complex64 {
        let denom = self.a + self.b / z0 + self.c * z0 + self.d;
        Complex64::new(2.0, 0.0) / denom
    }

    pub fn s12(&self, z0: f64) -> Complex64 {
        let det = self.a * self.d - self.b * self.c;
        let denom = self.a + self.b / z0 + self.c * z0 + self.d;
        det * Complex64::new(2.0, 0.0) / denom
    }
}

/// Isolation sweep of two cascaded structures (ABCD chain).
pub fn cascade_isolation(
    c1: &PsiCircuit,
    c2: &PsiCircuit,
    sweep: &FrequencySweep,
) -> Result<Vec<(f64, f64)>> {
    c1.validate()?;
    c2.validate()?;
    Ok(sweep
        .frequencies()
        .iter()
        .map(|&f| {
            let chain = Abcd::series(series_impedance(c1, f))
                .chain(&Abcd::series(series_impedance(c2, f)));
            let mag = chain.s21(Z0_OHM).norm();
            let db = if mag <= 0.0 {
                DB_FLOOR
            } else {
                (20.0 * mag.log10()).max(DB_FLOOR)
            };
            (f, db)
        })
        .collect())
}

pub fn write_sweep_csv<W: std::io::Write>(mut w: W, rows: &[(f64, f64)]) -> Result<()> {
    writeln!(w, "freq_hz,s21_db")?;
    for (f, db) in rows {
        writeln!(w, "{f},{db}")?;
    }
    Ok(())
}

pub fn read_circuit_json<R: std::io::BufRead>(r: R) -> Result<PsiCircuit> {
    let c: PsiCircuit =
        serde_json::from_reader(r).map_err(|e| RisError::Parse(format!("circuit json: {e}")))?;
    c.validate()?;
    Ok(c)
}

pub fn write_circuit_json<W: std::io::Write>(w: W, c: &PsiCircuit) -> Result<()> {
    serde_json::to_writer_pretty(w, c)
        .map_err(|e| RisError::Parse(format!("circuit serialization failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> PsiCircuit {
        PsiCircuit::new(1.0e-9, 32.30e-15, 0.1e-9)
    }

    #[test]
    fn resonance_hits_28_ghz() {
        let f = resonant_frequency_hz(&reference());
        assert!((f / 28.0e9 - 1.0).abs() < 1e-3, "f = {f}");
    }

    #[test]
    fn resonance_square_root_law() {
        let c = reference();
        let scaled = PsiCircuit::new(c.l_s_h * 4.0, c.c_sp_f * 4.0, c.l_v_h);
        assert!(
            (resonant_frequency_hz(&scaled) - resonant_frequency_hz(&c) / 4.0).abs()
                < 1e-3 * resonant_frequency_hz(&c)
        );
    }

    #[test]
    fn via_inductor_does_not_move_resonance() {
        let c = reference();
        let other = PsiCircuit::new(c.l_s_h, c.c_sp_f, c.l_v_h * 10.0);
        assert_eq!(resonant_frequency_hz(&c), resonant_frequency_hz(&other));
    }

    #[test]
    fn dc_limit_passes_through() {
        let c = reference();
        let sweep = FrequencySweep::new(1e6, 2e6, 2).unwrap();
        let rows = two_port_isolation(&c, &sweep).unwrap();
        assert!(rows[0].1 > -0.01, "s21 at 1 MHz = {} dB", rows[0].1);
    }

    #[test]
    fn lossless_resonance_floors_out() {
        // Evaluate exactly at resonance: the tank impedance diverges and
        // |S21| pins to the floor.
        let c = reference();
        let f0 = resonant_frequency_hz(&c);
        let db = s21_db_of_series(series_impedance(&c, f0));
        assert_eq!(db, DB_FLOOR);
    }

    #[test]
    fn dip_sits_at_resonance_within_one_step() {
        let c = reference();
        let sweep = FrequencySweep::new(26e9, 30e9, 401).unwrap();
        let rows = two_port_isolation(&c, &sweep).unwrap();
        let (dip_f, _) = rows
            .iter()
            .copied()
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        let step = (30e9 - 26e9) / 400.0;
        assert!((dip_f - resonant_frequency_hz(&c)).abs() <= step);
    }

    #[test]
    fn larger_capacitance_moves_dip_down() {
        let c = reference();
        let bigger_cap = PsiCircuit::new(c.l_s_h, c.c_sp_f * 1.3, c.l_v_h);
        let sweep = FrequencySweep::new(20e9, 32e9, 1201).unwrap();
        let dip = |circuit: &PsiCircuit| {
            two_port_isolation(circuit, &sweep)
                .unwrap()
                .into_iter()
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap()
                .0
        };
        assert!(dip(&bigger_cap) < dip(&c));
    }

    #[test]
    fn larger_spiral_inductance_moves_dip_down() {
        let c = reference();
        let bigger_l = PsiCircuit::new(c.l_s_h * 1.3, c.c_sp_f, c.l_v_h);
        let sweep = FrequencySweep::new(20e9, 32e9, 1201).unwrap();
        let dip = |circuit: &PsiCircuit| {
            two_port_isolation(circuit, &sweep)
                .unwrap()
                .into_iter()
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap()
                .0
        };
        assert!(dip(&bigger_l) < dip(&c));
    }

    #[test]
    fn identical_cascade_doubles_series_impedance() {
        let c = reference();
        for f in [26e9, 27.3e9, 29e9] {
            let z1 = series_impedance(&c, f);
            let chain = Abcd::series(z1).chain(&Abcd::series(z1));
            assert!((chain.b - z1 * 2.0).norm() < 1e-9 * z1.norm());
            assert_eq!(chain.a, Complex64::new(1.0, 0.0));
            assert_eq!(chain.c, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn identical_cascade_never_loses_isolation() {
        let c = reference().with_loss(1.0);
        let sweep = FrequencySweep::new(24e9, 32e9, 801).unwrap();
        let single = two_port_isolation(&c, &sweep).unwrap();
        let double = cascade_isolation(&c, &c, &sweep).unwrap();
        for (s, d) in single.iter().zip(&double) {
            assert!(d.1 <= s.1 + 1e-9, "at {} Hz: {} vs {}", s.0, d.1, s.1);
        }
    }

    #[test]
    fn cascade_with_zero_impedance_dummy_is_identity() {
        let c = reference();
        for f in [25e9, 28e9, 31e9] {
            let z = series_impedance(&c, f);
            let chain = Abcd::series(z).chain(&Abcd::series(Complex64::new(0.0, 0.0)));
            assert_eq!(chain.b, z);
            assert!((chain.s21(Z0_OHM) - Abcd::series(z).s21(Z0_OHM)).norm() < 1e-15);
        }
    }

    #[test]
    fn reciprocity_s12_equals_s21() {
        let c1 = reference().with_loss(1.5);
        let c2 = PsiCircuit::new(1.1e-9, 30e-15, 0.15e-9).with_loss(2.0);
        for f in [26e9, 27.9e9, 28.6e9, 30e9] {
            let chain = Abcd::series(series_impedance(&c1, f))
                .chain(&Abcd::series(series_impedance(&c2, f)));
            assert!((chain.s21(Z0_OHM) - chain.s12(Z0_OHM)).norm() < 1e-12);
        }
    }

    #[test]
    fn impedance_peak_scan_locates_resonance() {
        // Independent check of the closed-form resonance: scan |Z_tank| on
        // a fine grid and compare the argmax.
        let c = reference();
        let f0 = resonant_frequency_hz(&c);
        let n = 20001;
        let lo = 27e9;
        let hi = 29e9;
        let step = (hi - lo) / (n - 1) as f64;
        let mut best = (0.0, 0.0);
        for i in 0..n {
            let f = lo + step * i as f64;
            // Tank only: subtract the via contribution.
            let omega = 2.0 * std::f64::consts::PI * f;
            let tank = series_impedance(&c, f) - Complex64::new(0.0, omega * c.l_v_h);
            if tank.norm() > best.1 {
                best = (f, tank.norm());
            }
        }
        assert!((best.0 - f0).abs() <= step, "scan {} vs formula {}", best.0, f0);
    }

    #[test]
    fn circuit_json_round_trip() {
        let c = reference().with_loss(2.5);
        let mut buf = Vec::new();
        write_circuit_json(&mut buf, &c).unwrap();
        let back = read_circuit_json(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(c, back);
    }
}
