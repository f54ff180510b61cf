//! Phase-gap entropy of a reconfigurable element's reflection-phase set.
//!
//! The 2^Q reflection phases are sorted, the gaps between neighbors (with
//! a wraparound gap closing the circle) are normalized by 360 degrees, and
//! their Shannon entropy in bits scores how evenly the states cover the
//! phase circle. Uniformly spaced phases score Q bits; coincident phases
//! score 0.
//!
//! # Example
//!
//! ```
//! use ris_core::entropy::{entropy_bits, PhaseSet};
//!
//! let uniform = PhaseSet::new(vec![0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0]).unwrap();
//! assert!((entropy_bits(&uniform) - 3.0).abs() < 1e-12);
//! ```

use crate::error::{Result, RisError};

/// The reflection phases of all 2^Q states of one element, in degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSet {
    phases_deg: Vec<f64>,
}

impl PhaseSet {
    pub fn new(phases_deg: Vec<f64>) -> Result<Self> {
        if phases_deg.is_empty() || !phases_deg.len().is_power_of_two() {
            return Err(RisError::InvalidInput(format!(
                "phase set length {} is not a power of two",
                phases_deg.len()
            )));
        }
        for &p in &phases_deg {
            if !(0.0..360.0).contains(&p) {
                return Err(RisError::InvalidInput(format!(
                    "phase {p} outside [0, 360)"
                )));
            }
        }
        Ok(Self { phases_deg })
    }

    pub fn phases_deg(&self) -> &[f64] {
        &self.phases_deg
    }

    /// log2 of the state count.
    pub fn bits(&self) -> u32 {
        self.phases_deg.len().trailing_zeros()
    }
}

/// Gaps between adjacent sorted phases, wrapping the last back to the
/// first; the gaps are non-negative and sum to 360.
pub fn phase_gaps(set: &PhaseSet) -> Vec<f64> {
    let mut sorted = set.phases_deg.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let mut gaps = Vec::with_capacity(n);
    for i in 0..n - 1 {
        gaps.push(sorted[i + 1] - sorted[i]);
    }
    gaps.push(360.0 + sorted[0] - sorted[n - 1]);
    gaps
}

/// Shannon entropy of the normalized gaps in bits, with 0 log 0 = 0.
pub fn entropy_bits(set: &PhaseSet) -> f64 {
    phase_gaps(set)
        .iter()
        .map(|&g| {
            let p = g / 360.0;
            if p <= 0.0 {
                0.0
            } else {
                -p * p.log2()
            }
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_quadrature_gaps() {
        let s = PhaseSet::new(vec![0.0, 90.0, 180.0, 270.0]).unwrap();
        assert_eq!(phase_gaps(&s), vec![90.0, 90.0, 90.0, 90.0]);
    }

    #[test]
    fn duplicate_phases_gap() {
        let s = PhaseSet::new(vec![0.0, 0.0]).unwrap();
        assert_eq!(phase_gaps(&s), vec![0.0, 360.0]);
    }

    #[test]
    fn wraparound_gap() {
        let s = PhaseSet::new(vec![10.0, 350.0]).unwrap();
        assert_eq!(phase_gaps(&s), vec![340.0, 20.0]);
    }

    #[test]
    fn gaps_sum_to_full_circle() {
        let s = PhaseSet::new(vec![12.5, 301.0, 7.0, 180.0]).unwrap();
        let total: f64 = phase_gaps(&s).iter().sum();
        assert!((total - 360.0).abs() < 1e-9);
    }

    #[test]
    fn eight_uniform_phases_reach_three_bits() {
        let phases: Vec<f64> = (0..8).map(|i| 45.0 * i as f64).collect();
        let s = PhaseSet::new(phases).unwrap();
        assert!((entropy_bits(&s) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn coincident_phases_have_zero_entropy() {
        let s = PhaseSet::new(vec![120.0; 8]).unwrap();
        assert_eq!(entropy_bits(&s), 0.0);
    }

    #[test]
    fn worked_two_bit_value() {
        // Gaps {120, 120, 60, 60} -> 1.9183 bits.
        let s = PhaseSet::new(vec![0.0, 120.0, 240.0, 300.0]).unwrap();
        assert!((entropy_bits(&s) - 1.9182958340544896).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(PhaseSet::new(vec![0.0, 10.0, 20.0]).is_err());
        assert!(PhaseSet::new(vec![]).is_err());
    }

    #[test]
    fn rejects_out_of_range_phase() {
        assert!(PhaseSet::new(vec![0.0, 360.0]).is_err());
        assert!(PhaseSet::new(vec![-1.0, 10.0]).is_err());
    }
}
