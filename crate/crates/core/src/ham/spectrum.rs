//! Discrete spectra: strictly increasing support points with multiplicities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One spectral line: a position on the phase (or energy) axis and how many
/// eigenstates sit there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub phase: f64,
    pub degeneracy: usize,
}

/// A sorted list of distinct spectral lines.
///
/// The axis is whatever the producer says it is: raw eigenvalues for an
/// unscaled Hamiltonian, phases in `[0, 1)` after rescaling. Only strict
/// monotonicity and finiteness are enforced here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    entries: Vec<SpectrumEntry>,
}

impl Spectrum {
    pub fn new(entries: Vec<SpectrumEntry>) -> Result<Spectrum> {
        for e in &entries {
            if !e.phase.is_finite() {
                return Err(Error::invalid(format!("non-finite phase {}", e.phase)));
            }
            if e.degeneracy == 0 {
                return Err(Error::invalid(format!(
                    "zero degeneracy at phase {}",
                    e.phase
                )));
            }
        }
        for w in entries.windows(2) {
            if w[0].phase >= w[1].phase {
                return Err(Error::invalid(format!(
                    "phases must be strictly increasing, got {} then {}",
                    w[0].phase, w[1].phase
                )));
            }
        }
        Ok(Spectrum { entries })
    }

    /// Group a (not necessarily sorted) list of values into lines, merging
    /// values whose consecutive sorted gap is at most `tol`. Each line takes
    /// the mean of its group as position and the group size as degeneracy.
    pub fn group(values: &[f64], tol: f64) -> Result<Spectrum> {
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(Error::invalid(format!("grouping tolerance {tol} must be finite and >= 0")));
        }
        let mut sorted: Vec<f64> = values.to_vec();
        for v in &sorted {
            if !v.is_finite() {
                return Err(Error::invalid(format!("non-finite value {v}")));
            }
        }
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut entries = Vec::new();
        let mut start = 0;
        for i in 0..sorted.len() {
            let last_in_group = i + 1 == sorted.len() || sorted[i + 1] - sorted[i] > tol;
            if last_in_group {
                let group = &sorted[start..=i];
                entries.push(SpectrumEntry {
                    phase: group.iter().sum::<f64>() / group.len() as f64,
                    degeneracy: group.len(),
                });
                start = i + 1;
            }
        }
        Spectrum::new(entries)
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_degeneracy(&self) -> usize {
        self.entries.iter().map(|e| e.degeneracy).sum()
    }

    /// Degeneracies normalized to sum to one.
    pub fn normalized_weights(&self) -> Vec<f64> {
        let total = self.total_degeneracy() as f64;
        self.entries
            .iter()
            .map(|e| e.degeneracy as f64 / total)
            .collect()
    }

    /// Apply an increasing affine map `phase -> a * phase + b` to every line.
    pub fn affine(&self, a: f64, b: f64) -> Result<Spectrum> {
        if !(a > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::invalid(format!(
                "affine map must have finite a > 0 and finite b, got a={a}, b={b}"
            )));
        }
        Spectrum::new(
            self.entries
                .iter()
                .map(|e| SpectrumEntry {
                    phase: a * e.phase + b,
                    degeneracy: e.degeneracy,
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grouping_merges_within_tolerance() {
        let s = Spectrum::group(&[0.5, 0.1, 0.1 + 5e-10, 0.5 + 2e-9], 1e-9).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.entries()[0].degeneracy, 2);
        assert!((s.entries()[0].phase - (0.2 + 5e-10) / 2.0).abs() < 1e-15);
        assert_eq!(s.entries()[1].degeneracy, 1);
        assert_eq!(s.entries()[2].degeneracy, 1);
        assert_eq!(s.total_degeneracy(), 4);
    }

    #[test]
    fn rejects_unsorted_or_degenerate_input() {
        let mk = |phases: &[(f64, usize)]| {
            Spectrum::new(
                phases
                    .iter()
                    .map(|&(phase, degeneracy)| SpectrumEntry { phase, degeneracy })
                    .collect(),
            )
        };
        assert!(mk(&[(0.2, 1), (0.1, 1)]).is_err());
        assert!(mk(&[(0.1, 1), (0.1, 1)]).is_err());
        assert!(mk(&[(0.1, 0)]).is_err());
        assert!(mk(&[(-1.0, 1), (1.0, 1)]).is_ok()); // raw eigenvalue axis
    }

    #[test]
    fn normalized_weights_sum_to_one() {
        let s = Spectrum::new(vec![
            SpectrumEntry { phase: 0.0, degeneracy: 3 },
            SpectrumEntry { phase: 0.25, degeneracy: 1 },
        ])
        .unwrap();
        assert_eq!(s.normalized_weights(), vec![0.75, 0.25]);
    }
}
