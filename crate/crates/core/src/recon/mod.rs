//! Sparse spectral reconstruction from phase histograms.
//!
//! The measured histogram is modeled as `A w` where `A` holds kernel
//! responses of candidate phases on a grid finer than the bins and `w` are
//! nonnegative spectral weights. The pipeline solves an l1-regularized
//! nonnegative least-squares problem, thresholds the weights, merges nearby
//! survivors by single-linkage clustering, and rounds each cluster's mass to
//! an integer degeneracy. Estimates are scored against reference spectra
//! with the 1-Wasserstein distance.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::PhaseHistogram;

pub mod cluster;
pub mod kernel;
pub mod solver;
pub mod wasserstein;

pub use cluster::threshold_cluster_round;
pub use kernel::{build_dictionary, kernel_value, KernelDictionary, MAX_DICTIONARY_ENTRIES};
pub use solver::{solve, SolveDiagnostics};
pub use wasserstein::{
    estimate_points, histogram_points, rounded_histogram_points, spectrum_points, wasserstein1,
    TransportGeometry,
};

/// How the total-degeneracy constraint enters the solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    /// Plain nonnegative LASSO; integer rounding reconciles the total
    /// afterwards.
    #[default]
    SoftTotal,
    /// Every iterate is projected onto the scaled simplex
    /// `{w >= 0, sum w = total}`. The l1 penalty is constant there, so
    /// `lambda` has no effect in this mode.
    HardSimplex,
}

/// Data-fit term of the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fidelity {
    /// `||A w - P||_2^2`.
    #[default]
    SquaredError,
    /// `||A w - P||_1`, smoothed near zero so the same gradient machinery
    /// applies. Secondary path; equivalent to the linear-program form of the
    /// fit.
    AbsoluteError,
}

/// Knobs for [`reconstruct`]. Deserializable with every field optional
/// except that [`ReconstructionConfig::total`] must be set (by the file or
/// by the caller) before solving.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ReconstructionConfig {
    /// Candidate phases per bin; the grid has `grid_factor * 2^m` points.
    pub grid_factor: usize,
    /// l1 strength. `None` picks one by a logarithmic sweep over
    /// `{1e-4..1e-1} * ||A^T P||_inf`, keeping the sparsest solution whose
    /// residual is within 10% of the best found.
    pub lambda: Option<f64>,
    /// Target total degeneracy (e.g. `2^n` or the run's `n_eff`).
    pub total: Option<u64>,
    /// Weights at or below this are discarded before clustering.
    pub tau: f64,
    /// Single-linkage merge distance on the circle; `None` means one bin
    /// width, `1/2^m`.
    pub cluster_eps: Option<f64>,
    pub constraint_mode: ConstraintMode,
    pub fidelity: Fidelity,
    /// Stop when the relative objective change drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ReconstructionConfig {
    fn default() -> ReconstructionConfig {
        ReconstructionConfig {
            grid_factor: 4,
            lambda: None,
            total: None,
            tau: 0.2,
            cluster_eps: None,
            constraint_mode: ConstraintMode::SoftTotal,
            fidelity: Fidelity::SquaredError,
            tolerance: 1e-10,
            max_iterations: 50_000,
        }
    }
}

impl ReconstructionConfig {
    pub fn new(total: u64) -> ReconstructionConfig {
        ReconstructionConfig {
            total: Some(total),
            ..ReconstructionConfig::default()
        }
    }

    pub fn total(&self) -> Result<u64> {
        match self.total {
            Some(t) if t >= 1 => Ok(t),
            Some(_) => Err(Error::invalid("total degeneracy must be positive")),
            None => Err(Error::invalid(
                "total degeneracy is unset; supply it in the config or derive it from the run",
            )),
        }
    }

    /// Merge distance with the one-bin default applied.
    pub fn resolved_cluster_eps(&self, bins: usize) -> f64 {
        self.cluster_eps.unwrap_or(1.0 / bins as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_factor == 0 {
            return Err(Error::invalid("grid factor must be at least 1"));
        }
        if let Some(l) = self.lambda {
            if !l.is_finite() || l < 0.0 {
                return Err(Error::invalid(format!(
                    "lambda must be finite and nonnegative, got {l}"
                )));
            }
        }
        let total = self.total()?;
        if !self.tau.is_finite() || self.tau < 0.0 || self.tau >= total as f64 {
            return Err(Error::invalid(format!(
                "threshold tau must satisfy 0 <= tau < total, got {}",
                self.tau
            )));
        }
        if let Some(eps) = self.cluster_eps {
            if !eps.is_finite() || eps <= 0.0 {
                return Err(Error::invalid(format!(
                    "cluster distance must be positive, got {eps}"
                )));
            }
        }
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(Error::invalid("solver tolerance must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("solver needs at least one iteration"));
        }
        Ok(())
    }
}

/// One recovered spectral line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateEntry {
    /// Phase in `[0, 1)`.
    pub theta_hat: f64,
    /// Rounded cluster mass, always positive.
    pub d_hat: u64,
}

/// Result of the reconstruction pipeline.
#[derive(Debug, Clone)]
pub struct SpectralEstimate {
    /// Recovered lines, phases strictly increasing.
    pub entries: Vec<EstimateEntry>,
    /// Solver weights on the candidate grid before thresholding.
    pub raw_weights: Vec<f64>,
    pub diagnostics: SolveDiagnostics,
}

impl SpectralEstimate {
    pub fn total_degeneracy(&self) -> u64 {
        self.entries.iter().map(|e| e.d_hat).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Writes `theta_hat,d_hat` rows.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "theta_hat,d_hat")?;
        for e in &self.entries {
            writeln!(writer, "{:.17e},{}", e.theta_hat, e.d_hat)?;
        }
        Ok(())
    }

    /// Reads rows written by [`SpectralEstimate::write_csv`].
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Vec<EstimateEntry>> {
        let mut lines = reader.lines().enumerate();
        match lines.next() {
            Some((_, Ok(h))) if h.trim() == "theta_hat,d_hat" => {}
            Some((_, Ok(h))) => {
                return Err(Error::Format {
                    line: 1,
                    message: format!("expected header 'theta_hat,d_hat', got {h:?}"),
                })
            }
            Some((_, Err(e))) => return Err(e.into()),
            None => {
                return Err(Error::Format {
                    line: 1,
                    message: "empty estimate file".into(),
                })
            }
        }
        let mut entries = Vec::new();
        for (idx, line) in lines {
            let line = line?;
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.splitn(2, ',');
            let bad = |what: &str| Error::Format {
                line: lineno,
                message: format!("{what} in {line:?}"),
            };
            let theta_hat: f64 = parts
                .next()
                .and_then(|t| t.trim().parse().ok())
                .ok_or_else(|| bad("unreadable phase"))?;
            let d_hat: u64 = parts
                .next()
                .and_then(|t| t.trim().parse().ok())
                .ok_or_else(|| bad("unreadable degeneracy"))?;
            if !(0.0..1.0).contains(&theta_hat) || d_hat == 0 {
                return Err(bad("entry out of range"));
            }
            entries.push(EstimateEntry { theta_hat, d_hat });
        }
        Ok(entries)
    }
}

/// Full pipeline: dictionary, solve, threshold, cluster, round.
///
/// The histogram may hold probabilities or counts; either is normalized and
/// scaled so the target bin masses sum to the configured total.
pub fn reconstruct(
    histogram: &PhaseHistogram,
    config: &ReconstructionConfig,
) -> Result<SpectralEstimate> {
    config.validate()?;
    let total = config.total()? as f64;
    let dictionary = build_dictionary(histogram.m(), config.grid_factor)?;
    let target: Vec<f64> = histogram
        .probabilities()
        .iter()
        .map(|p| p * total)
        .collect();
    let (raw_weights, diagnostics) = solve(&dictionary, &target, config)?;
    let entries = threshold_cluster_round(&raw_weights, dictionary.grid_phases(), config)?;
    Ok(SpectralEstimate {
        entries,
        raw_weights,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ham::{Spectrum, SpectrumEntry};
    use crate::protocol::analytic_response;
    use approx::assert_abs_diff_eq;

    fn synthetic_spectrum(atoms: &[(f64, usize)]) -> (Spectrum, Vec<f64>) {
        let total: usize = atoms.iter().map(|(_, d)| d).sum();
        let entries = atoms
            .iter()
            .map(|(phase, degeneracy)| SpectrumEntry {
                phase: *phase,
                degeneracy: *degeneracy,
            })
            .collect::<Vec<_>>();
        let weights = atoms
            .iter()
            .map(|(_, d)| *d as f64 / total as f64)
            .collect();
        (Spectrum::new(entries).unwrap(), weights)
    }

    #[test]
    fn recovers_on_grid_atoms_end_to_end() {
        let (spectrum, weights) =
            synthetic_spectrum(&[(2.0 / 32.0, 3), (11.0 / 32.0, 2), (23.0 / 32.0, 3)]);
        let hist = analytic_response(&spectrum, &weights, 5).unwrap();
        let mut config = ReconstructionConfig::new(8);
        config.grid_factor = 2;
        let estimate = reconstruct(&hist, &config).unwrap();
        assert_eq!(estimate.entries.len(), 3);
        for (entry, (phase, degeneracy)) in estimate
            .entries
            .iter()
            .zip([(2.0 / 32.0, 3u64), (11.0 / 32.0, 2), (23.0 / 32.0, 3)])
        {
            assert_abs_diff_eq!(entry.theta_hat, phase, epsilon = 1e-9);
            assert_eq!(entry.d_hat, degeneracy);
        }
        assert_eq!(estimate.total_degeneracy(), 8);
    }

    #[test]
    fn off_grid_atom_rounds_to_nearest_candidate() {
        // A lone eigenphase midway between grid points still shows up as one
        // cluster with the right mass.
        let (spectrum, weights) = synthetic_spectrum(&[(0.40625 + 0.001, 4)]);
        let hist = analytic_response(&spectrum, &weights, 5).unwrap();
        let mut config = ReconstructionConfig::new(4);
        config.grid_factor = 4;
        let estimate = reconstruct(&hist, &config).unwrap();
        assert_eq!(estimate.entries.len(), 1);
        assert_eq!(estimate.entries[0].d_hat, 4);
        assert!((estimate.entries[0].theta_hat - 0.40725).abs() < 1.0 / 64.0);
    }

    #[test]
    fn estimate_csv_round_trip() {
        let estimate = SpectralEstimate {
            entries: vec![
                EstimateEntry {
                    theta_hat: 0.0625,
                    d_hat: 3,
                },
                EstimateEntry {
                    theta_hat: 0.78125,
                    d_hat: 1,
                },
            ],
            raw_weights: vec![0.0; 8],
            diagnostics: SolveDiagnostics::default(),
        };
        let mut buf = Vec::new();
        estimate.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("theta_hat,d_hat\n"));
        let back = SpectralEstimate::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, estimate.entries);
        assert!(SpectralEstimate::read_csv("bogus\n".as_bytes()).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ReconstructionConfig::default().validate().is_err()); // no total
        let mut config = ReconstructionConfig::new(8);
        config.validate().unwrap();
        config.tau = 8.0;
        assert!(config.validate().is_err());
        config.tau = 0.2;
        config.grid_factor = 0;
        assert!(config.validate().is_err());
        config.grid_factor = 2;
        config.lambda = Some(-1.0);
        assert!(config.validate().is_err());
    }
}
