//! Threshold, single-linkage clustering on the circle, integer rounding.

use crate::error::{Error, Result};

use super::{EstimateEntry, ReconstructionConfig};

/// Turns raw grid weights into integer spectral lines.
///
/// Weights strictly above `tau` survive; survivors whose circular gap is at
/// most the merge distance join one cluster (single linkage, including the
/// wrap around phase 0). Each cluster yields the weighted mean phase (taken
/// with the wrapped members unwrapped past 1 so the mean is meaningful) and
/// its mass rounded to the nearest integer; clusters rounding to zero are
/// dropped. An empty result is a valid outcome, not an error.
pub fn threshold_cluster_round(
    weights: &[f64],
    grid_phases: &[f64],
    config: &ReconstructionConfig,
) -> Result<Vec<EstimateEntry>> {
    if weights.len() != grid_phases.len() {
        return Err(Error::invalid(format!(
            "{} weights for {} grid phases",
            weights.len(),
            grid_phases.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::invalid("weights must be finite and nonnegative"));
    }
    let eps = config.resolved_cluster_eps(grid_phases.len() / config.grid_factor.max(1));
    if !(eps > 0.0) {
        return Err(Error::invalid(format!(
            "cluster distance must be positive, got {eps}"
        )));
    }

    // Survivors in grid order; grid phases are ascending in [0, 1).
    let kept: Vec<(f64, f64)> = grid_phases
        .iter()
        .zip(weights)
        .filter(|(_, w)| **w > config.tau)
        .map(|(p, w)| (*p, *w))
        .collect();
    if kept.is_empty() {
        return Ok(Vec::new());
    }

    // Chain consecutive survivors, then merge the first and last chains if
    // they meet across the 0/1 seam.
    let mut clusters: Vec<Vec<(f64, f64)>> = vec![vec![kept[0]]];
    for pair in kept.windows(2) {
        if pair[1].0 - pair[0].0 <= eps {
            clusters.last_mut().unwrap().push(pair[1]);
        } else {
            clusters.push(vec![pair[1]]);
        }
    }
    if clusters.len() > 1 {
        let first_phase = clusters[0][0].0;
        let last_phase = clusters.last().unwrap().last().unwrap().0;
        if first_phase + 1.0 - last_phase <= eps {
            // Unwrap the leading cluster past 1 so its members sit next to
            // the trailing one.
            let head = clusters.remove(0);
            let tail = clusters.last_mut().unwrap();
            tail.extend(head.into_iter().map(|(p, w)| (p + 1.0, w)));
        }
    }

    let mut entries = Vec::new();
    for cluster in clusters {
        let mass: f64 = cluster.iter().map(|(_, w)| w).sum();
        let d_hat = mass.round();
        if d_hat < 1.0 {
            continue;
        }
        let mean = cluster.iter().map(|(p, w)| p * w).sum::<f64>() / mass;
        entries.push(EstimateEntry {
            theta_hat: mean.rem_euclid(1.0),
            d_hat: d_hat as u64,
        });
    }
    entries.sort_by(|a, b| a.theta_hat.total_cmp(&b.theta_hat));
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(len: usize) -> Vec<f64> {
        (0..len).map(|j| j as f64 / len as f64).collect()
    }

    fn config_with_eps(total: u64, eps: f64) -> ReconstructionConfig {
        let mut config = ReconstructionConfig::new(total);
        config.cluster_eps = Some(eps);
        config
    }

    #[test]
    fn close_atoms_merge_into_one_line() {
        // Two grid atoms half a linkage distance apart: one cluster with the
        // mass-weighted mean phase and the rounded total.
        let phases = grid(64);
        let mut weights = vec![0.0; 64];
        weights[20] = 1.4;
        weights[21] = 0.7;
        let config = config_with_eps(4, 2.0 / 64.0);
        let entries = threshold_cluster_round(&weights, &phases, &config).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].d_hat, 2);
        let expect = (1.4 * phases[20] + 0.7 * phases[21]) / 2.1;
        assert_abs_diff_eq!(entries[0].theta_hat, expect, epsilon = 1e-15);
    }

    #[test]
    fn distant_atoms_stay_separate() {
        let phases = grid(64);
        let mut weights = vec![0.0; 64];
        weights[10] = 1.0;
        weights[16] = 2.0; // 6/64 apart = 3 eps
        let config = config_with_eps(4, 2.0 / 64.0);
        let entries = threshold_cluster_round(&weights, &phases, &config).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!((entries[0].d_hat, entries[1].d_hat), (1, 2));
    }

    #[test]
    fn seam_cluster_uses_a_circular_mean() {
        let phases = grid(100);
        let mut weights = vec![0.0; 100];
        weights[98] = 1.0; // phase 0.98
        weights[1] = 2.0; // phase 0.01
        let config = config_with_eps(4, 0.05);
        let entries = threshold_cluster_round(&weights, &phases, &config).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].d_hat, 3);
        // Unwrapped mean of 0.98 (mass 1) and 1.01 (mass 2) is 1.0 -> 0.0.
        assert_abs_diff_eq!(entries[0].theta_hat, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn threshold_is_strict_and_small_clusters_drop() {
        let phases = grid(32);
        let mut weights = vec![0.0; 32];
        weights[3] = 0.2; // exactly tau: excluded
        weights[9] = 0.4; // kept but rounds to 0
        weights[20] = 0.9;
        let config = config_with_eps(4, 1.0 / 32.0);
        let entries = threshold_cluster_round(&weights, &phases, &config).unwrap();
        assert_eq!(entries.len(), 1);
        assert_abs_diff_eq!(entries[0].theta_hat, phases[20]);
        assert_eq!(entries[0].d_hat, 1);
    }

    #[test]
    fn empty_support_gives_empty_estimate() {
        let phases = grid(16);
        let weights = vec![0.05; 16];
        let config = config_with_eps(4, 1.0 / 16.0);
        let entries = threshold_cluster_round(&weights, &phases, &config).unwrap();
        assert!(entries.is_empty());
    }

    #[test]
    fn garbage_inputs_are_rejected() {
        let config = config_with_eps(4, 0.1);
        assert!(threshold_cluster_round(&[1.0], &grid(4), &config).is_err());
        assert!(threshold_cluster_round(&[-0.5; 4], &grid(4), &config).is_err());
    }
}
