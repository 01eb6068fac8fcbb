//! 1-Wasserstein distance between discrete spectral measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ham::Spectrum;
use crate::sim::PhaseHistogram;

use super::SpectralEstimate;

/// Ground metric for the transport problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportGeometry {
    /// `|a - b|` on the line; phases are used as given.
    #[default]
    Line,
    /// Shortest arc on the unit circle; phases are folded into `[0, 1)`.
    Circle,
}

/// Exact 1-Wasserstein distance between two weighted point sets, each given
/// as `(position, mass)` pairs. Masses are normalized to one, so inputs may
/// be probabilities, counts, or degeneracies.
///
/// On the line this is the integral of `|F_a - F_b|` between the CDFs; on
/// the circle the integrand is first recentered by its length-weighted
/// median, which yields the optimal rotation of the transport plan.
pub fn wasserstein1(
    a: &[(f64, f64)],
    b: &[(f64, f64)],
    geometry: TransportGeometry,
) -> Result<f64> {
    let a = normalized(a, geometry)?;
    let b = normalized(b, geometry)?;

    // Merge into one event list: (position, mass_a delta, mass_b delta).
    let mut events: Vec<(f64, f64, f64)> = a
        .iter()
        .map(|(x, w)| (*x, *w, 0.0))
        .chain(b.iter().map(|(x, w)| (*x, 0.0, *w)))
        .collect();
    events.sort_by(|p, q| p.0.total_cmp(&q.0));

    match geometry {
        TransportGeometry::Line => {
            let mut distance = 0.0;
            let mut gap = 0.0f64; // F_a - F_b after processed events
            let mut position = events[0].0;
            for (x, da, db) in events {
                distance += gap.abs() * (x - position);
                gap += da - db;
                position = x;
            }
            Ok(distance)
        }
        TransportGeometry::Circle => {
            // Segment k runs from event k to event k+1 (the last wraps to
            // the first plus a full turn) and carries a constant CDF gap.
            let mut segments = Vec::with_capacity(events.len());
            let mut gap = 0.0;
            for (k, (x, da, db)) in events.iter().enumerate() {
                gap += da - db;
                let next = if k + 1 == events.len() {
                    events[0].0 + 1.0
                } else {
                    events[k + 1].0
                };
                segments.push((gap, next - x));
            }
            let shift = weighted_median(&mut segments.clone());
            Ok(segments
                .iter()
                .map(|(value, length)| (value - shift).abs() * length)
                .sum())
        }
    }
}

/// Validates one measure and scales its masses to total one.
fn normalized(points: &[(f64, f64)], geometry: TransportGeometry) -> Result<Vec<(f64, f64)>> {
    if points.is_empty() {
        return Err(Error::invalid("transport needs a nonempty measure"));
    }
    let mut total = 0.0;
    for (x, w) in points {
        if !x.is_finite() || !w.is_finite() || *w < 0.0 {
            return Err(Error::invalid(format!(
                "bad mass point ({x}, {w}): positions must be finite, masses nonnegative"
            )));
        }
        total += w;
    }
    if total <= 0.0 {
        return Err(Error::invalid("transport needs positive total mass"));
    }
    Ok(points
        .iter()
        .map(|(x, w)| {
            let x = match geometry {
                TransportGeometry::Line => *x,
                TransportGeometry::Circle => x.rem_euclid(1.0),
            };
            (x, w / total)
        })
        .collect())
}

/// Median of `values` weighted by `lengths`: minimizer of
/// `sum_k length_k |value_k - shift|`.
fn weighted_median(segments: &mut [(f64, f64)]) -> f64 {
    segments.sort_by(|a, b| a.0.total_cmp(&b.0));
    let half: f64 = segments.iter().map(|(_, l)| l).sum::<f64>() / 2.0;
    let mut acc = 0.0;
    for (value, length) in segments.iter() {
        acc += length;
        if acc >= half {
            return *value;
        }
    }
    segments.last().map_or(0.0, |s| s.0)
}

/// `(phase, degeneracy)` mass points of an exact spectrum.
pub fn spectrum_points(spectrum: &Spectrum) -> Vec<(f64, f64)> {
    spectrum
        .entries()
        .iter()
        .map(|e| (e.phase, e.degeneracy as f64))
        .collect()
}

/// `(theta_hat, d_hat)` mass points of a reconstruction.
pub fn estimate_points(estimate: &SpectralEstimate) -> Vec<(f64, f64)> {
    estimate
        .entries
        .iter()
        .map(|e| (e.theta_hat, e.d_hat as f64))
        .collect()
}

/// Every nonempty bin of a histogram as a mass point at the bin phase.
pub fn histogram_points(histogram: &PhaseHistogram) -> Vec<(f64, f64)> {
    histogram
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(y, v)| (histogram.phase_of_bin(y), *v))
        .collect()
}

/// Histogram bins scaled to `total` and rounded to integers, as a mass-point
/// list (zero bins dropped). This is the naive estimate the reconstruction
/// is compared against.
pub fn rounded_histogram_points(histogram: &PhaseHistogram, total: u64) -> Vec<(f64, f64)> {
    histogram
        .probabilities()
        .iter()
        .enumerate()
        .map(|(y, p)| (histogram.phase_of_bin(y), (p * total as f64).round()))
        .filter(|(_, v)| *v > 0.0)
        .collect()
}
