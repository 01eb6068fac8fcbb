//! Squared-Dirichlet response kernel shared by the forward model and the
//! reconstruction dictionary.

use crate::error::{Error, Result};

/// Dictionaries larger than this many entries are refused.
pub const MAX_DICTIONARY_ENTRIES: usize = 1 << 24;

/// `K(theta) = |sin(pi M theta) / (M sin(pi theta))|^2`, with `theta` folded
/// onto the circle as a value in `[-1/2, 1/2]`.
///
/// This is the probability that a phase offset `theta` (in units of full
/// turns) lands a measurement in a bin at distance zero; it satisfies
/// `K(0) = 1`, `K(y/M) = 0` for integers `y` not divisible by `M`, and
/// `sum_y K(theta - y/M) = 1` for any `theta` (each measurement lands in
/// exactly one of the `M` bins).
pub fn kernel_value(theta: f64, m_bins: usize) -> f64 {
    debug_assert!(m_bins >= 1);
    let t = theta - theta.round();
    if t == 0.0 {
        return 1.0;
    }
    let m = m_bins as f64;
    let ratio = (std::f64::consts::PI * m * t).sin() / (m * (std::f64::consts::PI * t).sin());
    ratio * ratio
}

/// Forward model of the inverse problem: kernel responses of every candidate
/// phase at every measurement bin.
///
/// Row `i` is the bin at phase `i / 2^m`; column `j` is the candidate at
/// phase `j / G` where `G = grid_factor * 2^m`. Entry `(i, j)` is
/// `K(theta_i - theta'_j)` with the difference taken around the circle.
#[derive(Debug, Clone)]
pub struct KernelDictionary {
    bin_phases: Vec<f64>,
    grid_phases: Vec<f64>,
    /// Row-major `bins x grid` kernel values.
    matrix: Vec<f64>,
}

/// Builds the `2^m x (grid_factor * 2^m)` kernel dictionary.
pub fn build_dictionary(m: usize, grid_factor: usize) -> Result<KernelDictionary> {
    if m == 0 || m > 30 {
        return Err(Error::invalid(format!(
            "bin register size must be in 1..=30, got {m}"
        )));
    }
    if grid_factor == 0 {
        return Err(Error::invalid("grid factor must be at least 1"));
    }
    let bins = 1usize << m;
    let grid = bins
        .checked_mul(grid_factor)
        .filter(|g| bins.checked_mul(*g).is_some_and(|e| e <= MAX_DICTIONARY_ENTRIES))
        .ok_or_else(|| {
            Error::ResourceLimit(format!(
                "dictionary of {bins} bins x {grid_factor}x grid exceeds {MAX_DICTIONARY_ENTRIES} entries"
            ))
        })?;

    let bin_phases: Vec<f64> = (0..bins).map(|i| i as f64 / bins as f64).collect();
    let grid_phases: Vec<f64> = (0..grid).map(|j| j as f64 / grid as f64).collect();
    let mut matrix = Vec::with_capacity(bins * grid);
    for theta in &bin_phases {
        for candidate in &grid_phases {
            matrix.push(kernel_value(theta - candidate, bins));
        }
    }
    Ok(KernelDictionary {
        bin_phases,
        grid_phases,
        matrix,
    })
}

impl KernelDictionary {
    /// Number of measurement bins (matrix rows), `2^m`.
    pub fn bins(&self) -> usize {
        self.bin_phases.len()
    }

    /// Number of candidate phases (matrix columns).
    pub fn grid_len(&self) -> usize {
        self.grid_phases.len()
    }

    pub fn bin_phases(&self) -> &[f64] {
        &self.bin_phases
    }

    pub fn grid_phases(&self) -> &[f64] {
        &self.grid_phases
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.grid_len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let g = self.grid_len();
        &self.matrix[i * g..(i + 1) * g]
    }

    /// `A w`: predicted bin masses for candidate weights `w`.
    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        debug_assert_eq!(w.len(), self.grid_len());
        (0..self.bins())
            .map(|i| self.row(i).iter().zip(w).map(|(a, x)| a * x).sum())
            .collect()
    }

    /// `A^T r`: candidate-wise correlation with a bin-space vector.
    pub fn apply_transpose(&self, r: &[f64]) -> Vec<f64> {
        debug_assert_eq!(r.len(), self.bins());
        let g = self.grid_len();
        let mut out = vec![0.0; g];
        for (i, ri) in r.iter().enumerate() {
            if *ri == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * ri;
            }
        }
        out
    }
}
