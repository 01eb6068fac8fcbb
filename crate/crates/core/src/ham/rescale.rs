//! Affine rescaling of Hamiltonians onto the phase interval `[0, 1)`.
//!
//! The base map is `H~ = (H - lambda_min I) / Delta` with
//! `Delta = lambda_max - lambda_min`, which sends `[lambda_min, lambda_max]`
//! to `[0, 1]`. Two optional refinements keep phases away from the interval
//! ends:
//!
//! * a shift `delta in [0, 1)` moves the lowest phase off zero,
//!   `H~ = (1 - delta) (H - lambda_min I + delta Delta I) / Delta`
//!   (the shift is expressed in phase units, so the output range
//!   `[(1-delta) delta, 1 - delta^2]` is independent of the energy scale);
//! * a top margin `eta in [0, 1)` divides by `Delta / (1 - eta)` instead of
//!   `Delta`, pulling the top of the spectrum to `1 - eta` so that
//!   `lambda_max` no longer aliases with phase 0 under the Fourier transform.
//!
//! Both default to off, in which case an eigenvalue equal to `lambda_max`
//! maps to exactly 1.0 (and wraps to bin 0); callers that care should enable
//! the margin, typically [`TopMargin::Auto`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ham::dense::DenseHermitian;
use crate::ham::pauli::PauliSum;
use crate::ham::spectrum::Spectrum;

/// Headroom kept between the top of the rescaled spectrum and phase 1.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopMargin {
    /// No headroom; `lambda_max` maps to exactly 1 when `delta = 0`.
    #[default]
    Zero,
    /// `1 / 2^(m+2)` once resolved against a time-frequency register of `m`
    /// qubits (a quarter bin), `1e-3` if no register is specified.
    Auto,
    /// Explicit margin in `[0, 1)`.
    Fixed(f64),
}

/// Parameters of the affine spectrum map; see the module docs for the form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaleParams {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Lower shift `delta` in phase units (default 0).
    #[serde(default)]
    pub shift_delta: f64,
    /// Top margin `eta` (default [`TopMargin::Zero`]).
    #[serde(default)]
    pub top_margin: TopMargin,
}

impl RescaleParams {
    pub fn new(lambda_min: f64, lambda_max: f64) -> Result<RescaleParams> {
        RescaleParams {
            lambda_min,
            lambda_max,
            shift_delta: 0.0,
            top_margin: TopMargin::Zero,
        }
        .validated()
    }

    pub fn with_shift(mut self, delta: f64) -> Result<RescaleParams> {
        self.shift_delta = delta;
        self.validated()
    }

    pub fn with_margin(mut self, margin: TopMargin) -> Result<RescaleParams> {
        self.top_margin = margin;
        self.validated()
    }

    pub fn validated(self) -> Result<RescaleParams> {
        if !(self.lambda_min.is_finite() && self.lambda_max.is_finite()) {
            return Err(Error::invalid("lambda_min and lambda_max must be finite"));
        }
        if self.lambda_max <= self.lambda_min {
            return Err(Error::invalid(format!(
                "lambda_max ({}) must exceed lambda_min ({})",
                self.lambda_max, self.lambda_min
            )));
        }
        if !(self.shift_delta >= 0.0 && self.shift_delta < 1.0) {
            return Err(Error::invalid(format!(
                "shift_delta must lie in [0, 1), got {}",
                self.shift_delta
            )));
        }
        if let TopMargin::Fixed(eta) = self.top_margin {
            if !(eta >= 0.0 && eta < 1.0) {
                return Err(Error::invalid(format!(
                    "top margin must lie in [0, 1), got {eta}"
                )));
            }
        }
        Ok(self)
    }

    /// Replace [`TopMargin::Auto`] with its concrete value for a
    /// time-frequency register of `m` qubits.
    pub fn resolved_for_register(mut self, m: u32) -> RescaleParams {
        if self.top_margin == TopMargin::Auto {
            self.top_margin = TopMargin::Fixed(1.0 / (1u64 << (m + 2).min(60)) as f64);
        }
        self
    }

    fn margin(&self) -> f64 {
        match self.top_margin {
            TopMargin::Zero => 0.0,
            TopMargin::Auto => 1e-3,
            TopMargin::Fixed(eta) => eta,
        }
    }

    /// The map as `phase = a * lambda + b` with `a > 0`.
    pub fn affine(&self) -> (f64, f64) {
        let delta = self.lambda_max - self.lambda_min;
        let a = (1.0 - self.shift_delta) * (1.0 - self.margin()) / delta;
        let b = a * (self.shift_delta * delta - self.lambda_min);
        (a, b)
    }

    /// Map one eigenvalue to its phase.
    pub fn phase_of(&self, lambda: f64) -> f64 {
        let (a, b) = self.affine();
        a * lambda + b
    }

    /// Invert the map. `theta` must lie in `[0, 1)`.
    pub fn unscale_phase(&self, theta: f64) -> Result<f64> {
        if !(theta >= 0.0 && theta < 1.0) {
            return Err(Error::invalid(format!(
                "phase {theta} outside [0, 1)"
            )));
        }
        let (a, b) = self.affine();
        Ok((theta - b) / a)
    }

    /// Rescale a dense Hamiltonian.
    pub fn apply_dense(&self, h: &DenseHermitian) -> Result<DenseHermitian> {
        let (a, b) = self.affine();
        let dim = h.dim();
        let mut mat = h.matrix() * num_complex::Complex64::new(a, 0.0);
        for i in 0..dim {
            mat[(i, i)] += b;
        }
        DenseHermitian::new(mat)
    }

    /// Rescale a Pauli sum; only the identity-word coefficient shifts.
    pub fn apply_pauli(&self, h: &PauliSum) -> Result<PauliSum> {
        let (a, b) = self.affine();
        h.scale(a)?.add_identity(b)
    }

    /// Map every line of a spectrum.
    pub fn apply_spectrum(&self, s: &Spectrum) -> Result<Spectrum> {
        let (a, b) = self.affine();
        s.affine(a, b)
    }

    /// Parameters covering the full spectrum of `h`, computed by exact
    /// diagonalization.
    pub fn spanning(h: &DenseHermitian) -> Result<RescaleParams> {
        let eig = h.eigendecomposition()?;
        let lambda_min = eig.values[0];
        let lambda_max = *eig.values.last().unwrap();
        if lambda_max <= lambda_min {
            return Err(Error::invalid(
                "spectrum is a single point; rescaling is undefined",
            ));
        }
        RescaleParams::new(lambda_min, lambda_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn plain_map_matches_hand_values() {
        let p = RescaleParams::new(0.0, 2.0).unwrap();
        let h = DenseHermitian::from_diagonal(&[0.0, 1.0]).unwrap();
        let scaled = p.apply_dense(&h).unwrap();
        assert_abs_diff_eq!(scaled.matrix()[(0, 0)].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(scaled.matrix()[(1, 1)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.unscale_phase(0.5).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.unscale_phase(0.0).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn endpoint_maps_to_one_without_margin() {
        let p = RescaleParams::new(-2.0, 2.0).unwrap();
        let h = DenseHermitian::from_diagonal(&[-2.0, 2.0]).unwrap();
        let scaled = p.apply_dense(&h).unwrap();
        assert_abs_diff_eq!(scaled.matrix()[(0, 0)].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(scaled.matrix()[(1, 1)].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn margin_pulls_top_below_one() {
        let p = RescaleParams::new(-2.0, 2.0)
            .unwrap()
            .with_margin(TopMargin::Fixed(0.125))
            .unwrap();
        assert_abs_diff_eq!(p.phase_of(2.0), 0.875, epsilon = 1e-15);
        assert_abs_diff_eq!(p.phase_of(-2.0), 0.0, epsilon = 1e-15);
        let auto = RescaleParams::new(0.0, 1.0)
            .unwrap()
            .with_margin(TopMargin::Auto)
            .unwrap()
            .resolved_for_register(4);
        assert_eq!(auto.top_margin, TopMargin::Fixed(1.0 / 64.0));
    }

    #[test]
    fn shift_moves_lowest_phase_off_zero() {
        let p = RescaleParams::new(-3.0, 5.0)
            .unwrap()
            .with_shift(0.05)
            .unwrap();
        // Output range [(1-d)d, 1-d^2] regardless of the energy scale.
        assert_abs_diff_eq!(p.phase_of(-3.0), 0.95 * 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(p.phase_of(5.0), 1.0 - 0.05 * 0.05, epsilon = 1e-15);
    }

    #[test]
    fn pauli_rescale_touches_only_identity_word() {
        let h = PauliSum::parse("1.0 ZI\n0.5 XX\n".as_bytes()).unwrap();
        let p = RescaleParams::new(-1.5, 1.5).unwrap();
        let scaled = p.apply_pauli(&h).unwrap();
        let dense_direct = p
            .apply_dense(&DenseHermitian::from_pauli(&h).unwrap())
            .unwrap();
        let dense_via_pauli = DenseHermitian::from_pauli(&scaled).unwrap();
        assert!((dense_direct.matrix() - dense_via_pauli.matrix()).norm() < 1e-12);
    }

    #[test]
    fn round_trip_recovers_eigenvalues() {
        let p = RescaleParams::new(-4.0, 7.0)
            .unwrap()
            .with_shift(0.05)
            .unwrap()
            .with_margin(TopMargin::Fixed(1.0 / 64.0))
            .unwrap();
        for lambda in [-4.0, -1.2345, 0.0, 3.25, 6.999] {
            let theta = p.phase_of(lambda);
            assert!((0.0..1.0).contains(&theta), "theta = {theta}");
            assert_abs_diff_eq!(p.unscale_phase(theta).unwrap(), lambda, epsilon = 1e-10);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(RescaleParams::new(1.0, 1.0).is_err());
        assert!(RescaleParams::new(2.0, 1.0).is_err());
        assert!(RescaleParams::new(0.0, 1.0).unwrap().with_shift(1.0).is_err());
        assert!(RescaleParams::new(0.0, 1.0)
            .unwrap()
            .with_margin(TopMargin::Fixed(-0.1))
            .is_err());
        assert!(RescaleParams::new(0.0, 1.0).unwrap().unscale_phase(1.0).is_err());
    }
}
