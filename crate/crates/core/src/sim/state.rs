//! Flat-array statevector and the non-evolution circuit operations.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sim::fft::inverse_fourier;
use crate::sim::histogram::PhaseHistogram;
use crate::sim::layout::QubitLayout;

/// File magic of the binary statevector dump.
pub const STATE_DUMP_MAGIC: [u8; 8] = *b"DOSQPESV";

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A pure state over the registers described by a [`QubitLayout`], stored as
/// one flat complex array indexed by the packed basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: QubitLayout,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on the given layout.
    pub fn zero_state(layout: QubitLayout) -> StateVector {
        let mut amps = vec![Complex64::new(0.0, 0.0); layout.dim()];
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector { layout, amps }
    }

    /// Wrap explicit amplitudes; the squared norm must be 1 within 1e-10.
    pub fn from_amplitudes(layout: QubitLayout, amps: Vec<Complex64>) -> Result<StateVector> {
        if amps.len() != layout.dim() {
            return Err(Error::invalid(format!(
                "expected {} amplitudes, got {}",
                layout.dim(),
                amps.len()
            )));
        }
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!(
                "state norm^2 = {norm_sqr}, expected 1 within 1e-10"
            )));
        }
        Ok(StateVector { layout, amps })
    }

    /// Probe state on a bare state register (`m = 0`, no purification).
    pub fn probe_from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<StateVector> {
        StateVector::from_amplitudes(QubitLayout::probe_only(n)?, amps)
    }

    /// Dicke state `|D^n_k>`: equal amplitude `C(n,k)^{-1/2}` on every basis
    /// state of Hamming weight `k`.
    pub fn prepare_dicke(n: usize, k: usize) -> Result<StateVector> {
        let layout = QubitLayout::probe_only(n)?;
        if k > n {
            return Err(Error::invalid(format!(
                "Dicke weight {k} out of range 0..={n}"
            )));
        }
        let count = binomial(n, k);
        let amp = Complex64::new(1.0 / (count as f64).sqrt(), 0.0);
        let mut amps = vec![Complex64::new(0.0, 0.0); layout.dim()];
        for (x, slot) in amps.iter_mut().enumerate() {
            if x.count_ones() as usize == k {
                *slot = amp;
            }
        }
        StateVector::from_amplitudes(layout, amps)
    }

    /// Place a probe on the state register of a full circuit layout, with
    /// the time-frequency and purification registers in `|0...0>`.
    pub fn embed_probe(layout: QubitLayout, probe: &StateVector) -> Result<StateVector> {
        if probe.layout.m != 0 || probe.layout.purified {
            return Err(Error::invalid(
                "probe must live on a bare state register (probe_only layout)",
            ));
        }
        if probe.layout.n != layout.n {
            return Err(Error::invalid(format!(
                "probe has {} qubits but timefreq layout expects n = {}",
                probe.layout.n, layout.n
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); layout.dim()];
        for (s, a) in probe.amps.iter().enumerate() {
            amps[layout.pack(0, s, 0)] = *a;
        }
        StateVector::from_amplitudes(layout, amps)
    }

    pub fn layout(&self) -> QubitLayout {
        self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    fn hadamard(&mut self, bit: usize) {
        let mask = 1usize << bit;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let a = self.amps[i];
                let b = self.amps[i | mask];
                self.amps[i] = (a + b) * FRAC_1_SQRT_2;
                self.amps[i | mask] = (a - b) * FRAC_1_SQRT_2;
            }
        }
    }

    fn cnot(&mut self, control_bit: usize, target_bit: usize) {
        let c = 1usize << control_bit;
        let t = 1usize << target_bit;
        for i in 0..self.amps.len() {
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
    }

    /// `H^{x m}` on the time-frequency register.
    pub fn apply_hadamard_layer(&mut self) {
        for j in 0..self.layout.m {
            self.hadamard(self.layout.timefreq_bit(j));
        }
    }

    /// Copy the state register onto the purification register in the
    /// computational basis: qubit `q` of the state register controls a CNOT
    /// onto qubit `q` of the purification register, so `sum_x c_x |x>`
    /// becomes `sum_x c_x |x>|x>`.
    ///
    /// Requires a purified layout with the purification register in
    /// `|0...0>` (any amplitude mass outside that block is a precondition
    /// violation).
    pub fn apply_purification_cascade(&mut self) -> Result<()> {
        if !self.layout.purified {
            return Err(Error::invalid(
                "layout has no purification register to cascade onto",
            ));
        }
        let p_shift = self.layout.m + self.layout.n;
        let stray: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i >> p_shift != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if stray > 1e-12 {
            return Err(Error::Precondition(format!(
                "purification register must be |0...0> before the cascade \
                 (found squared mass {stray:.3e} outside)"
            )));
        }
        for q in 0..self.layout.n {
            self.cnot(self.layout.state_bit(q), self.layout.purification_bit(q));
        }
        Ok(())
    }

    /// Unitary inverse Fourier transform of the time-frequency register.
    /// With the register in the low bits, each (state, purification)
    /// configuration owns one contiguous slice.
    pub fn apply_inverse_qft(&mut self) {
        let chunk = 1usize << self.layout.m;
        for slice in self.amps.chunks_exact_mut(chunk) {
            inverse_fourier(slice);
        }
    }

    /// Measurement distribution of the time-frequency register:
    /// `values[y] = sum_{s,p} |amp(y,s,p)|^2`.
    pub fn marginal_timefreq(&self) -> Result<PhaseHistogram> {
        let bins = 1usize << self.layout.m;
        let mut values = vec![0.0f64; bins];
        for chunk in self.amps.chunks_exact(bins) {
            for (y, a) in chunk.iter().enumerate() {
                values[y] += a.norm_sqr();
            }
        }
        // Guard against drift from long gate sequences.
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Numerical(format!(
                "state norm drifted to {total}"
            )));
        }
        let scale = 1.0 / total;
        for v in &mut values {
            *v *= scale;
        }
        PhaseHistogram::from_probabilities(self.layout.m, values)
    }

    /// Reduced density matrix of the state register (time-frequency and
    /// purification registers traced out).
    pub fn reduced_state_register(&self) -> DMatrix<Complex64> {
        let dim_s = 1usize << self.layout.n;
        let dim_y = 1usize << self.layout.m;
        let blocks = self.layout.dim() / (dim_s * dim_y);
        let mut rho = DMatrix::from_element(dim_s, dim_s, Complex64::new(0.0, 0.0));
        for p in 0..blocks {
            for y in 0..dim_y {
                for r in 0..dim_s {
                    let ar = self.amps[self.layout.pack(y, r, p)];
                    if ar == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for c in 0..dim_s {
                        let ac = self.amps[self.layout.pack(y, c, p)];
                        rho[(r, c)] += ar * ac.conj();
                    }
                }
            }
        }
        rho
    }

    /// Binary dump: 8-byte magic `DOSQPESV`, 8-byte little-endian total
    /// qubit count, then `2^total` little-endian `(re, im)` f64 pairs.
    pub fn dump<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(&STATE_DUMP_MAGIC)?;
        writer.write_all(&(self.layout.total_qubits() as u64).to_le_bytes())?;
        for a in &self.amps {
            writer.write_all(&a.re.to_le_bytes())?;
            writer.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    /// Read a dump back onto a known layout (the file records only the
    /// total qubit count, which must match).
    pub fn load<R: Read>(mut reader: R, layout: QubitLayout) -> Result<StateVector> {
        let mut header = [0u8; 16];
        reader.read_exact(&mut header)?;
        if header[..8] != STATE_DUMP_MAGIC {
            return Err(Error::Validation("bad statevector magic".into()));
        }
        let total = u64::from_le_bytes(header[8..].try_into().unwrap());
        if total != layout.total_qubits() as u64 {
            return Err(Error::invalid(format!(
                "dump holds {total} qubits, layout expects {}",
                layout.total_qubits()
            )));
        }
        let mut amps = Vec::with_capacity(layout.dim());
        let mut buf = [0u8; 16];
        for _ in 0..layout.dim() {
            reader.read_exact(&mut buf)?;
            amps.push(Complex64::new(
                f64::from_le_bytes(buf[..8].try_into().unwrap()),
                f64::from_le_bytes(buf[8..].try_into().unwrap()),
            ));
        }
        StateVector::from_amplitudes(layout, amps)
    }
}

/// Binomial coefficient, exact for the qubit counts this crate accepts.
pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    let mut num: u128 = 1;
    for i in 0..k {
        num = num * (n - i) as u128 / (i + 1) as u128;
    }
    num
}
