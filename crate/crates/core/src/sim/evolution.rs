//! Time evolution `U = exp(i * time_scale * H)` on the state register:
//! exact (by eigendecomposition) or Trotterized (products of Pauli-word
//! exponentials), both in plain and controlled form.
//!
//! The sign/phase convention is fixed here once: with the default
//! `time_scale = +2 pi`, an eigenvalue `lambda` of `H` appears as measured
//! phase `lambda` (mod 1), with no extra sign flips downstream.
//!
//! Suzuki product formulas follow the standard recursion
//! `S_2(f) = prod_l e^{i f/2 c_l P_l} prod_{l reversed} e^{i f/2 c_l P_l}`,
//! `S_{2k}(f) = S_{2k-2}(p_k f)^2 S_{2k-2}((1-4 p_k) f) S_{2k-2}(p_k f)^2`,
//! `p_k = 1 / (4 - 4^{1/(2k-1)})`. To 16 significant digits:
//! `p_2 = 0.4144907717943757`, `p_3 = 0.3730658277332728`.
//! The factor ordering inside each product is the canonical (sorted) term
//! order of the [`PauliSum`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ham::dense::DenseHermitian;
use crate::ham::dense::EigenDecomposition;
use crate::ham::pauli::PauliSum;
use crate::sim::state::StateVector;

/// A Hamiltonian in either representation accepted by the engine.
#[derive(Debug, Clone)]
pub enum Hamiltonian {
    Pauli(PauliSum),
    Dense(DenseHermitian),
}

impl Hamiltonian {
    /// State-register qubit count; dense inputs must be power-of-two sized.
    pub fn qubit_count(&self) -> Result<usize> {
        match self {
            Hamiltonian::Pauli(p) => Ok(p.qubit_count()),
            Hamiltonian::Dense(d) => d.qubit_count().ok_or_else(|| {
                Error::invalid(format!(
                    "dense Hamiltonian dimension {} is not a power of two; pad it first",
                    d.dim()
                ))
            }),
        }
    }

    pub fn to_dense(&self) -> Result<DenseHermitian> {
        match self {
            Hamiltonian::Pauli(p) => DenseHermitian::from_pauli(p),
            Hamiltonian::Dense(d) => Ok(d.clone()),
        }
    }

    fn to_pauli(&self) -> Result<PauliSum> {
        match self {
            Hamiltonian::Pauli(p) => Ok(p.clone()),
            Hamiltonian::Dense(d) => d.to_pauli(1e-12),
        }
    }
}

/// Suzuki-Trotter product order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum TrotterOrder {
    First,
    Second,
    Fourth,
    Sixth,
}

impl TryFrom<u8> for TrotterOrder {
    type Error = Error;
    fn try_from(v: u8) -> Result<TrotterOrder> {
        match v {
            1 => Ok(TrotterOrder::First),
            2 => Ok(TrotterOrder::Second),
            4 => Ok(TrotterOrder::Fourth),
            6 => Ok(TrotterOrder::Sixth),
            other => Err(Error::invalid(format!(
                "unsupported Trotter order {other}; supported orders are 1, 2, 4, 6"
            ))),
        }
    }
}

impl From<TrotterOrder> for u8 {
    fn from(o: TrotterOrder) -> u8 {
        match o {
            TrotterOrder::First => 1,
            TrotterOrder::Second => 2,
            TrotterOrder::Fourth => 4,
            TrotterOrder::Sixth => 6,
        }
    }
}

/// How the unitary is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EvolutionMode {
    /// Eigendecomposition; `U^k` is exact for any power.
    Exact,
    /// Suzuki product of Pauli-word exponentials; `U^k` repeats the step
    /// circuit `steps * k` times (no operator squaring).
    Trotter { order: TrotterOrder, steps: u32 },
}

/// Full description of the evolution unitary.
#[derive(Debug, Clone)]
pub struct EvolutionSpec {
    pub hamiltonian: Hamiltonian,
    pub mode: EvolutionMode,
    /// Radians of phase per unit eigenvalue; default `+2 pi`.
    pub time_scale: f64,
}

impl EvolutionSpec {
    pub fn new(hamiltonian: Hamiltonian, mode: EvolutionMode) -> EvolutionSpec {
        EvolutionSpec {
            hamiltonian,
            mode,
            time_scale: std::f64::consts::TAU,
        }
    }

    pub fn exact(hamiltonian: Hamiltonian) -> EvolutionSpec {
        EvolutionSpec::new(hamiltonian, EvolutionMode::Exact)
    }

    pub fn trotter(hamiltonian: Hamiltonian, order: TrotterOrder, steps: u32) -> EvolutionSpec {
        EvolutionSpec::new(hamiltonian, EvolutionMode::Trotter { order, steps })
    }
}

/// One factor `exp(i * angle * P)` with the word's basis-action masks in
/// state-register-local bit positions.
#[derive(Debug, Clone, Copy)]
struct PauliExp {
    flip: u64,
    /// `y | z` mask: bit parity of `index & yz` gives the sign of the
    /// word's basis phase.
    yz: u64,
    y_count: u32,
    angle: f64,
}

/// A compiled evolution, reusable across powers and control qubits.
#[derive(Debug, Clone)]
pub struct CompiledEvolution {
    n: usize,
    time_scale: f64,
    kind: CompiledKind,
}

#[derive(Debug, Clone)]
enum CompiledKind {
    Eigen(EigenDecomposition),
    Steps { exps: Vec<PauliExp>, steps: u32 },
}

impl CompiledEvolution {
    pub fn new(spec: &EvolutionSpec) -> Result<CompiledEvolution> {
        if !spec.time_scale.is_finite() {
            return Err(Error::invalid("time_scale must be finite"));
        }
        let n = spec.hamiltonian.qubit_count()?;
        let kind = match spec.mode {
            EvolutionMode::Exact => {
                CompiledKind::Eigen(spec.hamiltonian.to_dense()?.eigendecomposition()?)
            }
            EvolutionMode::Trotter { order, steps } => {
                if steps == 0 {
                    return Err(Error::invalid("trotter_steps must be positive"));
                }
                let pauli = spec.hamiltonian.to_pauli()?;
                let sequence = suzuki_sequence(order, pauli.terms().len());
                let exps = sequence
                    .into_iter()
                    .map(|(idx, fraction)| {
                        let term = &pauli.terms()[idx];
                        let masks = term.word.masks();
                        PauliExp {
                            flip: masks.flip,
                            yz: masks.y | masks.z,
                            y_count: masks.y_count,
                            angle: spec.time_scale * term.coefficient * fraction
                                / steps as f64,
                        }
                    })
                    .collect();
                CompiledKind::Steps { exps, steps }
            }
        };
        Ok(CompiledEvolution {
            n,
            time_scale: spec.time_scale,
            kind,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    /// Apply `U^power` to the state register, on every time-frequency and
    /// purification component alike (no control).
    pub fn apply_power(&self, state: &mut StateVector, power: u64) -> Result<()> {
        self.apply(state, power, 0)
    }

    /// Apply controlled-`U^(2^tf_qubit)`, controlled on that time-frequency
    /// qubit.
    pub fn apply_controlled_power(&self, state: &mut StateVector, tf_qubit: usize) -> Result<()> {
        let layout = state.layout();
        if tf_qubit >= layout.m {
            return Err(Error::invalid(format!(
                "control qubit {tf_qubit} out of range for m = {}",
                layout.m
            )));
        }
        self.apply(state, 1u64 << tf_qubit, 1usize << layout.timefreq_bit(tf_qubit))
    }

    fn apply(&self, state: &mut StateVector, power: u64, control_mask: usize) -> Result<()> {
        let layout = state.layout();
        if layout.n != self.n {
            return Err(Error::invalid(format!(
                "Hamiltonian acts on {} qubits but the state register has {}",
                self.n, layout.n
            )));
        }
        if power == 0 {
            return Ok(());
        }
        match &self.kind {
            CompiledKind::Eigen(eig) => {
                let u = matrix_power(eig, self.time_scale, power);
                apply_state_matrix(state, &u, control_mask);
            }
            CompiledKind::Steps { exps, steps } => {
                let shift = layout.m;
                let reps = (*steps as u64) * power;
                let amps = state.amplitudes_mut();
                for _ in 0..reps {
                    for exp in exps {
                        apply_pauli_exp(amps, exp, shift, control_mask);
                    }
                }
            }
        }
        Ok(())
    }

    /// Dense matrix of `U^power` on the state register (oracle path).
    pub fn matrix(&self, power: u64) -> Result<DMatrix<Complex64>> {
        match &self.kind {
            CompiledKind::Eigen(eig) => Ok(matrix_power(eig, self.time_scale, power)),
            CompiledKind::Steps { .. } => {
                let dim = 1usize << self.n;
                let mut out = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
                for col in 0..dim {
                    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
                    amps[col] = Complex64::new(1.0, 0.0);
                    let mut probe = StateVector::probe_from_amplitudes(self.n, amps)?;
                    self.apply_power(&mut probe, power)?;
                    for (r, a) in probe.amplitudes().iter().enumerate() {
                        out[(r, col)] = *a;
                    }
                }
                Ok(out)
            }
        }
    }
}

/// The operator handle `U^power` for a given spec.
pub struct EvolutionOperator {
    compiled: CompiledEvolution,
    power: u64,
}

impl EvolutionOperator {
    pub fn power(&self) -> u64 {
        self.power
    }

    /// Apply to the state register of `state` (uncontrolled).
    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        self.compiled.apply_power(state, self.power)
    }

    /// Dense form, for comparison against exact unitaries.
    pub fn matrix(&self) -> Result<DMatrix<Complex64>> {
        self.compiled.matrix(self.power)
    }
}

/// Compile `U^power` from a spec. `power = 0` yields the identity.
pub fn evolution_unitary(spec: &EvolutionSpec, power: u64) -> Result<EvolutionOperator> {
    Ok(EvolutionOperator {
        compiled: CompiledEvolution::new(spec)?,
        power,
    })
}

/// The phase-estimation ladder: for each time-frequency qubit `j`, apply
/// controlled-`U^(2^j)` controlled on qubit `j`. Requires the Hadamard layer
/// to have put the time-frequency register into superposition beforehand
/// (this routine does not check that).
pub fn apply_controlled_powers(state: &mut StateVector, spec: &EvolutionSpec) -> Result<()> {
    let compiled = CompiledEvolution::new(spec)?;
    for j in 0..state.layout().m {
        compiled.apply_controlled_power(state, j)?;
    }
    Ok(())
}

/// `V diag(e^{i ts lambda power}) V^H` from an eigendecomposition.
fn matrix_power(eig: &EigenDecomposition, time_scale: f64, power: u64) -> DMatrix<Complex64> {
    let dim = eig.dim();
    let mut vd = eig.vectors.clone();
    for (c, &lambda) in eig.values.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, time_scale * lambda * power as f64);
        for r in 0..dim {
            vd[(r, c)] *= phase;
        }
    }
    vd * eig.vectors.adjoint()
}

/// Apply a dense unitary to the state register on every index whose
/// time-frequency bits contain `control_mask` (0 = everywhere).
fn apply_state_matrix(state: &mut StateVector, u: &DMatrix<Complex64>, control_mask: usize) {
    let layout = state.layout();
    let (m, n) = (layout.m, layout.n);
    let dim_s = 1usize << n;
    let stride = 1usize << m;
    let blocks = layout.dim() >> (m + n);
    let mut vin = vec![Complex64::new(0.0, 0.0); dim_s];
    let amps = state.amplitudes_mut();
    for p in 0..blocks {
        let pbase = p << (m + n);
        for y in 0..stride {
            if y & control_mask != control_mask {
                continue;
            }
            let base = pbase | y;
            for (s, v) in vin.iter_mut().enumerate() {
                *v = amps[base + (s << m)];
            }
            for r in 0..dim_s {
                let mut acc = Complex64::new(0.0, 0.0);
                for (s, v) in vin.iter().enumerate() {
                    acc += u[(r, s)] * v;
                }
                amps[base + (r << m)] = acc;
            }
        }
    }
}

/// Insert a 0 bit at the position given by the power-of-two `mask`.
#[inline(always)]
fn insert_zero(base: usize, mask: usize) -> usize {
    let low = base & (mask - 1);
    ((base & !(mask - 1)) << 1) | low
}

#[inline(always)]
fn insert_one(base: usize, mask: usize) -> usize {
    insert_zero(base, mask) | mask
}

/// Apply `exp(i * angle * P)` to the amplitude array, restricted to indices
/// whose bits contain `control_mask`. `shift` positions the word's masks at
/// the state register. Uses `exp(i a P) = cos(a) I + i sin(a) P` with
/// `P|x> = i^{#Y} (-1)^{popcount(x & yz)} |x XOR flip>`.
fn apply_pauli_exp(amps: &mut [Complex64], exp: &PauliExp, shift: usize, control_mask: usize) {
    let dim = amps.len();
    let flip = (exp.flip as usize) << shift;
    let yz = (exp.yz as usize) << shift;
    if flip == 0 {
        // Diagonal factor: phase e^{+-i angle} by the parity of index & yz;
        // the all-identity word phases the whole (controlled) subspace.
        let plus = Complex64::from_polar(1.0, exp.angle);
        let minus = plus.conj();
        let phase = |i: usize| {
            if (i & yz).count_ones() & 1 == 0 {
                plus
            } else {
                minus
            }
        };
        if control_mask == 0 {
            for (i, a) in amps.iter_mut().enumerate() {
                *a *= phase(i);
            }
        } else {
            for base in 0..dim >> 1 {
                let i = insert_one(base, control_mask);
                amps[i] *= phase(i);
            }
        }
        return;
    }
    let pivot = 1usize << flip.trailing_zeros();
    let (sin, cos) = exp.angle.sin_cos();
    // i * sin * i^{#Y}; the remaining (-1)-parity factor is applied per index.
    let k = Complex64::new(0.0, 1.0).powu(exp.y_count + 1) * sin;
    let mut update = |i: usize| {
        let j = i ^ flip;
        let sign_i = if (i & yz).count_ones() & 1 == 0 { k } else { -k };
        let sign_j = if (j & yz).count_ones() & 1 == 0 { k } else { -k };
        let a = amps[i];
        let b = amps[j];
        amps[i] = a * cos + b * sign_j;
        amps[j] = b * cos + a * sign_i;
    };
    if control_mask == 0 {
        for base in 0..dim >> 1 {
            update(insert_zero(base, pivot));
        }
    } else {
        // Control bits sit in the time-frequency register, strictly below
        // any state-register flip bit.
        debug_assert!(control_mask < pivot);
        for base in 0..dim >> 2 {
            update(insert_zero(insert_one(base, control_mask), pivot));
        }
    }
}

/// Expand a Suzuki product of the given order over `term_count` terms into
/// a flat `(term index, time fraction)` sequence; adjacent factors on the
/// same term are merged. Fractions sum to 1 for every term.
fn suzuki_sequence(order: TrotterOrder, term_count: usize) -> Vec<(usize, f64)> {
    let mut seq = Vec::new();
    match order {
        TrotterOrder::First => {
            for idx in 0..term_count {
                seq.push((idx, 1.0));
            }
        }
        TrotterOrder::Second => second_order(term_count, 1.0, &mut seq),
        TrotterOrder::Fourth => recursive_order(2, term_count, 1.0, &mut seq),
        TrotterOrder::Sixth => recursive_order(3, term_count, 1.0, &mut seq),
    }
    // Merge adjacent factors of the same term (block joints).
    let mut merged: Vec<(usize, f64)> = Vec::with_capacity(seq.len());
    for (idx, f) in seq {
        match merged.last_mut() {
            Some((last, acc)) if *last == idx => *acc += f,
            _ => merged.push((idx, f)),
        }
    }
    merged
}

fn second_order(term_count: usize, fraction: f64, out: &mut Vec<(usize, f64)>) {
    for idx in 0..term_count {
        out.push((idx, fraction / 2.0));
    }
    for idx in (0..term_count).rev() {
        out.push((idx, fraction / 2.0));
    }
}

fn recursive_order(k: u32, term_count: usize, fraction: f64, out: &mut Vec<(usize, f64)>) {
    if k == 1 {
        second_order(term_count, fraction, out);
        return;
    }
    let p = 1.0 / (4.0 - 4f64.powf(1.0 / (2.0 * k as f64 - 1.0)));
    for _ in 0..2 {
        recursive_order(k - 1, term_count, p * fraction, out);
    }
    recursive_order(k - 1, term_count, (1.0 - 4.0 * p) * fraction, out);
    for _ in 0..2 {
        recursive_order(k - 1, term_count, p * fraction, out);
    }
}
