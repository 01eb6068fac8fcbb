//! End-to-end ensemble phase-estimation runs.
//!
//! A run wires the layers together: rescale the Hamiltonian into phase
//! units, prepare the probe (purifying it into the third register when the
//! probe is an ensemble), run the phase-estimation circuit, and marginalize
//! the time-frequency register into a histogram. Exact bin probabilities are
//! always produced; sampling them with a finite shot budget is optional.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ham::{RescaleParams, Spectrum, SpectrumEntry, DEGENERACY_TOL};
use crate::recon::kernel_value;
use crate::sim::{
    apply_controlled_powers, EvolutionSpec, Hamiltonian, PhaseHistogram, QubitLayout, StateVector,
};

mod bundle;

pub use bundle::{
    read_bundle_histogram, read_provenance, write_bundle, ConfigEcho, EvolutionEcho,
    HamiltonianEcho, ProbeEcho, Provenance, BUNDLE_CONFIG, BUNDLE_COUNTS, BUNDLE_EXACT,
    BUNDLE_META,
};

/// Eigenvalues of a reduced probe state below this are treated as zero when
/// counting its rank.
pub const RANK_TOL: f64 = 1e-10;

/// Largest time-frequency register accepted by the closed-form response.
const MAX_RESPONSE_BITS: usize = 30;

/// Initial state of the state register, before any optional purification.
#[derive(Debug, Clone, PartialEq)]
pub enum Probe {
    /// The maximally mixed state `I / 2^n`, realized by copying a uniform
    /// superposition into the purification register.
    MaximallyMixed,
    /// Equal-weight superposition of all computational states with exactly
    /// `k` set bits, purified into the diagonal ensemble over that shell.
    Dicke { k: usize },
    /// A single eigenvector of the (rescaled) Hamiltonian, by ascending
    /// eigenvalue index. Runs coherently; no purification is applied.
    Eigenvector { index: usize },
    /// Caller-supplied amplitudes on the state register. With a purified
    /// layout the computational-basis weights `|c_x|^2` become a classical
    /// ensemble; without one the state runs coherently.
    Custom { amplitudes: Vec<Complex64> },
}

impl Probe {
    /// Short lowercase tag used in provenance records.
    pub fn kind(&self) -> &'static str {
        match self {
            Probe::MaximallyMixed => "maximally_mixed",
            Probe::Dicke { .. } => "dicke",
            Probe::Eigenvector { .. } => "eigenvector",
            Probe::Custom { .. } => "custom",
        }
    }

    /// Whether preparation copies the state register into the purification
    /// register.
    fn cascades(&self) -> bool {
        !matches!(self, Probe::Eigenvector { .. })
    }

    fn validate(&self, layout: &QubitLayout) -> Result<()> {
        match self {
            Probe::MaximallyMixed | Probe::Dicke { .. } if !layout.purified => Err(Error::invalid(
                format!("probe '{}' requires a purified layout", self.kind()),
            )),
            Probe::Dicke { k } if *k > layout.n => Err(Error::invalid(format!(
                "dicke weight {k} exceeds register size {}",
                layout.n
            ))),
            Probe::Custom { amplitudes } if amplitudes.len() != 1 << layout.n => {
                Err(Error::invalid(format!(
                    "custom probe has {} amplitudes but the state register needs {}",
                    amplitudes.len(),
                    1usize << layout.n
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone)]
pub struct DosQpeConfig {
    pub layout: QubitLayout,
    pub probe: Probe,
    pub evolution: EvolutionSpec,
    /// Affine map into phase units, applied before simulation. `None` means
    /// the Hamiltonian is already expressed in phases.
    pub rescale: Option<RescaleParams>,
    /// Number of samples drawn from the exact distribution; `0` keeps the
    /// run in exact-probability mode.
    pub shots: u64,
    pub seed: u64,
}

/// Output of [`run`].
#[derive(Debug, Clone)]
pub struct DosQpeResult {
    /// Exact bin probabilities of the time-frequency register.
    pub exact_distribution: PhaseHistogram,
    /// Multinomial counts drawn from the exact distribution, present iff
    /// `shots > 0`.
    pub sampled: Option<PhaseHistogram>,
    /// Number of spectral samples one shot is worth (rank of the probe).
    pub n_eff: u64,
    pub provenance: Provenance,
}

/// Applies the configured rescale to the evolution's Hamiltonian, resolving
/// an automatic top margin against the register size `m`.
pub fn effective_evolution(
    evolution: &EvolutionSpec,
    rescale: Option<&RescaleParams>,
    m: usize,
) -> Result<EvolutionSpec> {
    let Some(params) = rescale else {
        return Ok(evolution.clone());
    };
    let params = params.clone().validated()?.resolved_for_register(m as u32);
    let hamiltonian = match &evolution.hamiltonian {
        Hamiltonian::Pauli(p) => Hamiltonian::Pauli(params.apply_pauli(p)?),
        Hamiltonian::Dense(d) => Hamiltonian::Dense(params.apply_dense(d)?),
    };
    Ok(EvolutionSpec {
        hamiltonian,
        mode: evolution.mode,
        time_scale: evolution.time_scale,
    })
}

fn prepare_probe(probe: &Probe, spec: &EvolutionSpec, n: usize) -> Result<StateVector> {
    match probe {
        Probe::MaximallyMixed => {
            let amp = Complex64::new((1u64 << n) as f64, 0.0).sqrt().inv();
            StateVector::probe_from_amplitudes(n, vec![amp; 1 << n])
        }
        Probe::Dicke { k } => StateVector::prepare_dicke(n, *k),
        Probe::Eigenvector { index } => {
            let eig = spec.hamiltonian.to_dense()?.eigendecomposition()?;
            if *index >= eig.dim() {
                return Err(Error::invalid(format!(
                    "eigenvector index {index} out of range for dimension {}",
                    eig.dim()
                )));
            }
            let amps = eig.vectors.column(*index).iter().copied().collect();
            StateVector::probe_from_amplitudes(n, amps)
        }
        Probe::Custom { amplitudes } => StateVector::probe_from_amplitudes(n, amplitudes.clone()),
    }
}

/// Executes the phase-estimation circuit described by `config`.
pub fn run(config: &DosQpeConfig) -> Result<DosQpeResult> {
    let layout = config.layout;
    if layout.m == 0 {
        return Err(Error::invalid(
            "run requires a time-frequency register (m >= 1)",
        ));
    }
    config.probe.validate(&layout)?;
    let acting = config.evolution.hamiltonian.qubit_count()?;
    if acting != layout.n {
        return Err(Error::invalid(format!(
            "hamiltonian acts on {acting} qubits but the state register has {}",
            layout.n
        )));
    }

    let spec = effective_evolution(&config.evolution, config.rescale.as_ref(), layout.m)?;
    let probe = prepare_probe(&config.probe, &spec, layout.n)?;
    let mut state = StateVector::embed_probe(layout, &probe)?;
    if layout.purified && config.probe.cascades() {
        state.apply_purification_cascade()?;
    }
    state.apply_hadamard_layer();
    apply_controlled_powers(&mut state, &spec)?;
    state.apply_inverse_qft();

    let exact_distribution = state.marginal_timefreq()?;
    let sampled = match config.shots {
        0 => None,
        shots => Some(exact_distribution.sample(shots, config.seed)?),
    };
    Ok(DosQpeResult {
        n_eff: n_eff_of_probe(&config.probe, &layout)?,
        provenance: Provenance::of(config)?,
        exact_distribution,
        sampled,
    })
}

/// Number of independent spectral samples a single measurement of the probe
/// carries: the rank of the reduced state-register density matrix.
pub fn n_eff_of_probe(probe: &Probe, layout: &QubitLayout) -> Result<u64> {
    probe.validate(layout)?;
    Ok(match probe {
        Probe::MaximallyMixed => 1u64 << layout.n,
        Probe::Dicke { k } => crate::sim::state::binomial(layout.n, *k) as u64,
        Probe::Eigenvector { .. } => 1,
        Probe::Custom { amplitudes } => {
            if layout.purified {
                // The cascaded reduced state is diagonal with entries
                // |c_x|^2, so its rank is the number of nonzero weights.
                amplitudes
                    .iter()
                    .filter(|c| c.norm_sqr() > RANK_TOL)
                    .count()
                    .max(1) as u64
            } else {
                1
            }
        }
    })
}

/// Shot budget that resolves each of `n_eff` spectral lines on an `m`-bit
/// register to statistical precision `delta`: `ceil(n_eff * 2^m / delta^2)`.
pub fn shots_required(n_eff: u64, m: u32, delta: f64) -> Result<u64> {
    if n_eff == 0 {
        return Err(Error::invalid("n_eff must be positive"));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::invalid("delta must be a positive finite number"));
    }
    let shots = (n_eff as f64 * 2f64.powi(m as i32) / (delta * delta)).ceil();
    if !(shots <= u64::MAX as f64) {
        return Err(Error::ResourceLimit(format!(
            "required shot count {shots:e} overflows a 64-bit counter"
        )));
    }
    Ok(shots as u64)
}

/// Spectral lines of the evolution's Hamiltonian together with the weight
/// the probe places on each line.
///
/// Eigenvalues are converted to phases (`time_scale / 2 pi` turns per unit
/// eigenvalue) and grouped into lines with [`DEGENERACY_TOL`]; the weight of
/// a line is `sum_j <v_j| rho |v_j>` over its eigenvectors, where `rho` is
/// the reduced probe state. Weights sum to one.
pub fn probe_spectral_lines(
    spec: &EvolutionSpec,
    probe: &Probe,
    purified: bool,
) -> Result<(Spectrum, Vec<f64>)> {
    let n = spec.hamiltonian.qubit_count()?;
    let eig = spec.hamiltonian.to_dense()?.eigendecomposition()?;
    let dim = eig.dim();
    let per_state: Vec<f64> = match probe {
        Probe::MaximallyMixed => vec![1.0 / dim as f64; dim],
        Probe::Dicke { k } => {
            let shell: Vec<usize> = (0..dim).filter(|x| x.count_ones() as usize == *k).collect();
            if shell.is_empty() {
                return Err(Error::invalid(format!(
                    "dicke weight {k} exceeds register size {n}"
                )));
            }
            let norm = 1.0 / shell.len() as f64;
            (0..dim)
                .map(|j| {
                    shell
                        .iter()
                        .map(|&x| eig.vectors[(x, j)].norm_sqr())
                        .sum::<f64>()
                        * norm
                })
                .collect()
        }
        Probe::Eigenvector { index } => {
            if *index >= dim {
                return Err(Error::invalid(format!(
                    "eigenvector index {index} out of range for dimension {dim}"
                )));
            }
            let mut w = vec![0.0; dim];
            w[*index] = 1.0;
            w
        }
        Probe::Custom { amplitudes } => {
            if amplitudes.len() != dim {
                return Err(Error::invalid(format!(
                    "custom probe has {} amplitudes but the Hamiltonian dimension is {dim}",
                    amplitudes.len()
                )));
            }
            if purified {
                (0..dim)
                    .map(|j| {
                        (0..dim)
                            .map(|x| eig.vectors[(x, j)].norm_sqr() * amplitudes[x].norm_sqr())
                            .sum()
                    })
                    .collect()
            } else {
                (0..dim)
                    .map(|j| {
                        (0..dim)
                            .map(|x| eig.vectors[(x, j)].conj() * amplitudes[x])
                            .sum::<Complex64>()
                            .norm_sqr()
                    })
                    .collect()
            }
        }
    };

    let turns = spec.time_scale / std::f64::consts::TAU;
    let phases: Vec<f64> = eig.values.iter().map(|v| v * turns).collect();
    let mut entries = Vec::new();
    let mut weights = Vec::new();
    let mut start = 0;
    for j in 1..=dim {
        if j == dim || phases[j] - phases[j - 1] > DEGENERACY_TOL {
            let members = &phases[start..j];
            entries.push(SpectrumEntry {
                phase: members.iter().sum::<f64>() / members.len() as f64,
                degeneracy: j - start,
            });
            weights.push(per_state[start..j].iter().sum());
            start = j;
        }
    }
    Ok((Spectrum::new(entries)?, weights))
}

/// Exact bin probabilities computed in closed form: each spectral line
/// contributes its weight spread by the squared-Dirichlet kernel,
/// `P(y) = sum_i w_i K(theta_i - y / 2^m)`.
///
/// This path never touches the state-vector simulator, so it serves as an
/// independent oracle for [`run`] with exact evolution.
pub fn analytic_response(
    spectrum: &Spectrum,
    weights: &[f64],
    m: usize,
) -> Result<PhaseHistogram> {
    if weights.len() != spectrum.len() {
        return Err(Error::invalid(format!(
            "{} weights supplied for {} spectral lines",
            weights.len(),
            spectrum.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::invalid("line weights must be finite and nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "line weights sum to {total}, expected 1"
        )));
    }
    if m > MAX_RESPONSE_BITS {
        return Err(Error::ResourceLimit(format!(
            "response register of {m} bits exceeds the {MAX_RESPONSE_BITS}-bit limit"
        )));
    }
    let bins = 1usize << m;
    let values = (0..bins)
        .map(|y| {
            let grid = y as f64 / bins as f64;
            spectrum
                .entries()
                .iter()
                .zip(weights)
                .map(|(e, w)| w * kernel_value(e.phase - grid, bins))
                .sum()
        })
        .collect();
    PhaseHistogram::from_probabilities(m, values)
}

/// Closed-form prediction of [`run`]'s exact distribution for `config`,
/// assuming ideal (non-Trotterized) evolution.
pub fn analytic_prediction(config: &DosQpeConfig) -> Result<PhaseHistogram> {
    let spec = effective_evolution(&config.evolution, config.rescale.as_ref(), config.layout.m)?;
    let (lines, weights) = probe_spectral_lines(&spec, &config.probe, config.layout.purified)?;
    analytic_response(&lines, &weights, config.layout.m)
}
