//! Experiment configuration files.
//!
//! One TOML file describes a whole experiment: where the Hamiltonian comes
//! from (`[hamiltonian]`), how its spectrum maps onto phases (`[rescale]`),
//! the circuit to run (`[run]`), how to reconstruct a sparse spectrum from
//! the histogram (`[reconstruct]`), and where artifacts go (`[output]`).
//! Paths of referenced input files are relative to the config file; the
//! output directory is relative to the working directory.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use dosqpe_core::sim::EvolutionMode;
use dosqpe_core::{
    build_fermi_hubbard, DenseHermitian, DosQpeConfig, Error, EvolutionSpec, Hamiltonian,
    PauliSum, Probe, QubitLayout, ReconstructionConfig, RescaleParams, Result, StateVector,
    TrotterOrder,
};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub hamiltonian: HamiltonianSource,
    #[serde(default)]
    pub rescale: Option<RescaleParams>,
    pub run: RunBlock,
    #[serde(default)]
    pub reconstruct: ReconstructionConfig,
    #[serde(default)]
    pub output: Option<OutputBlock>,
}

/// Exactly one of the three sources must be set.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSource {
    #[serde(default)]
    pub fermi_hubbard: Option<FermiHubbardParams>,
    /// Text matrix file (`dim d` header, rows of `a+bi` entries).
    #[serde(default)]
    pub matrix_file: Option<PathBuf>,
    /// Pauli-sum file (`coefficient WORD` lines).
    #[serde(default)]
    pub pauli_file: Option<PathBuf>,
    /// Zero-pad a matrix file up to `2^pad_to_qubits` dimensions.
    #[serde(default)]
    pub pad_to_qubits: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FermiHubbardParams {
    pub sites: usize,
    pub t: f64,
    pub u: f64,
    #[serde(default)]
    pub periodic: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    /// Time-frequency register size (the histogram has `2^m` bins).
    pub m: usize,
    /// State register size; defaults to the Hamiltonian's qubit count.
    #[serde(default)]
    pub n: Option<usize>,
    /// Allocate a purification register; defaults to what the probe needs.
    #[serde(default)]
    pub purified: Option<bool>,
    pub probe: ProbeSpec,
    pub evolution: EvolutionSpecToml,
    #[serde(default)]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
}

/// `probe = "maximally_mixed"` or a table with `kind` plus its parameter.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ProbeSpec {
    Kind(String),
    Table(ProbeTable),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeTable {
    pub kind: String,
    /// Dicke excitation number.
    #[serde(default)]
    pub k: Option<usize>,
    /// Eigenvector index, by ascending eigenvalue.
    #[serde(default)]
    pub index: Option<usize>,
    /// Statevector dump holding custom probe amplitudes (probe-only layout).
    #[serde(default)]
    pub state_file: Option<PathBuf>,
}

/// `evolution = "exact"` or a table selecting a Trotter product.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum EvolutionSpecToml {
    Mode(String),
    Table(EvolutionBlock),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionBlock {
    /// `"exact"` or `"trotter"`.
    pub mode: String,
    #[serde(default)]
    pub order: Option<u8>,
    #[serde(default)]
    pub steps: Option<u32>,
    /// Radians of phase per unit eigenvalue; defaults to `2 pi`.
    #[serde(default)]
    pub time_scale: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: PathBuf,
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "referenced file {} does not exist",
            path.display()
        )))
    }
}

impl ExperimentConfig {
    /// Parse TOML text. `origin` only labels error messages.
    pub fn parse(text: &str, origin: &str) -> Result<ExperimentConfig> {
        toml::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("{origin}: {e}")))
    }

    /// Read and parse a config file, returning the raw text alongside (runs
    /// embed it verbatim in their result bundles). `base` for resolving
    /// referenced files is the config file's directory.
    pub fn load(path: &Path) -> Result<(ExperimentConfig, String, PathBuf)> {
        let text = fs::read_to_string(path).map_err(|e| {
            Error::InvalidArgument(format!("cannot read config {}: {e}", path.display()))
        })?;
        let config = ExperimentConfig::parse(&text, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        config.validate(&base)?;
        Ok((config, text, base))
    }

    /// Structural checks: exactly one Hamiltonian source, referenced files
    /// present, evolution block self-consistent.
    pub fn validate(&self, base: &Path) -> Result<()> {
        let h = &self.hamiltonian;
        let sources = [
            h.fermi_hubbard.is_some(),
            h.matrix_file.is_some(),
            h.pauli_file.is_some(),
        ];
        match sources.iter().filter(|s| **s).count() {
            1 => {}
            0 => {
                return Err(Error::InvalidArgument(
                    "[hamiltonian] needs one of fermi_hubbard, matrix_file, pauli_file".into(),
                ))
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "[hamiltonian] sources are mutually exclusive".into(),
                ))
            }
        }
        if h.pad_to_qubits.is_some() && h.matrix_file.is_none() {
            return Err(Error::InvalidArgument(
                "pad_to_qubits only applies to matrix_file sources".into(),
            ));
        }
        if let Some(p) = &h.matrix_file {
            require_file(&resolve(base, p))?;
        }
        if let Some(p) = &h.pauli_file {
            require_file(&resolve(base, p))?;
        }
        if let ProbeSpec::Table(t) = &self.run.probe {
            if let Some(p) = &t.state_file {
                require_file(&resolve(base, p))?;
            }
        }
        self.evolution_mode()?;
        Ok(())
    }

    pub fn hamiltonian(&self, base: &Path) -> Result<Hamiltonian> {
        let h = &self.hamiltonian;
        if let Some(fh) = &h.fermi_hubbard {
            return Ok(Hamiltonian::Pauli(build_fermi_hubbard(
                fh.sites,
                fh.t,
                fh.u,
                fh.periodic,
            )?));
        }
        if let Some(path) = &h.matrix_file {
            let path = resolve(base, path);
            let file = fs::File::open(&path)
                .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
            let mut dense = DenseHermitian::load(BufReader::new(file))?;
            if let Some(qubits) = h.pad_to_qubits {
                dense = dense.pad_to_qubits(qubits)?;
            }
            return Ok(Hamiltonian::Dense(dense));
        }
        let path = resolve(base, h.pauli_file.as_ref().expect("validated source"));
        let file = fs::File::open(&path)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        Ok(Hamiltonian::Pauli(PauliSum::parse(BufReader::new(file))?))
    }

    fn probe(&self, base: &Path, n: usize) -> Result<Probe> {
        let table = match &self.run.probe {
            ProbeSpec::Kind(kind) => ProbeTable {
                kind: kind.clone(),
                k: None,
                index: None,
                state_file: None,
            },
            ProbeSpec::Table(t) => t.clone(),
        };
        let requires = |field: Option<usize>, name: &str| {
            field.ok_or_else(|| {
                Error::InvalidArgument(format!("probe '{}' needs `{name}`", table.kind))
            })
        };
        match table.kind.as_str() {
            "maximally_mixed" => Ok(Probe::MaximallyMixed),
            "dicke" => Ok(Probe::Dicke {
                k: requires(table.k, "k")?,
            }),
            "eigenvector" => Ok(Probe::Eigenvector {
                index: requires(table.index, "index")?,
            }),
            "custom" => {
                let path = table.state_file.as_ref().ok_or_else(|| {
                    Error::InvalidArgument("probe 'custom' needs `state_file`".into())
                })?;
                let path = resolve(base, path);
                let file = fs::File::open(&path)
                    .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
                let state = StateVector::load(BufReader::new(file), QubitLayout::probe_only(n)?)?;
                Ok(Probe::Custom {
                    amplitudes: state.amplitudes().to_vec(),
                })
            }
            other => Err(Error::InvalidArgument(format!(
                "unknown probe kind {other:?}; expected maximally_mixed, dicke, eigenvector or custom"
            ))),
        }
    }

    fn evolution_mode(&self) -> Result<(EvolutionMode, Option<f64>)> {
        let block = match &self.run.evolution {
            EvolutionSpecToml::Mode(mode) => EvolutionBlock {
                mode: mode.clone(),
                order: None,
                steps: None,
                time_scale: None,
            },
            EvolutionSpecToml::Table(b) => b.clone(),
        };
        let mode = match block.mode.as_str() {
            "exact" => {
                if block.order.is_some() || block.steps.is_some() {
                    return Err(Error::InvalidArgument(
                        "exact evolution takes no order/steps".into(),
                    ));
                }
                EvolutionMode::Exact
            }
            "trotter" => {
                let order = TrotterOrder::try_from(block.order.ok_or_else(|| {
                    Error::InvalidArgument("trotter evolution needs `order`".into())
                })?)?;
                let steps = block.steps.ok_or_else(|| {
                    Error::InvalidArgument("trotter evolution needs `steps`".into())
                })?;
                EvolutionMode::Trotter { order, steps }
            }
            other => Err(Error::InvalidArgument(format!(
                "unknown evolution mode {other:?}; expected exact or trotter"
            )))?,
        };
        Ok((mode, block.time_scale))
    }

    /// Assemble the full run description, loading referenced files.
    pub fn dos_qpe_config(&self, base: &Path) -> Result<DosQpeConfig> {
        let hamiltonian = self.hamiltonian(base)?;
        let n = match self.run.n {
            Some(n) => n,
            None => hamiltonian.qubit_count()?,
        };
        let probe = self.probe(base, n)?;
        let purified = self
            .run
            .purified
            .unwrap_or(!matches!(probe, Probe::Eigenvector { .. }));
        let layout = QubitLayout::new(self.run.m, n, purified)?;
        let (mode, time_scale) = self.evolution_mode()?;
        let mut evolution = EvolutionSpec::new(hamiltonian, mode);
        if let Some(ts) = time_scale {
            evolution.time_scale = ts;
        }
        Ok(DosQpeConfig {
            layout,
            probe,
            evolution,
            rescale: self.rescale,
            shots: self.run.shots,
            seed: self.run.seed,
        })
    }

}
