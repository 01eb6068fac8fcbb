//! Provenance records and on-disk result bundles.
//!
//! A bundle is a directory holding everything needed to rerun or reanalyze a
//! run: the configuration (`config`), the exact bin probabilities
//! (`exact.csv`), sampled counts when a shot budget was set (`counts.csv`),
//! and a JSON provenance record (`meta`) with a digest of the configuration.

use std::fs;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ham::RescaleParams;
use crate::sim::{EvolutionMode, Hamiltonian, HistogramKind, PhaseHistogram, QubitLayout};

use super::{DosQpeConfig, DosQpeResult, Probe};

pub const BUNDLE_CONFIG: &str = "config";
pub const BUNDLE_EXACT: &str = "exact.csv";
pub const BUNDLE_COUNTS: &str = "counts.csv";
pub const BUNDLE_META: &str = "meta";

/// Configuration echo embedded in every result. Large payloads (custom probe
/// amplitudes, Hamiltonian matrices) are replaced by SHA-256 digests so the
/// record stays small while still pinning the inputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub layout: QubitLayout,
    pub probe: ProbeEcho,
    pub evolution: EvolutionEcho,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rescale: Option<RescaleParams>,
    pub shots: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeEcho {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_sha256: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionEcho {
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u32>,
    pub time_scale: f64,
    pub hamiltonian: HamiltonianEcho,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HamiltonianEcho {
    pub representation: String,
    pub qubits: usize,
    pub sha256: String,
}

/// What produced a result: engine name and version, the configuration echo,
/// and a digest of that echo for quick equality checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub engine: String,
    pub config_sha256: String,
    pub config: ConfigEcho,
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    let mut s = String::with_capacity(out.len() * 2);
    for b in out {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

impl ConfigEcho {
    pub fn of(config: &DosQpeConfig) -> Result<ConfigEcho> {
        let probe = match &config.probe {
            Probe::MaximallyMixed => ProbeEcho {
                kind: "maximally_mixed".into(),
                k: None,
                index: None,
                state_sha256: None,
            },
            Probe::Dicke { k } => ProbeEcho {
                kind: "dicke".into(),
                k: Some(*k),
                index: None,
                state_sha256: None,
            },
            Probe::Eigenvector { index } => ProbeEcho {
                kind: "eigenvector".into(),
                k: None,
                index: Some(*index),
                state_sha256: None,
            },
            Probe::Custom { amplitudes } => {
                let mut bytes = Vec::with_capacity(amplitudes.len() * 16);
                for a in amplitudes {
                    bytes.extend_from_slice(&a.re.to_le_bytes());
                    bytes.extend_from_slice(&a.im.to_le_bytes());
                }
                ProbeEcho {
                    kind: "custom".into(),
                    k: None,
                    index: None,
                    state_sha256: Some(hex_digest(&bytes)),
                }
            }
        };

        let hamiltonian = match &config.evolution.hamiltonian {
            Hamiltonian::Pauli(p) => {
                let mut bytes = Vec::new();
                p.write(&mut bytes)?;
                HamiltonianEcho {
                    representation: "pauli".into(),
                    qubits: p.qubit_count(),
                    sha256: hex_digest(&bytes),
                }
            }
            Hamiltonian::Dense(d) => {
                let mut bytes = Vec::new();
                d.save(&mut bytes)?;
                HamiltonianEcho {
                    representation: "dense".into(),
                    qubits: config.evolution.hamiltonian.qubit_count()?,
                    sha256: hex_digest(&bytes),
                }
            }
        };
        let (mode, order, steps) = match config.evolution.mode {
            EvolutionMode::Exact => ("exact".to_string(), None, None),
            EvolutionMode::Trotter { order, steps } => {
                ("trotter".to_string(), Some(order.into()), Some(steps))
            }
        };

        Ok(ConfigEcho {
            layout: config.layout,
            probe,
            evolution: EvolutionEcho {
                mode,
                order,
                steps,
                time_scale: config.evolution.time_scale,
                hamiltonian,
            },
            rescale: config.rescale.clone(),
            shots: config.shots,
            seed: config.seed,
        })
    }
}

impl Provenance {
    pub fn of(config: &DosQpeConfig) -> Result<Provenance> {
        let echo = ConfigEcho::of(config)?;
        let json = serde_json::to_string(&echo)
            .map_err(|e| Error::Validation(format!("cannot serialize config echo: {e}")))?;
        Ok(Provenance {
            engine: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            config_sha256: hex_digest(json.as_bytes()),
            config: echo,
        })
    }
}

/// Writes `result` as a bundle directory, creating it if needed. When the
/// caller has the original configuration file, passing its text preserves it
/// verbatim; otherwise the configuration echo is written as TOML.
pub fn write_bundle(dir: &Path, result: &DosQpeResult, config_text: Option<&str>) -> Result<()> {
    fs::create_dir_all(dir)?;
    let config = match config_text {
        Some(text) => text.to_string(),
        None => toml::to_string_pretty(&result.provenance.config)
            .map_err(|e| Error::Validation(format!("cannot serialize config echo: {e}")))?,
    };
    fs::write(dir.join(BUNDLE_CONFIG), config)?;

    let mut exact = Vec::new();
    result.exact_distribution.write_csv(&mut exact)?;
    fs::write(dir.join(BUNDLE_EXACT), exact)?;

    if let Some(counts) = &result.sampled {
        let mut buf = Vec::new();
        counts.write_csv(&mut buf)?;
        fs::write(dir.join(BUNDLE_COUNTS), buf)?;
    }

    let meta = serde_json::to_string_pretty(&result.provenance)
        .map_err(|e| Error::Validation(format!("cannot serialize provenance: {e}")))?;
    fs::write(dir.join(BUNDLE_META), meta + "\n")?;
    Ok(())
}

/// Reads `exact.csv` (for [`HistogramKind::Probabilities`]) or `counts.csv`
/// (for [`HistogramKind::Counts`]) back from a bundle directory.
pub fn read_bundle_histogram(dir: &Path, kind: HistogramKind) -> Result<PhaseHistogram> {
    let name = match kind {
        HistogramKind::Probabilities => BUNDLE_EXACT,
        HistogramKind::Counts => BUNDLE_COUNTS,
    };
    let path = dir.join(name);
    if !path.exists() {
        return Err(Error::invalid(format!(
            "bundle {} has no {name}",
            dir.display()
        )));
    }
    PhaseHistogram::read_csv(BufReader::new(fs::File::open(path)?), kind)
}

/// Reads the provenance record back from a bundle directory.
pub fn read_provenance(dir: &Path) -> Result<Provenance> {
    let text = fs::read_to_string(dir.join(BUNDLE_META))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        line: e.line(),
        message: format!("malformed provenance record: {e}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ham::DenseHermitian;
    use crate::protocol::run;
    use crate::sim::EvolutionSpec;

    fn sample_config(shots: u64) -> DosQpeConfig {
        let h = DenseHermitian::from_diagonal(&[0.0, 0.25, 0.5, 0.75]).unwrap();
        DosQpeConfig {
            layout: QubitLayout::new(2, 2, true).unwrap(),
            probe: Probe::MaximallyMixed,
            evolution: EvolutionSpec::exact(Hamiltonian::Dense(h)),
            rescale: None,
            shots,
            seed: 11,
        }
    }

    #[test]
    fn bundle_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let result = run(&sample_config(200)).unwrap();
        write_bundle(dir.path(), &result, None).unwrap();
        for name in [BUNDLE_CONFIG, BUNDLE_EXACT, BUNDLE_COUNTS, BUNDLE_META] {
            assert!(dir.path().join(name).exists(), "missing {name}");
        }

        let exact = read_bundle_histogram(dir.path(), HistogramKind::Probabilities).unwrap();
        assert_eq!(exact.values(), result.exact_distribution.values());
        let counts = read_bundle_histogram(dir.path(), HistogramKind::Counts).unwrap();
        assert_eq!(counts.values(), result.sampled.as_ref().unwrap().values());

        let meta = read_provenance(dir.path()).unwrap();
        assert_eq!(meta.config_sha256, result.provenance.config_sha256);
        assert_eq!(meta.config.seed, 11);
        assert_eq!(meta.config.probe.kind, "maximally_mixed");

        // The echoed config must itself be valid TOML.
        let text = fs::read_to_string(dir.path().join(BUNDLE_CONFIG)).unwrap();
        toml::from_str::<ConfigEcho>(&text).unwrap();
    }

    #[test]
    fn exact_mode_bundle_has_no_counts() {
        let dir = tempfile::tempdir().unwrap();
        let result = run(&sample_config(0)).unwrap();
        write_bundle(dir.path(), &result, Some("# original\n")).unwrap();
        assert!(!dir.path().join(BUNDLE_COUNTS).exists());
        assert!(read_bundle_histogram(dir.path(), HistogramKind::Counts).is_err());
        assert_eq!(
            fs::read_to_string(dir.path().join(BUNDLE_CONFIG)).unwrap(),
            "# original\n"
        );
    }

    #[test]
    fn digest_tracks_config_changes() {
        let a = Provenance::of(&sample_config(0)).unwrap();
        let b = Provenance::of(&sample_config(0)).unwrap();
        assert_eq!(a.config_sha256, b.config_sha256);
        let mut changed = sample_config(0);
        changed.seed = 12;
        let c = Provenance::of(&changed).unwrap();
        assert_ne!(a.config_sha256, c.config_sha256);
    }
}
