//! The five subcommands: spectrum, run, reconstruct, compare, plot.

use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Serialize;

use dosqpe_core::ham::DEGENERACY_TOL;
use dosqpe_core::protocol::{
    n_eff_of_probe, read_bundle_histogram, read_provenance, write_bundle, ConfigEcho, Provenance,
    BUNDLE_CONFIG, BUNDLE_COUNTS,
};
use dosqpe_core::recon::{
    histogram_points, rounded_histogram_points, spectrum_points, ConstraintMode, Fidelity,
};
use dosqpe_core::sim::HistogramKind;
use dosqpe_core::{
    reconstruct, wasserstein1, Error, EstimateEntry, PhaseHistogram, ReconstructionConfig,
    RescaleParams, Result, SpectralEstimate, Spectrum, TransportGeometry,
};

use crate::config::ExperimentConfig;
use crate::plot;

pub const SPECTRUM_CSV: &str = "spectrum.csv";
pub const ESTIMATE_CSV: &str = "estimate.csv";
pub const DIAGNOSTICS_JSON: &str = "diagnostics.json";
pub const COMPARE_TXT: &str = "compare.txt";
pub const HISTOGRAM_SVG: &str = "histogram.svg";

/// Which bundle histogram a command reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Source {
    /// Exact bin probabilities (`exact.csv`).
    Exact,
    /// Sampled counts (`counts.csv`).
    Counts,
}

impl Source {
    fn label(self) -> &'static str {
        match self {
            Source::Exact => "exact",
            Source::Counts => "counts",
        }
    }
}

fn out_dir(flag: Option<&Path>, config: &ExperimentConfig) -> Result<PathBuf> {
    match (flag, &config.output) {
        (Some(dir), _) => Ok(dir.to_path_buf()),
        (None, Some(block)) => Ok(block.dir.clone()),
        (None, None) => Err(Error::InvalidArgument(
            "no output directory; pass --out or set [output] dir in the config".into(),
        )),
    }
}

fn bundle_out(flag: Option<&Path>, bundle: &Path) -> PathBuf {
    flag.map(Path::to_path_buf)
        .unwrap_or_else(|| bundle.to_path_buf())
}

/// Reads the selected histogram; with no explicit choice, counts win when
/// the bundle has them.
fn pick_histogram(bundle: &Path, from: Option<Source>) -> Result<(PhaseHistogram, Source)> {
    let source = from.unwrap_or_else(|| {
        if bundle.join(BUNDLE_COUNTS).is_file() {
            Source::Counts
        } else {
            Source::Exact
        }
    });
    let kind = match source {
        Source::Exact => HistogramKind::Probabilities,
        Source::Counts => HistogramKind::Counts,
    };
    Ok((read_bundle_histogram(bundle, kind)?, source))
}

/// What a bundle-based command knows about the experiment behind a bundle:
/// the experiment config when one is reachable (passed explicitly, or the
/// text embedded in the bundle) and the provenance record as a fallback.
/// File references in an embedded config resolve against the bundle
/// directory, so configs that point elsewhere need `--config`.
struct BundleContext {
    experiment: Option<(ExperimentConfig, PathBuf)>,
    provenance: Option<Provenance>,
}

impl BundleContext {
    fn open(bundle: &Path, config_flag: Option<&Path>) -> Result<BundleContext> {
        if !bundle.is_dir() {
            return Err(Error::InvalidArgument(format!(
                "bundle {} is not a directory",
                bundle.display()
            )));
        }
        let experiment = match config_flag {
            Some(path) => {
                let (config, _, base) = ExperimentConfig::load(path)?;
                Some((config, base))
            }
            None => {
                let path = bundle.join(BUNDLE_CONFIG);
                fs::read_to_string(&path).ok().and_then(|text| {
                    let config =
                        ExperimentConfig::parse(&text, &path.display().to_string()).ok()?;
                    Some((config, bundle.to_path_buf()))
                })
            }
        };
        Ok(BundleContext {
            experiment,
            provenance: read_provenance(bundle).ok(),
        })
    }

    /// Spectral samples one shot is worth, for the total-degeneracy default.
    fn infer_n_eff(&self) -> Result<u64> {
        if let Some((exp, base)) = &self.experiment {
            if let Ok(qpe) = exp.dos_qpe_config(base) {
                return n_eff_of_probe(&qpe.probe, &qpe.layout);
            }
        }
        if let Some(p) = &self.provenance {
            return echo_n_eff(&p.config);
        }
        Err(Error::InvalidArgument(
            "cannot infer the total degeneracy; set [reconstruct] total or pass --config".into(),
        ))
    }

    fn recon_config(&self) -> ReconstructionConfig {
        self.experiment
            .as_ref()
            .map(|(exp, _)| exp.reconstruct.clone())
            .unwrap_or_default()
    }

    /// Exact spectrum of the experiment's Hamiltonian, in phase units.
    fn exact_phase_spectrum(&self) -> Result<Spectrum> {
        let (exp, base) = self.experiment.as_ref().ok_or_else(|| {
            Error::InvalidArgument(
                "the exact spectrum needs an experiment config; pass --config".into(),
            )
        })?;
        let dense = exp.hamiltonian(base)?.to_dense()?;
        let spectrum = dense.exact_spectrum(DEGENERACY_TOL)?;
        phase_spectrum(&spectrum, exp.rescale.as_ref(), exp.run.m)
    }
}

fn echo_n_eff(echo: &ConfigEcho) -> Result<u64> {
    let n = echo.layout.n;
    match echo.probe.kind.as_str() {
        "maximally_mixed" => Ok(1u64 << n),
        "dicke" => {
            let k = echo
                .probe
                .k
                .ok_or_else(|| Error::Validation("dicke probe record lacks k".into()))?;
            Ok(binomial(n, k))
        }
        "eigenvector" => Ok(1),
        other => Err(Error::InvalidArgument(format!(
            "probe kind {other:?} does not record its rank; set [reconstruct] total"
        ))),
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n.saturating_sub(k));
    let mut value: u64 = 1;
    for i in 0..k {
        value = value * (n - i) as u64 / (i + 1) as u64;
    }
    value
}

/// Map an eigenvalue spectrum into phase units: through the rescale when one
/// is set, otherwise folded into `[0, 1)` as-is.
fn phase_spectrum(
    spectrum: &Spectrum,
    rescale: Option<&RescaleParams>,
    m: usize,
) -> Result<Spectrum> {
    match rescale {
        Some(params) => params
            .validated()?
            .resolved_for_register(m as u32)
            .apply_spectrum(spectrum),
        None => {
            let mut folded = Vec::new();
            for e in spectrum.entries() {
                folded.extend(std::iter::repeat(e.phase.rem_euclid(1.0)).take(e.degeneracy));
            }
            Spectrum::group(&folded, DEGENERACY_TOL)
        }
    }
}

/// Per-eigenvalue size of the degeneracy group it belongs to; `values` must
/// be sorted ascending.
fn group_sizes(values: &[f64], tol: f64) -> Vec<usize> {
    let mut sizes = vec![0usize; values.len()];
    let mut start = 0;
    for i in 0..values.len() {
        if i + 1 == values.len() || values[i + 1] - values[i] > tol {
            for s in &mut sizes[start..=i] {
                *s = i - start + 1;
            }
            start = i + 1;
        }
    }
    sizes
}

pub fn cmd_spectrum(config_path: &Path, out_flag: Option<&Path>) -> Result<()> {
    let (config, _, base) = ExperimentConfig::load(config_path)?;
    let dense = config.hamiltonian(&base)?.to_dense()?;
    let eig = dense.eigendecomposition()?;
    let rescale = match &config.rescale {
        Some(p) => Some(p.validated()?.resolved_for_register(config.run.m as u32)),
        None => None,
    };
    let sizes = group_sizes(&eig.values, DEGENERACY_TOL);

    let mut text = String::from("phase,eigenvalue,degeneracy\n");
    for (value, size) in eig.values.iter().zip(&sizes) {
        let phase = match &rescale {
            Some(p) => p.phase_of(*value),
            None => value.rem_euclid(1.0),
        };
        let _ = writeln!(text, "{phase:.17e},{value:.17e},{size}");
    }

    let out = out_dir(out_flag, &config)?;
    fs::create_dir_all(&out)?;
    let path = out.join(SPECTRUM_CSV);
    fs::write(&path, text)?;
    let distinct = Spectrum::group(&eig.values, DEGENERACY_TOL)?.len();
    println!(
        "wrote {} ({} eigenvalues, {} distinct lines)",
        path.display(),
        eig.values.len(),
        distinct
    );
    Ok(())
}

pub fn cmd_run(
    config_path: &Path,
    out_flag: Option<&Path>,
    shots: Option<u64>,
    seed: Option<u64>,
) -> Result<()> {
    let (config, text, base) = ExperimentConfig::load(config_path)?;
    let mut qpe = config.dos_qpe_config(&base)?;
    if let Some(s) = shots {
        qpe.shots = s;
    }
    if let Some(s) = seed {
        qpe.seed = s;
    }
    let out = out_dir(out_flag, &config)?;
    let result = dosqpe_core::run(&qpe)?;
    write_bundle(&out, &result, Some(&text))?;
    println!(
        "wrote bundle {} ({} bins, n_eff {}, shots {})",
        out.display(),
        result.exact_distribution.bins(),
        result.n_eff,
        qpe.shots
    );
    Ok(())
}

#[derive(Serialize)]
struct W1Report {
    geometry: &'static str,
    /// Histogram bins as-is vs the exact spectrum.
    histogram: f64,
    /// Bins scaled to the total and integer-rounded vs the exact spectrum.
    #[serde(skip_serializing_if = "Option::is_none")]
    rounded: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    improvement_over_histogram_pct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    improvement_over_rounded_pct: Option<f64>,
}

fn improvement_pct(base: Option<f64>, estimate: Option<f64>) -> Option<f64> {
    match (base, estimate) {
        (Some(b), Some(e)) if b > 0.0 => Some((1.0 - e / b) * 100.0),
        (Some(_), Some(e)) if e == 0.0 => Some(0.0),
        _ => None,
    }
}

fn w1_report(
    histogram: &PhaseHistogram,
    estimate: Option<&[EstimateEntry]>,
    exact: &Spectrum,
    total: u64,
) -> Result<W1Report> {
    let geometry = TransportGeometry::Line;
    let exact_pts = spectrum_points(exact);
    let hist = wasserstein1(&histogram_points(histogram), &exact_pts, geometry)?;
    let rounded_pts = rounded_histogram_points(histogram, total);
    let rounded = if rounded_pts.is_empty() {
        None
    } else {
        Some(wasserstein1(&rounded_pts, &exact_pts, geometry)?)
    };
    let estimate = match estimate {
        Some(entries) if !entries.is_empty() => {
            let pts: Vec<(f64, f64)> = entries
                .iter()
                .map(|e| (e.theta_hat, e.d_hat as f64))
                .collect();
            Some(wasserstein1(&pts, &exact_pts, geometry)?)
        }
        _ => None,
    };
    Ok(W1Report {
        geometry: "line",
        histogram: hist,
        rounded,
        estimate,
        improvement_over_histogram_pct: improvement_pct(Some(hist), estimate),
        improvement_over_rounded_pct: improvement_pct(rounded, estimate),
    })
}

#[derive(Serialize)]
struct DiagnosticsReport {
    source: &'static str,
    bins: usize,
    total: u64,
    grid_factor: usize,
    lambda: f64,
    tau: f64,
    cluster_eps: f64,
    constraint_mode: ConstraintMode,
    fidelity: Fidelity,
    objective: f64,
    iterations: usize,
    residual_norm: f64,
    kkt_residual: f64,
    converged: bool,
    entries: usize,
    total_degeneracy: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    w1: Option<W1Report>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Validation(format!("cannot serialize report: {e}")))?;
    fs::write(path, json + "\n")?;
    Ok(())
}

pub fn cmd_reconstruct(
    bundle: &Path,
    config_flag: Option<&Path>,
    out_flag: Option<&Path>,
    from: Option<Source>,
) -> Result<()> {
    let ctx = BundleContext::open(bundle, config_flag)?;
    let (histogram, source) = pick_histogram(bundle, from)?;

    let mut recon = ctx.recon_config();
    if recon.total.is_none() {
        recon.total = Some(ctx.infer_n_eff()?);
    }
    let total = recon.total.expect("just filled");

    let estimate = reconstruct(&histogram, &recon)?;

    let out = bundle_out(out_flag, bundle);
    fs::create_dir_all(&out)?;
    let csv_path = out.join(ESTIMATE_CSV);
    let mut csv = Vec::new();
    estimate.write_csv(&mut csv)?;
    fs::write(&csv_path, csv)?;

    let w1 = match ctx.exact_phase_spectrum() {
        Ok(exact) => Some(w1_report(
            &histogram,
            Some(&estimate.entries),
            &exact,
            total,
        )?),
        Err(_) => None,
    };
    let report = DiagnosticsReport {
        source: source.label(),
        bins: histogram.bins(),
        total,
        grid_factor: recon.grid_factor,
        lambda: estimate.diagnostics.lambda,
        tau: recon.tau,
        cluster_eps: recon.resolved_cluster_eps(histogram.bins()),
        constraint_mode: recon.constraint_mode,
        fidelity: recon.fidelity,
        objective: estimate.diagnostics.objective,
        iterations: estimate.diagnostics.iterations,
        residual_norm: estimate.diagnostics.residual_norm,
        kkt_residual: estimate.diagnostics.kkt_residual,
        converged: estimate.diagnostics.converged,
        entries: estimate.entries.len(),
        total_degeneracy: estimate.total_degeneracy(),
        w1,
    };
    write_json(&out.join(DIAGNOSTICS_JSON), &report)?;

    if estimate.is_empty() {
        eprintln!(
            "warning: no candidate weight exceeded tau = {}; the estimate is empty",
            recon.tau
        );
    }
    println!(
        "wrote {} ({} lines, total degeneracy {})",
        csv_path.display(),
        estimate.entries.len(),
        estimate.total_degeneracy()
    );

    if !estimate.diagnostics.converged {
        return Err(Error::Numerical(format!(
            "solver hit the iteration cap ({}) before reaching tolerance {}",
            estimate.diagnostics.iterations, recon.tolerance
        )));
    }
    Ok(())
}

fn read_estimate(path: &Path) -> Result<Vec<EstimateEntry>> {
    let file = fs::File::open(path)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    SpectralEstimate::read_csv(BufReader::new(file))
}

pub fn cmd_compare(
    bundle: &Path,
    config_flag: Option<&Path>,
    estimate_flag: Option<&Path>,
    out_flag: Option<&Path>,
    from: Option<Source>,
) -> Result<()> {
    let ctx = BundleContext::open(bundle, config_flag)?;
    let (histogram, source) = pick_histogram(bundle, from)?;
    let estimate_path = estimate_flag
        .map(Path::to_path_buf)
        .unwrap_or_else(|| bundle.join(ESTIMATE_CSV));
    let entries = read_estimate(&estimate_path)?;
    if entries.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "estimate {} has no lines; nothing to compare",
            estimate_path.display()
        )));
    }

    let exact = ctx.exact_phase_spectrum()?;
    let total = match ctx.recon_config().total {
        Some(t) => t,
        None => ctx
            .infer_n_eff()
            .unwrap_or(exact.total_degeneracy() as u64),
    };
    let estimate_total: u64 = entries.iter().map(|e| e.d_hat).sum();
    if estimate_total != total {
        eprintln!(
            "warning: estimate total degeneracy {estimate_total} differs from the run's {total}; \
             distances use normalized measures"
        );
    }

    let w1 = w1_report(&histogram, Some(&entries), &exact, total)?;
    let mut report = String::new();
    let _ = writeln!(
        report,
        "histogram: {} ({} bins), exact spectrum: {} lines, total degeneracy {}",
        source.label(),
        histogram.bins(),
        exact.len(),
        total
    );
    let _ = writeln!(report, "W1(histogram, exact) = {:.17e}", w1.histogram);
    if let Some(rounded) = w1.rounded {
        let _ = writeln!(report, "W1(rounded,   exact) = {rounded:.17e}");
    }
    let estimate_w1 = w1.estimate.expect("nonempty estimate scored");
    let _ = writeln!(report, "W1(estimate,  exact) = {estimate_w1:.17e}");
    if let Some(pct) = w1.improvement_over_histogram_pct {
        let _ = writeln!(report, "improvement over the raw histogram: {pct:.1}%");
    }
    if let Some(pct) = w1.improvement_over_rounded_pct {
        let _ = writeln!(report, "improvement over integer rounding:  {pct:.1}%");
    }

    print!("{report}");
    let out = bundle_out(out_flag, bundle);
    fs::create_dir_all(&out)?;
    fs::write(out.join(COMPARE_TXT), report)?;
    Ok(())
}

pub fn cmd_plot(
    bundle: &Path,
    config_flag: Option<&Path>,
    estimate_flag: Option<&Path>,
    out_flag: Option<&Path>,
    from: Option<Source>,
) -> Result<()> {
    let ctx = BundleContext::open(bundle, config_flag)?;
    let (histogram, _) = pick_histogram(bundle, from)?;
    let exact = ctx.exact_phase_spectrum().ok();
    let entries = match estimate_flag {
        Some(path) => Some(read_estimate(path)?),
        None => {
            let path = bundle.join(ESTIMATE_CSV);
            if path.is_file() {
                Some(read_estimate(&path)?)
            } else {
                None
            }
        }
    };

    let svg = plot::render_svg(&histogram, exact.as_ref(), entries.as_deref());
    let out = bundle_out(out_flag, bundle);
    fs::create_dir_all(&out)?;
    let path = out.join(HISTOGRAM_SVG);
    fs::write(&path, svg)?;
    println!("wrote {}", path.display());
    Ok(())
}
