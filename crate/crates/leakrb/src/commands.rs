//! The subcommands, callable as library functions.

use std::path::{Path, PathBuf};

use leakrb_core::channel::{infidelity_comp_exact, ErrorModel, GateErrors};
use leakrb_core::clifford::{expected_cardinality, generate_clifford_group, ExtendedCliffordSet};
use leakrb_core::engine::{
    analytic_variance_curve, summarize, LengthSummary, SequenceResult, VarianceCurve,
};
use leakrb_core::fit::{
    error_per_gate, fit_decay, fit_variance_shape, safe_error_bound, DecayFit, DecaySample,
    IrbEstimate, SequenceGroup, VarianceShape,
};
use serde::{Deserialize, Serialize};

use crate::config::{Overrides, RbConfig};
use crate::error::{CliError, Result};
use crate::io::{self, PlotRow, RunManifest, Truth, VarianceRow};
use crate::parallel::{bootstrap_par, run_irb_par, run_protocol_par};

pub const MANIFEST: &str = "manifest.json";

pub fn group_cache_path(dir: &Path, n_qubits: usize) -> PathBuf {
    dir.join(format!("clifford_group_n{n_qubits}.json"))
}

/// Enumerates `C_N`, writes the cache into `out_dir` and returns its path
/// and cardinality.
pub fn cmd_gen_group(n_qubits: usize, out_dir: &Path) -> Result<(PathBuf, usize)> {
    let group = generate_clifford_group(n_qubits)?;
    if Some(group.len()) != expected_cardinality(n_qubits) {
        return Err(CliError::Integrity(format!(
            "unexpected group cardinality {}",
            group.len()
        )));
    }
    let path = group_cache_path(out_dir, n_qubits);
    io::write_group_cache(&path, &group)?;
    Ok((path, group.len()))
}

/// Files written by a protocol run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub config_hash: String,
    pub sequences: PathBuf,
    pub summary: PathBuf,
    pub manifest: PathBuf,
    pub truth: Truth,
    pub results: Vec<SequenceResult>,
}

struct Manifest<'a> {
    cfg: &'a RbConfig,
    command: &'a str,
    config_path: &'a Path,
    started: u64,
}

impl Manifest<'_> {
    fn write(&self, dir: &Path, outputs: Vec<PathBuf>, truth: Truth) -> Result<PathBuf> {
        let mut inputs = vec![self.config_path.to_path_buf()];
        inputs.extend(self.cfg.group_cache.clone());
        let manifest = RunManifest {
            config_hash: self.cfg.hash.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command.to_string(),
            master_seed: self.cfg.master_seed,
            started_unix: self.started,
            finished_unix: io::unix_now(),
            inputs,
            outputs,
            truth,
            config: self.cfg.document.clone(),
        };
        let path = dir.join(MANIFEST);
        io::write_json(&path, &manifest)?;
        Ok(path)
    }
}

fn write_run(
    dir: &Path,
    prefix: &str,
    hash: &str,
    results: &[SequenceResult],
) -> Result<(PathBuf, PathBuf)> {
    let sequences = dir.join(format!("{prefix}sequences.csv"));
    let summary = dir.join(format!("{prefix}summary.csv"));
    io::write_results(&sequences, hash, results)?;
    io::write_summary(&summary, hash, &summarize(results))?;
    Ok((sequences, summary))
}

fn run_into(
    cfg: &RbConfig,
    set: &ExtendedCliffordSet,
    model: &ErrorModel,
    config_path: &Path,
    out_dir: &Path,
    command: &str,
) -> Result<RunOutput> {
    let manifest = Manifest {
        cfg,
        command,
        config_path,
        started: io::unix_now(),
    };
    let results = run_protocol_par(set, model, &cfg.protocol_spec(), None)?;
    let (sequences, summary) = write_run(out_dir, "", &cfg.hash, &results)?;
    let pinned = out_dir.join("gate_error.json");
    io::write_channel(&pinned, &cfg.gate_channel()?)?;
    let truth = Truth {
        gate_infidelity: Some(model.mean_gate_infidelity()),
        interleaved_infidelity: None,
    };
    let manifest = manifest.write(
        out_dir,
        vec![sequences.clone(), summary.clone(), pinned],
        truth,
    )?;
    Ok(RunOutput {
        config_hash: cfg.hash.clone(),
        sequences,
        summary,
        manifest,
        truth,
        results,
    })
}

/// Runs the protocol and writes `sequences.csv`, `summary.csv`, the pinned
/// gate error channel and the manifest.
pub fn cmd_run(config_path: &Path, overrides: &Overrides, out_dir: &Path) -> Result<RunOutput> {
    let cfg = RbConfig::load(config_path, overrides)?;
    let set = cfg.build_set()?;
    let model = cfg.error_model(&set)?;
    run_into(&cfg, &set, &model, config_path, out_dir, "run")
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FitOptions {
    /// Summary CSV to fit.
    pub results: PathBuf,
    pub out_dir: PathBuf,
    /// Sequence CSV for the bootstrap; defaults to the sibling file.
    pub sequences: Option<PathBuf>,
    pub max_order: Option<usize>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub n_qubits: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub a_re: f64,
    pub a_im: f64,
    pub lambda_re: f64,
    pub lambda_im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub replicates: usize,
    pub rejected: usize,
    pub seed: u64,
    pub error_per_gate: Option<[f64; 2]>,
    pub lambda_re: Vec<[f64; 2]>,
    pub lambda_im: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Confidence {
    pub bootstrap_ci_95: Option<BootstrapReport>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthComparison {
    pub error_per_gate: f64,
    pub relative_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub config_hash: String,
    pub model_order: usize,
    pub modes: Vec<ModeReport>,
    pub residual_rms: f64,
    pub error_per_gate: f64,
    pub safe_error_bound: Option<f64>,
    pub unit_mode_present: bool,
    pub weighted: bool,
    pub bic: f64,
    pub diagnostic: Option<String>,
    pub confidence: Confidence,
    pub truth: Option<TruthComparison>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitOutput {
    pub report: FitReport,
    pub report_path: PathBuf,
    pub plot_path: PathBuf,
}

/// Largest order the data supports unless one was requested explicitly.
fn max_order(requested: Option<usize>, configured: usize, points: usize) -> usize {
    requested.unwrap_or_else(|| configured.min(points.saturating_sub(1) / 2).max(1))
}

fn fit_points(points: &[LengthSummary], order: usize) -> Result<DecayFit> {
    let samples = points
        .iter()
        .map(DecaySample::from_summary)
        .collect::<leakrb_core::Result<Vec<_>>>()?;
    Ok(fit_decay(&samples, order)?)
}

fn groups_of(results: &[SequenceResult]) -> Vec<SequenceGroup> {
    let mut groups: Vec<SequenceGroup> = Vec::new();
    for r in results {
        match groups.iter_mut().find(|g| g.y == r.y) {
            Some(g) => g.values.push(r.survival),
            None => groups.push(SequenceGroup {
                y: r.y,
                values: vec![r.survival],
            }),
        }
    }
    groups
}

fn read_manifest(path: &Path) -> Result<Option<RunManifest>> {
    path.exists().then(|| io::read_json(path)).transpose()
}

fn check_provenance(what: &Path, expected: &str, found: &str) -> Result<()> {
    if expected != found {
        return Err(CliError::Integrity(format!(
            "{} has config hash {found}, expected {expected}; inputs come from different runs",
            what.display()
        )));
    }
    Ok(())
}

/// Fits a summary CSV and writes the fit report and plot data. Sibling
/// sequence and manifest files, when present, must carry the same config
/// hash; they enable the bootstrap and the comparison with the truth.
pub fn cmd_fit(opts: &FitOptions) -> Result<FitOutput> {
    let (hash, points) = io::read_summary(&opts.results)?;
    let dir = opts.results.parent().unwrap_or(Path::new("."));
    let file_name = opts
        .results
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("summary.csv")
        .to_string();
    let prefix = file_name
        .strip_suffix("summary.csv")
        .map(str::to_string)
        .unwrap_or_default();

    let manifest_path = dir.join(MANIFEST);
    let manifest = read_manifest(&manifest_path)?;
    if let Some(m) = &manifest {
        check_provenance(&manifest_path, &hash, &m.config_hash)?;
    }
    let config_value = |key: &str| {
        manifest
            .as_ref()
            .and_then(|m| m.config.get(key))
            .and_then(|v| v.as_u64())
    };

    let sequences_path = opts
        .sequences
        .clone()
        .or_else(|| Some(dir.join(format!("{prefix}sequences.csv"))).filter(|p| p.exists()));
    let results = match &sequences_path {
        Some(p) => {
            let (h, results) = io::read_results(p)?;
            check_provenance(p, &hash, &h)?;
            let groups = groups_of(&results);
            let consistent = groups.len() == points.len()
                && groups
                    .iter()
                    .zip(&points)
                    .all(|(g, p)| g.y == p.y && g.values.len() == p.count);
            if !consistent {
                return Err(CliError::Integrity(format!(
                    "{} does not match the lengths and counts of {}",
                    p.display(),
                    opts.results.display()
                )));
            }
            Some(results)
        }
        None => None,
    };

    let configured = config_value("fit_max_order").unwrap_or(3) as usize;
    let fit = fit_points(&points, max_order(opts.max_order, configured, points.len()))?;
    let eps = error_per_gate(&fit)?;
    let n_qubits = opts
        .n_qubits
        .or(config_value("n_qubits").map(|n| n as usize));
    let safe = n_qubits.map(|n| safe_error_bound(&fit, n)).transpose()?;

    let replicates = opts
        .replicates
        .or(config_value("bootstrap_replicates").map(|r| r as usize))
        .unwrap_or(1000);
    let seed = opts
        .seed
        .or(manifest.as_ref().map(|m| m.master_seed))
        .unwrap_or(0);
    let bootstrap = match &results {
        Some(r) if replicates > 0 => {
            let s = bootstrap_par(&groups_of(r), fit.model_order, replicates, seed);
            Some(BootstrapReport {
                replicates: s.replicates,
                rejected: s.rejected,
                seed,
                error_per_gate: s.error_per_gate.map(|i| [i.lo, i.hi]),
                lambda_re: s.lambda_re.iter().map(|i| [i.lo, i.hi]).collect(),
                lambda_im: s.lambda_im.iter().map(|i| [i.lo, i.hi]).collect(),
            })
        }
        _ => None,
    };

    let truth = manifest
        .as_ref()
        .filter(|_| !prefix.starts_with("interleaved"))
        .and_then(|m| m.truth.gate_infidelity)
        .filter(|&t| t > 0.0)
        .map(|t| TruthComparison {
            error_per_gate: t,
            relative_deviation: (eps - t) / t,
        });

    let report = FitReport {
        config_hash: hash.clone(),
        model_order: fit.model_order,
        modes: fit
            .modes
            .iter()
            .map(|m| ModeReport {
                a_re: m.a.re,
                a_im: m.a.im,
                lambda_re: m.lambda.re,
                lambda_im: m.lambda.im,
            })
            .collect(),
        residual_rms: fit.residual_rms,
        error_per_gate: eps,
        safe_error_bound: safe,
        unit_mode_present: fit.unit_mode_present,
        weighted: fit.weighted,
        bic: fit.bic,
        diagnostic: fit.diagnostic.clone(),
        confidence: Confidence {
            bootstrap_ci_95: bootstrap,
        },
        truth,
    };
    let report_path = opts.out_dir.join(format!("{prefix}fit_report.json"));
    let plot_path = opts.out_dir.join(format!("{prefix}plot_data.csv"));
    io::write_json(&report_path, &report)?;
    let rows: Vec<PlotRow> = points
        .iter()
        .map(|p| PlotRow {
            y: p.y,
            phi_mean: p.mean,
            phi_stderr: p.stderr,
            phi_fit: fit.predict(p.y),
        })
        .collect();
    io::write_csv(&plot_path, &hash, &rows)?;
    Ok(FitOutput {
        report,
        report_path,
        plot_path,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrbReport {
    pub config_hash: String,
    pub eps_ref: f64,
    pub eps_combined: f64,
    pub eps_v_point: f64,
    pub eps_v_lower: f64,
    pub eps_v_upper: f64,
    pub clamped: bool,
    pub diagnostic: Option<String>,
    pub reference_order: usize,
    pub interleaved_order: usize,
    pub truth: Truth,
    pub truth_within_bounds: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IrbOutput {
    pub report: IrbReport,
    pub report_path: PathBuf,
    pub manifest: PathBuf,
}

/// Reference and interleaved runs, both fits and the interleaved estimate.
pub fn cmd_irb(config_path: &Path, overrides: &Overrides, out_dir: &Path) -> Result<IrbOutput> {
    let cfg = RbConfig::load(config_path, overrides)?;
    let manifest = Manifest {
        cfg: &cfg,
        command: "irb",
        config_path,
        started: io::unix_now(),
    };
    let (gate, error) = cfg
        .interleaved()?
        .ok_or_else(|| CliError::Config("irb needs interleaved_gate".into()))?;
    let set = cfg.build_set()?;
    let model = cfg.error_model(&set)?;
    let (reference, interleaved) = run_irb_par(&set, &model, &cfg.protocol_spec(), &gate, &error)?;
    let (rs, rsum) = write_run(out_dir, "reference_", &cfg.hash, &reference)?;
    let (is, isum) = write_run(out_dir, "interleaved_", &cfg.hash, &interleaved)?;

    let order = max_order(None, cfg.fit_max_order, cfg.lengths.len());
    let ref_fit = fit_points(&summarize(&reference).points, order)?;
    let int_fit = fit_points(&summarize(&interleaved).points, order)?;
    let est = IrbEstimate::from_errors(error_per_gate(&ref_fit)?, error_per_gate(&int_fit)?)?;
    let truth = Truth {
        gate_infidelity: Some(model.mean_gate_infidelity()),
        interleaved_infidelity: Some(infidelity_comp_exact(&error)),
    };
    let report = IrbReport {
        config_hash: cfg.hash.clone(),
        eps_ref: est.eps_ref,
        eps_combined: est.eps_combined,
        eps_v_point: est.eps_v_point,
        eps_v_lower: est.eps_v_lower,
        eps_v_upper: est.eps_v_upper,
        clamped: est.clamped,
        diagnostic: est.diagnostic().map(str::to_string),
        reference_order: ref_fit.model_order,
        interleaved_order: int_fit.model_order,
        truth,
        truth_within_bounds: truth.interleaved_infidelity.map(|t| est.contains(t)),
    };
    let report_path = out_dir.join("irb_estimate.json");
    io::write_json(&report_path, &report)?;
    let manifest = manifest.write(
        out_dir,
        vec![rs, rsum, is, isum, report_path.clone()],
        truth,
    )?;
    Ok(IrbOutput {
        report,
        report_path,
        manifest,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    pub c: f64,
    pub kappa: f64,
    pub r_squared: f64,
}

impl From<VarianceShape> for ShapeReport {
    fn from(s: VarianceShape) -> Self {
        Self {
            c: s.c,
            kappa: s.kappa,
            r_squared: s.r_squared,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub config_hash: String,
    pub empirical: Option<ShapeReport>,
    pub analytic: Option<ShapeReport>,
    /// Range of empirical over analytic variance across lengths.
    pub ratio_range: Option<[f64; 2]>,
    pub analytic_unavailable: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarianceOutput {
    pub report: VarianceReport,
    pub rows: Vec<VarianceRow>,
    pub run: RunOutput,
}

fn shape_of(ys: &[usize], variances: &[f64]) -> Option<ShapeReport> {
    let curve = VarianceCurve {
        points: ys
            .iter()
            .zip(variances)
            .map(|(&y, &variance)| LengthSummary {
                y,
                mean: 0.0,
                variance,
                stderr: 0.0,
                count: 1,
            })
            .collect(),
    };
    fit_variance_shape(&curve).ok().map(ShapeReport::from)
}

/// Runs the protocol, then writes the per-length variance table and fits
/// of `c y exp(-kappa y)` to the empirical and (where defined) analytic
/// variance.
pub fn cmd_variance(
    config_path: &Path,
    overrides: &Overrides,
    out_dir: &Path,
) -> Result<VarianceOutput> {
    let cfg = RbConfig::load(config_path, overrides)?;
    let set = cfg.build_set()?;
    let model = cfg.error_model(&set)?;
    let run = run_into(&cfg, &set, &model, config_path, out_dir, "variance")?;
    let curve = summarize(&run.results);
    let ys = curve.ys();
    let analytic = match model.gates() {
        _ if cfg.n_qubits != 1 => {
            Err("analytic variance is evaluated for one qubit only".to_string())
        }
        _ if model.spam().is_some() => Err("analytic variance ignores SPAM".to_string()),
        GateErrors::Dependent { .. } => {
            Err("analytic variance needs gate-independent errors".to_string())
        }
        GateErrors::Independent(ch) => {
            analytic_variance_curve(ch, &set, &ys, cfg.initial_state).map_err(|e| e.to_string())
        }
    };
    let variances: Vec<f64> = curve.points.iter().map(|p| p.variance).collect();
    let rows: Vec<VarianceRow> = curve
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| VarianceRow {
            y: p.y,
            mean: p.mean,
            variance: p.variance,
            count: p.count,
            analytic_variance: analytic.as_ref().ok().map(|a| a[i]),
        })
        .collect();
    let ratios: Vec<f64> = match &analytic {
        Ok(a) => variances
            .iter()
            .zip(a)
            .filter(|(_, a)| **a > 0.0)
            .map(|(v, a)| v / a)
            .collect(),
        Err(_) => Vec::new(),
    };
    let ratio_range = (!ratios.is_empty()).then(|| {
        [
            ratios.iter().copied().fold(f64::INFINITY, f64::min),
            ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ]
    });
    let report = VarianceReport {
        config_hash: cfg.hash.clone(),
        empirical: shape_of(&ys, &variances),
        analytic: analytic.as_ref().ok().and_then(|a| shape_of(&ys, a)),
        ratio_range,
        analytic_unavailable: analytic.as_ref().err().cloned(),
    };
    io::write_csv(&out_dir.join("variance.csv"), &cfg.hash, &rows)?;
    io::write_json(&out_dir.join("variance_report.json"), &report)?;
    Ok(VarianceOutput { report, rows, run })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_order_follows_the_data() {
        assert_eq!(max_order(None, 3, 20), 3);
        assert_eq!(max_order(None, 3, 5), 2);
        assert_eq!(max_order(None, 3, 2), 1);
        assert_eq!(max_order(Some(4), 3, 5), 4);
    }

    #[test]
    fn groups_follow_first_appearance() {
        let r = |y, s| SequenceResult {
            y,
            sequence_index: 0,
            survival: s,
            comp_population: 1.0,
            seed: 0,
        };
        let g = groups_of(&[r(5, 0.1), r(1, 0.2), r(5, 0.3)]);
        assert_eq!(g.len(), 2);
        assert_eq!((g[0].y, g[0].values.clone()), (5, vec![0.1, 0.3]));
    }

    #[test]
    fn provenance_mismatch_is_an_integrity_failure() {
        assert!(check_provenance(Path::new("x"), "a", "a").is_ok());
        assert!(matches!(
            check_provenance(Path::new("x"), "a", "b"),
            Err(CliError::Integrity(_))
        ));
    }
}
