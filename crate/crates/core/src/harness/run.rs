//! Running one experiment end to end and writing its CSV artifacts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::assim::{
    forecast, gradient_second_moment, sample_variance_diag, AnalysisRecord, Ensemble, FilterRun,
};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::harness::config::{Case, ExperimentConfig, RUN_KEY_PREFIX};
use crate::harness::truth::{generate_truth, initial_depth, TruthRun};
use crate::metrics::{pointwise_error, relative_error, ErrorSeries, Window};
use crate::observe::{observation_steps, synthesize_observations, ObservationOperator, ObservationStream};
use crate::pde::TransportModel;
use crate::rng::{gaussian, seeded, ENSEMBLE_STREAM};

/// Tag written to every manifest.
pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// The case's initial depth plus i.i.d. Gaussian noise, drawn member by member.
pub fn build_initial_ensemble(config: &ExperimentConfig, grid: &Grid1D<f64>, seed: u64) -> Vec<Vec<f64>> {
    let base = initial_depth(config, grid);
    let mut rng = seeded(seed, ENSEMBLE_STREAM);
    (0..config.ensemble_size)
        .map(|_| base.iter().map(|h| h + gaussian(&mut rng, config.ic_perturb_std)).collect())
        .collect()
}

pub fn observation_operator(config: &ExperimentConfig) -> ObservationOperator {
    match config.case {
        Case::Dense => ObservationOperator::dense(config.n),
        Case::Sparse | Case::Oscillatory => ObservationOperator::every_other(config.n),
    }
}

/// Observations of the truth at every `obs_stride_steps`-th step.
pub fn synthesize(config: &ExperimentConfig, truth: &TruthRun) -> Result<ObservationStream<f64>> {
    let steps = observation_steps(truth.total_steps, config.obs_stride_steps);
    synthesize_observations(
        |s, _| truth.depth_at(s),
        &steps,
        truth.dt(),
        &observation_operator(config),
        config.gamma,
        config.seed,
    )
}

/// In-memory result of an experiment.
#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub truth: TruthRun,
    pub observations: ObservationStream<f64>,
    pub records: Vec<AnalysisRecord<f64>>,
    /// True depth at each record's step.
    pub truth_depth: Vec<Vec<f64>>,
    pub error_full: ErrorSeries<f64>,
    pub error_window: ErrorSeries<f64>,
}

impl ExperimentOutcome {
    pub fn window(&self) -> Window<f64> {
        Window::new(self.config.window_lo, self.config.window_hi)
    }

    /// Posterior pointwise error at the last analysis.
    pub fn final_pointwise_error(&self) -> Option<Vec<f64>> {
        let r = self.records.last()?;
        pointwise_error(&r.posterior_mean, self.truth_depth.last()?).ok()
    }
}

/// Truth, observations and the configured filter, without touching the file system
/// beyond the optional truth cache.
pub fn run_in_memory(config: &ExperimentConfig, cache_dir: Option<&Path>) -> Result<ExperimentOutcome> {
    config.validate()?;
    let truth = generate_truth(config, cache_dir)?;
    let observations = synthesize(config, &truth)?;
    let model = TransportModel::new(truth.grid.clone(), truth.solver, truth.velocity.clone());
    let initial = build_initial_ensemble(config, &truth.grid, config.seed);
    let run = FilterRun::new(initial, &model, &observations, config.filter_config())?;
    let window = Window::new(config.window_lo, config.window_hi);
    let label = config.variant.to_string();
    let mut error_full = ErrorSeries::new(label.clone(), None);
    let mut error_window = ErrorSeries::new(label, Some(window));
    let mut records = Vec::with_capacity(observations.len());
    let mut truth_depth = Vec::with_capacity(observations.len());
    for rec in run {
        let rec = rec?;
        let h = truth.depth_at(rec.step)?;
        let x = truth.grid.points();
        error_full.push(rec.t, relative_error(&rec.posterior_mean, &h, x, None)?);
        error_window.push(rec.t, relative_error(&rec.posterior_mean, &h, x, Some(window))?);
        records.push(rec);
        truth_depth.push(h);
    }
    Ok(ExperimentOutcome {
        config: config.clone(),
        truth,
        observations,
        records,
        truth_depth,
        error_full,
        error_window,
    })
}

/// Paths of the files written by a run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunArtifacts {
    pub solution_csv: PathBuf,
    pub error_csv: PathBuf,
    pub summary_csv: PathBuf,
    pub moments_csv: PathBuf,
    pub manifest: PathBuf,
}

impl RunArtifacts {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            solution_csv: dir.join("solution.csv"),
            error_csv: dir.join("error.csv"),
            summary_csv: dir.join("summary.csv"),
            moments_csv: dir.join("moments.csv"),
            manifest: dir.join("manifest.txt"),
        }
    }

    pub fn csv_files(&self) -> [(&'static str, &Path); 4] {
        [
            ("solution_csv", &self.solution_csv),
            ("error_csv", &self.error_csv),
            ("summary_csv", &self.summary_csv),
            ("moments_csv", &self.moments_csv),
        ]
    }
}

fn e16(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

fn is_snapshot(t: f64, snapshots: &[f64]) -> bool {
    snapshots.iter().any(|s| (s - t).abs() < 1e-9)
}

/// Writes solution, error, summary and moment CSVs for `outcome`.
pub fn write_artifacts(outcome: &ExperimentOutcome, artifacts: &RunArtifacts) -> Result<()> {
    let x = outcome.truth.grid.points();
    let op = &outcome.observations.operator;

    let mut sol = csv_writer(&artifacts.solution_csv)?;
    sol.write_record(["t", "x", "truth", "obs", "prior_mean", "posterior_mean"])?;
    let mut err = csv_writer(&artifacts.error_csv)?;
    err.write_record(["t", "x", "pointwise_error"])?;
    for (j, (rec, h)) in outcome.records.iter().zip(&outcome.truth_depth).enumerate() {
        let y = op.scatter(&outcome.observations.values[j]);
        let pe = pointwise_error(&rec.posterior_mean, h)?;
        for i in 0..x.len() {
            let obs = y[i].map(e16).unwrap_or_default();
            sol.write_record([
                e16(rec.t),
                e16(x[i]),
                e16(h[i]),
                obs,
                e16(rec.prior_mean[i]),
                e16(rec.posterior_mean[i]),
            ])?;
            err.write_record([e16(rec.t), e16(x[i]), e16(pe[i])])?;
        }
    }
    sol.flush()?;
    err.flush()?;

    let mut sum = csv_writer(&artifacts.summary_csv)?;
    sum.write_record(["t", "relative_error_full", "relative_error_window", "beta", "max_weight", "xi"])?;
    for ((rec, full), win) in outcome.records.iter().zip(&outcome.error_full.values).zip(&outcome.error_window.values) {
        sum.write_record([
            e16(rec.t),
            e16(*full),
            e16(*win),
            rec.beta.map(e16).unwrap_or_default(),
            e16(rec.max_weight),
            rec.xi.map(|i| i.to_string()).unwrap_or_default(),
        ])?;
    }
    sum.flush()?;

    let snaps: Vec<MomentSnapshot> = outcome
        .records
        .iter()
        .filter(|r| is_snapshot(r.t, &outcome.config.snapshots))
        .map(|r| MomentSnapshot {
            t: r.t,
            mean: r.prior_mean.clone(),
            variance: r.prior_variance.clone(),
            gsm: r.prior_gsm.clone(),
        })
        .collect();
    write_moments(&snaps, x, &artifacts.moments_csv)
}

/// Ensemble moments at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSnapshot {
    pub t: f64,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub gsm: Vec<f64>,
}

pub fn write_moments(snaps: &[MomentSnapshot], x: &[f64], path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "x", "mean", "variance", "gsm"])?;
    for s in snaps {
        for i in 0..x.len() {
            w.write_record([e16(s.t), e16(x[i]), e16(s.mean[i]), e16(s.variance[i]), e16(s.gsm[i])])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Moments of the freely evolving (never assimilated) ensemble at the snapshot times.
pub fn free_ensemble_moments(config: &ExperimentConfig, cache_dir: Option<&Path>) -> Result<Vec<MomentSnapshot>> {
    let truth = generate_truth(config, cache_dir)?;
    let model = TransportModel::new(truth.grid.clone(), truth.solver, truth.velocity.clone());
    let dt = truth.dt();
    let mut targets: Vec<usize> = config
        .snapshots
        .iter()
        .map(|t| (t / dt).round() as usize)
        .filter(|s| *s <= truth.total_steps)
        .collect();
    targets.sort_unstable();
    targets.dedup();
    let mut members = build_initial_ensemble(config, &truth.grid, config.seed);
    let mut step = 0;
    let mut out = Vec::with_capacity(targets.len());
    for target in targets {
        members = forecast(members, &model, step, target)?;
        step = target;
        let ens = Ensemble::new(members)?;
        out.push(MomentSnapshot {
            t: target as f64 * dt,
            mean: ens.mean().to_vec(),
            variance: sample_variance_diag(&ens),
            gsm: gradient_second_moment(&ens, truth.grid.dx()),
        });
        members = ens.into_members();
    }
    Ok(out)
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Key/value manifest: the full config, then `run.*` lines describing the outcome.
pub fn write_manifest(
    config: &ExperimentConfig,
    path: &Path,
    status: &str,
    extra: &[(String, String)],
) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "# shockfilter run manifest")?;
    f.write_all(config.to_text().as_bytes())?;
    writeln!(f, "{RUN_KEY_PREFIX}version = {CODE_VERSION}")?;
    writeln!(f, "{RUN_KEY_PREFIX}status = {status}")?;
    for (k, v) in extra {
        writeln!(f, "{RUN_KEY_PREFIX}{k} = {}", v.replace('\n', " "))?;
    }
    f.flush()?;
    Ok(())
}

/// Runs the experiment and writes every artifact into `config.output_dir`.
/// Failures still leave a manifest recording the stage and the error.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunArtifacts> {
    let dir = config.output_dir.clone();
    std::fs::create_dir_all(&dir)?;
    let artifacts = RunArtifacts::in_dir(&dir);
    let result = run_in_memory(config, Some(&dir))
        .map_err(|e| ("filter", e))
        .and_then(|outcome| write_artifacts(&outcome, &artifacts).map_err(|e| ("write", e)));
    match result {
        Ok(()) => {
            let mut extra = Vec::new();
            for (name, p) in artifacts.csv_files() {
                extra.push((format!("sha256.{name}"), sha256_file(p)?));
            }
            write_manifest(config, &artifacts.manifest, "ok", &extra)?;
            Ok(artifacts)
        }
        Err((stage, e)) => {
            let extra = [("stage".to_string(), stage.to_string()), ("error".to_string(), e.to_string())];
            write_manifest(config, &artifacts.manifest, "failed", &extra)?;
            Err(e)
        }
    }
}

/// Checksums recorded in a manifest, keyed by artifact name.
pub fn manifest_checksums(text: &str) -> Result<Vec<(String, String)>> {
    let prefix = format!("{RUN_KEY_PREFIX}sha256.");
    Ok(crate::harness::config::parse_pairs(text)?
        .into_iter()
        .filter_map(|(k, v)| k.strip_prefix(&prefix).map(|name| (name.to_string(), v)))
        .collect())
}

/// Re-runs the experiment described by a manifest into `output_dir` and checks
/// that every CSV hashes to the recorded value.
pub fn verify_manifest(manifest: &Path, output_dir: &Path) -> Result<bool> {
    let text = std::fs::read_to_string(manifest)?;
    let mut config = ExperimentConfig::parse(&text)?;
    config.output_dir = output_dir.to_path_buf();
    let expected = manifest_checksums(&text)?;
    if expected.is_empty() {
        return Err(Error::Config(format!("{} records no checksums", manifest.display())));
    }
    let artifacts = run_experiment(&config)?;
    for (name, path) in artifacts.csv_files() {
        let want = expected.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str());
        if want != Some(sha256_file(path)?.as_str()) {
            return Ok(false);
        }
    }
    Ok(true)
}
