//! Command-line front end for the shallow-water twin experiments.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shockfilter::harness::{
    compare_runs, free_ensemble_moments, generate_truth, run_experiment, synthesize, write_moments,
    ExperimentConfig, Summary,
};
use shockfilter::{Error, Result};

#[derive(Parser)]
#[command(name = "shockfilter", version, about = "ETKF twin experiments on the 1D dam break")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the coupled solver, cache the velocity and write the truth and observations.
    Truth(ExperimentArgs),
    /// Moments of the unassimilated ensemble at the snapshot times.
    Moments(ExperimentArgs),
    /// Run one filter variant and write its CSV artifacts.
    Assimilate(ExperimentArgs),
    /// Join summary tables of several runs.
    Compare(CompareArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// Key-value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    ensemble_size: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Largest entry of the gradient weight.
    #[arg(long)]
    beta_max: Option<f64>,
    #[arg(long)]
    dist: Option<usize>,
    #[arg(long)]
    bandwidth: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Standard deviation of the initial ensemble perturbation.
    #[arg(long)]
    ic_std: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Summary files as `label=path` (or a bare path, labelled by its directory).
    #[arg(required = true)]
    summaries: Vec<String>,
    /// Averaging window `lo,hi`; may be repeated.
    #[arg(long = "window")]
    windows: Vec<String>,
    #[arg(long, default_value = "comparison")]
    out: PathBuf,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut pairs: Vec<(String, String)> = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                shockfilter::harness::parse_pairs(&text)?
            }
            None => Vec::new(),
        };
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                pairs.push((k.to_string(), v));
            }
        };
        let s = |v: Option<f64>| v.map(|x| format!("{x:?}"));
        push("case", self.case.clone());
        push("variant", self.variant.clone());
        push("n", self.n.map(|v| v.to_string()));
        push("cfl", s(self.cfl));
        push("ensemble_size", self.ensemble_size.map(|v| v.to_string()));
        push("alpha", s(self.alpha));
        push("beta_max_target", s(self.beta_max));
        push("dist", self.dist.map(|v| v.to_string()));
        push("localization_bandwidth", self.bandwidth.map(|v| v.to_string()));
        push("gamma", s(self.gamma));
        push("seed", self.seed.map(|v| v.to_string()));
        push("t_end", s(self.t_end));
        push("ic_perturb_std", s(self.ic_std));
        push("output_dir", self.out.as_ref().map(|p| p.display().to_string()));
        ExperimentConfig::from_pairs(&pairs)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn truth(args: &ExperimentArgs) -> Result<()> {
    let cfg = args.resolve()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let truth = generate_truth(&cfg, Some(&cfg.output_dir))?;
    let obs = synthesize(&cfg, &truth)?;
    obs.write_csv(&truth.grid, create(&cfg.output_dir.join("observations.csv"))?)?;
    let mut w = csv_writer(&cfg.output_dir.join("truth.csv"))?;
    w.write_record(["t", "x", "h", "u"])?;
    let mut steps = vec![0];
    steps.extend(&obs.steps);
    for s in steps {
        let (h, u) = (truth.depth_at(s)?, truth.velocity_at(s)?);
        let t = s as f64 * truth.dt();
        for (i, x) in truth.grid.points().iter().enumerate() {
            w.write_record([t, *x, h[i], u[i]].map(|v| format!("{v:.16e}")))?;
        }
    }
    w.flush()?;
    for p in &truth.cache_files {
        println!("cache {}", p.display());
    }
    println!("truth written to {}", cfg.output_dir.display());
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn moments(args: &ExperimentArgs) -> Result<()> {
    let cfg = args.resolve()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let snaps = free_ensemble_moments(&cfg, Some(&cfg.output_dir))?;
    let grid = shockfilter::harness::experiment_grid(&cfg)?;
    let path = cfg.output_dir.join("moments_free.csv");
    write_moments(&snaps, grid.points(), &path)?;
    println!("moments written to {}", path.display());
    Ok(())
}

fn assimilate(args: &ExperimentArgs) -> Result<()> {
    let cfg = args.resolve()?;
    let art = run_experiment(&cfg)?;
    println!("{} / {}: artifacts in {}", cfg.case, cfg.variant, cfg.output_dir.display());
    println!("manifest {}", art.manifest.display());
    Ok(())
}

fn parse_window(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::Config(format!("window `{s}` is not `lo,hi`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn compare(args: &CompareArgs) -> Result<()> {
    let windows = args.windows.iter().map(|w| parse_window(w)).collect::<Result<Vec<_>>>()?;
    let mut runs = Vec::new();
    for spec in &args.summaries {
        let (label, path) = match spec.split_once('=') {
            Some((l, p)) => (l.to_string(), PathBuf::from(p)),
            None => {
                let p = PathBuf::from(spec);
                let label = p
                    .parent()
                    .and_then(|d| d.file_name())
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| spec.clone());
                (label, p)
            }
        };
        runs.push(Summary::read(label, &path)?);
    }
    let cmp = compare_runs(runs, &windows)?;
    std::fs::create_dir_all(&args.out)?;
    cmp.write_table(create(&args.out.join("comparison.csv"))?)?;
    cmp.write_means(create(&args.out.join("comparison_means.csv"))?)?;
    for m in &cmp.means {
        println!(
            "{:<16} [{}, {}] mean {:.4e} window {:.4e} ratio {:.4}",
            m.label, m.t_lo, m.t_hi, m.mean_full, m.mean_window, m.ratio_to_first
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Truth(a) => truth(a),
        Command::Moments(a) => moments(a),
        Command::Assimilate(a) => assimilate(a),
        Command::Compare(a) => compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
