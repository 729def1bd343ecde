//! Truth generation: the coupled run that supplies the velocity, and the
//! depth every estimate is scored against.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::harness::config::{Case, ExperimentConfig};
use crate::observe::observation_steps;
use crate::pde::{integrate_coupled_swe, solve_coupled_swe, SWEState, SolverConfig, VelocityField};
use crate::stoker::{DamBreakParams, StokerSolution};

/// Initial depth of the configured case on `grid`. Values exactly on a jump
/// take the mean of the two sides.
pub fn initial_depth(config: &ExperimentConfig, grid: &Grid1D<f64>) -> Vec<f64> {
    let (h0, h1) = (config.h0, config.h1);
    let left = |x: f64| match config.case {
        Case::Oscillatory if x < -0.5 => h0 + 0.03 * (30.0 * x).sin(),
        Case::Oscillatory if x == -0.5 => 0.5 * (h0 + 0.03 * (30.0 * x).sin() + h0),
        _ => h0,
    };
    grid.points()
        .iter()
        .map(|&x| {
            if x < 0.0 {
                left(x)
            } else if x > 0.0 {
                h1
            } else {
                0.5 * (h0 + h1)
            }
        })
        .collect()
}

pub fn solver_config(config: &ExperimentConfig) -> Result<SolverConfig<f64>> {
    Ok(SolverConfig::new(config.cfl)?.with_transport_speed(config.transport_speed))
}

pub fn experiment_grid(config: &ExperimentConfig) -> Result<Grid1D<f64>> {
    Grid1D::unit(config.n)
}

#[derive(Clone, Debug)]
pub enum TruthSource {
    /// Analytic dam-break solution.
    Stoker(StokerSolution<f64>),
    /// Fine-grid numerical solution read at the coarse points, keyed by coarse step.
    Reference(BTreeMap<usize, Vec<f64>>),
}

/// The truth of one experiment on its grid.
#[derive(Clone, Debug)]
pub struct TruthRun {
    pub grid: Grid1D<f64>,
    pub solver: SolverConfig<f64>,
    pub total_steps: usize,
    pub velocity: VelocityField<f64>,
    pub source: TruthSource,
    /// Cache files read or written.
    pub cache_files: Vec<PathBuf>,
}

impl TruthRun {
    pub fn dt(&self) -> f64 {
        self.velocity.dt
    }

    /// True depth at solver step `step`.
    pub fn depth_at(&self, step: usize) -> Result<Vec<f64>> {
        match &self.source {
            TruthSource::Stoker(sol) => {
                Ok(sol.depth_profile(self.grid.points(), step as f64 * self.dt()))
            }
            TruthSource::Reference(map) => map.get(&step).cloned().ok_or(Error::StepOutOfRange {
                requested: step,
                available: self.total_steps + 1,
            }),
        }
    }

    /// True velocity at solver step `step` (analytic where available, else the coupled run's).
    pub fn velocity_at(&self, step: usize) -> Result<Vec<f64>> {
        match &self.source {
            TruthSource::Stoker(sol) => {
                let t = step as f64 * self.dt();
                Ok(self.grid.points().iter().map(|&x| sol.eval(x, t).1).collect())
            }
            TruthSource::Reference(_) => Ok(self.velocity.at(step)?.to_vec()),
        }
    }
}

fn cache_key(kind: &str, config: &ExperimentConfig, extra: &str) -> String {
    let ic = match config.case {
        Case::Oscillatory => "oscillatory",
        Case::Dense | Case::Sparse => "dam",
    };
    let text = format!(
        "{kind}|{ic}|n={}|cfl={:?}|t_end={:?}|h0={:?}|h1={:?}|{extra}",
        config.n, config.cfl, config.t_end, config.h0, config.h1
    );
    let digest = Sha256::digest(text.as_bytes());
    digest[..12].iter().map(|b| format!("{b:02x}")).collect()
}

fn read_or_build<V>(
    path: Option<&Path>,
    read: impl FnOnce(BufReader<File>) -> Result<V>,
    build: impl FnOnce() -> Result<V>,
    write: impl FnOnce(&V, BufWriter<File>) -> Result<()>,
) -> Result<V> {
    if let Some(p) = path {
        if p.exists() {
            return read(BufReader::new(File::open(p)?));
        }
    }
    let v = build()?;
    if let Some(p) = path {
        // written under a temporary name, then renamed
        let tmp = p.with_extension("partial");
        write(&v, BufWriter::new(File::create(&tmp)?))?;
        std::fs::rename(&tmp, p)?;
    }
    Ok(v)
}

fn write_reference<W: Write>(map: &BTreeMap<usize, Vec<f64>>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "x_index", "h"])?;
    for (step, h) in map {
        for (i, v) in h.iter().enumerate() {
            w.write_record([step.to_string(), i.to_string(), format!("{v:.16e}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_reference<R: Read>(input: R) -> Result<BTreeMap<usize, Vec<f64>>> {
    let mut r = csv::Reader::from_reader(input);
    let mut map: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).ok_or_else(|| Error::Parse("short reference cache row".into()));
        let step: usize = field(0)?.parse().map_err(|_| Error::Parse("bad step in reference cache".into()))?;
        let idx: usize = field(1)?.parse().map_err(|_| Error::Parse("bad index in reference cache".into()))?;
        let h: f64 = field(2)?.parse().map_err(|_| Error::Parse("bad depth in reference cache".into()))?;
        let row = map.entry(step).or_default();
        if row.len() != idx {
            return Err(Error::Parse(format!("reference cache out of order at step {step}")));
        }
        row.push(h);
    }
    Ok(map)
}

/// Runs (or loads from `cache_dir`) the coupled solution that drives the experiment.
///
/// Dense and sparse cases are scored against the analytic solution; the
/// oscillatory case against a run on a grid refined by `reference_refinement`
/// with the same CFL number, read at every coarse point.
pub fn generate_truth(config: &ExperimentConfig, cache_dir: Option<&Path>) -> Result<TruthRun> {
    config.validate()?;
    let grid = experiment_grid(config)?;
    let solver = solver_config(config)?;
    let total_steps = solver.steps_for(&grid, config.t_end);
    let h_init = initial_depth(config, &grid);
    if let Some(dir) = cache_dir {
        std::fs::create_dir_all(dir)?;
    }
    let mut cache_files = Vec::new();

    let vel_path = cache_dir.map(|d| d.join(format!("velocity_{}.csv", cache_key("velocity", config, ""))));
    let velocity = read_or_build(
        vel_path.as_deref(),
        VelocityField::read_csv,
        || Ok(solve_coupled_swe(&SWEState::at_rest(h_init.clone()), &grid, &solver, config.t_end)?.1),
        |v, w| v.write_csv(w),
    )?;
    cache_files.extend(vel_path);
    if velocity.steps() != total_steps + 1 {
        return Err(Error::Parse(format!(
            "velocity cache holds {} steps, the run needs {}",
            velocity.steps(),
            total_steps + 1
        )));
    }

    let source = match config.case {
        Case::Dense | Case::Sparse => {
            let mut params = DamBreakParams::new(config.h0, config.h1)?;
            params.g = solver.gravity;
            TruthSource::Stoker(StokerSolution::new(params)?)
        }
        Case::Oscillatory => {
            let r = config.reference_refinement;
            let mut keep = observation_steps(total_steps, config.obs_stride_steps);
            keep.insert(0, 0);
            let extra = format!("refine={r}|stride={}", config.obs_stride_steps);
            let ref_path =
                cache_dir.map(|d| d.join(format!("reference_{}.csv", cache_key("reference", config, &extra))));
            let map = read_or_build(
                ref_path.as_deref(),
                read_reference,
                || reference_solution(config, &grid, &keep),
                write_reference,
            )?;
            if let Some(missing) = keep.iter().find(|s| !map.contains_key(s)) {
                return Err(Error::Parse(format!("reference cache lacks step {missing}")));
            }
            cache_files.extend(ref_path);
            TruthSource::Reference(map)
        }
    };
    Ok(TruthRun { grid, solver, total_steps, velocity, source, cache_files })
}

/// Fine-grid coupled run sampled at coarse points and the coarse steps in `keep`.
fn reference_solution(
    config: &ExperimentConfig,
    coarse: &Grid1D<f64>,
    keep: &[usize],
) -> Result<BTreeMap<usize, Vec<f64>>> {
    let r = config.reference_refinement;
    let fine = coarse.refine(r)?;
    let solver = solver_config(config)?;
    let fine_steps = keep.last().copied().unwrap_or(0) * r;
    let init = SWEState::at_rest(initial_depth(config, &fine));
    let mut map = BTreeMap::new();
    integrate_coupled_swe(&init, &fine, &solver, fine_steps, |s, state| {
        if s % r == 0 && keep.binary_search(&(s / r)).is_ok() {
            map.insert(s / r, state.h.iter().step_by(r).copied().collect());
        }
    })?;
    Ok(map)
}
