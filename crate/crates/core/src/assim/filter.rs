//! Forecast/analysis cycles for the inflated ETKF and the gradient-weighted variants.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::assim::ensemble::{gradient_second_moment, sample_variance_diag, Ensemble, EPS_VAR};
use crate::assim::etkf::{analysis_mean, etkf_transform};
use crate::assim::weight::{build_weight, localized_covariance, WeightForm, WeightSpec};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::observe::ObservationStream;
use crate::pde::TransportModel;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// ETKF with multiplicative inflation and banded localization.
    EtkfBaseline,
    /// Gradient-second-moment weight.
    Gsm,
    /// Gradient-second-moment weight with clustered correlations.
    GsmClustered,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::EtkfBaseline, Variant::Gsm, Variant::GsmClustered];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::EtkfBaseline => "etkf_baseline",
            Variant::Gsm => "gsm",
            Variant::GsmClustered => "gsm_clustered",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown filter variant `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterConfig<T> {
    pub variant: Variant,
    /// Inflation factor, baseline only.
    pub alpha: T,
    /// Largest weight entry, gradient variants only.
    pub beta_max_target: T,
    /// Localization half-width; 0 keeps only the diagonal.
    pub bandwidth: usize,
    /// Clustering radius.
    pub dist: usize,
    pub eps_var: T,
}

impl<T: Real> FilterConfig<T> {
    pub fn new(variant: Variant, alpha: T, beta_max_target: T, bandwidth: usize, dist: usize) -> Self {
        Self { variant, alpha, beta_max_target, bandwidth, dist, eps_var: T::lit(EPS_VAR) }
    }

    pub fn validate(&self) -> Result<()> {
        match self.variant {
            Variant::EtkfBaseline if !(self.alpha >= T::one()) => {
                Err(Error::Config(format!("inflation alpha = {} must be at least 1", self.alpha)))
            }
            Variant::Gsm | Variant::GsmClustered if !(self.beta_max_target > T::zero()) => Err(
                Error::Config(format!("weight target {} must be positive", self.beta_max_target)),
            ),
            _ if !(self.eps_var > T::zero()) => {
                Err(Error::Config("variance floor must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// Weight construction for the gradient variants. With no band the full
    /// form collapses to the diagonal one, which is then used directly.
    pub fn weight_spec(&self) -> Option<WeightSpec<T>> {
        let form = match (self.variant, self.bandwidth) {
            (Variant::EtkfBaseline, _) => return None,
            (Variant::Gsm, 0) => WeightForm::Diagonal,
            (Variant::Gsm, _) => WeightForm::Full,
            (Variant::GsmClustered, _) => WeightForm::Clustered,
        };
        Some(WeightSpec {
            form,
            max_target: self.beta_max_target,
            bandwidth: self.bandwidth,
            dist: self.dist,
            eps_var: self.eps_var,
        })
    }
}

/// Deterministic one-step model `v_{s+1} = Psi_s(v_s)`.
pub trait Dynamics<T>: Sync {
    fn advance(&self, state: &[T], step: usize) -> Result<Vec<T>>;
    fn dt(&self) -> T;
    fn dx(&self) -> T;
}

impl<T: Real> Dynamics<T> for TransportModel<T> {
    fn advance(&self, state: &[T], step: usize) -> Result<Vec<T>> {
        self.step(state, step)
    }

    fn dt(&self) -> T {
        self.config.dt(&self.grid)
    }

    fn dx(&self) -> T {
        self.grid.dx()
    }
}

/// Advances every member from step `from` to step `to`, members in parallel.
pub fn forecast<T: Real, D: Dynamics<T>>(
    members: Vec<Vec<T>>,
    dynamics: &D,
    from: usize,
    to: usize,
) -> Result<Vec<Vec<T>>> {
    members
        .into_par_iter()
        .map(|mut v| {
            for s in from..to {
                v = dynamics.advance(&v, s)?;
            }
            Ok(v)
        })
        .collect()
}

/// Summary of one analysis step.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisRecord<T> {
    pub step: usize,
    pub t: T,
    pub prior_mean: Vec<T>,
    pub posterior_mean: Vec<T>,
    pub prior_variance: Vec<T>,
    pub prior_gsm: Vec<T>,
    /// Realized weight scale (gradient variants).
    pub beta: Option<T>,
    pub max_weight: T,
    /// Detected discontinuity index (clustered variant).
    pub xi: Option<usize>,
}

/// Prior ensemble in, posterior ensemble and record out.
pub fn analysis_step<T: Real>(
    prior: Ensemble<T>,
    y: &[T],
    obs: &ObservationStream<T>,
    config: &FilterConfig<T>,
    dx: T,
) -> Result<(Vec<Vec<T>>, AnalysisRecord<T>)> {
    let noise = obs.noise()?;
    let h = &obs.operator;
    let mut centered: Matrix<T> = prior.centered().clone();
    let (w, beta, xi) = match config.weight_spec() {
        None => {
            centered.scale(config.alpha);
            (localized_covariance(&centered, config.bandwidth), None, None)
        }
        Some(spec) => {
            let w = build_weight(&prior, &spec, dx)?;
            let xi = w.partition.as_ref().map(|p| p.xi);
            (w.entries, Some(w.beta), xi)
        }
    };
    let mean = analysis_mean(prior.mean(), y, h, &noise, &w)?;
    let transform = etkf_transform(&centered, h, &noise)?;
    let x = transform.apply(&centered)?;
    let k = prior.size();
    let spread = T::from_usize_lossy(k - 1).sqrt();
    let members: Vec<Vec<T>> =
        (0..k).map(|j| (0..mean.len()).map(|i| mean[i] + spread * x[(i, j)]).collect()).collect();
    let record = AnalysisRecord {
        step: 0,
        t: T::zero(),
        prior_variance: sample_variance_diag(&prior),
        prior_gsm: gradient_second_moment(&prior, dx),
        prior_mean: prior.mean().to_vec(),
        posterior_mean: mean,
        beta,
        max_weight: w.max_entry(),
        xi,
    };
    Ok((members, record))
}

/// Iterator over analysis steps; each item forecasts to the next observation
/// time and assimilates it.
pub struct FilterRun<'a, T, D> {
    members: Option<Vec<Vec<T>>>,
    dynamics: &'a D,
    observations: &'a ObservationStream<T>,
    config: FilterConfig<T>,
    step: usize,
    cursor: usize,
}

impl<'a, T: Real, D: Dynamics<T>> FilterRun<'a, T, D> {
    pub fn new(
        initial: Vec<Vec<T>>,
        dynamics: &'a D,
        observations: &'a ObservationStream<T>,
        config: FilterConfig<T>,
    ) -> Result<Self> {
        config.validate()?;
        Ensemble::new(initial.clone())?;
        Ok(Self { members: Some(initial), dynamics, observations, config, step: 0, cursor: 0 })
    }

    /// Current ensemble, posterior after the last yielded record.
    pub fn members(&self) -> Option<&[Vec<T>]> {
        self.members.as_deref()
    }

    pub fn step(&self) -> usize {
        self.step
    }

    fn advance(&mut self, members: Vec<Vec<T>>) -> Result<(Vec<Vec<T>>, AnalysisRecord<T>)> {
        let target = self.observations.steps[self.cursor];
        let prior = forecast(members, self.dynamics, self.step, target)?;
        let y = &self.observations.values[self.cursor];
        let dx = self.dynamics.dx();
        let (posterior, mut record) =
            analysis_step(Ensemble::new(prior)?, y, self.observations, &self.config, dx)?;
        record.step = target;
        record.t = self.observations.times[self.cursor];
        self.step = target;
        self.cursor += 1;
        Ok((posterior, record))
    }
}

impl<T: Real, D: Dynamics<T>> Iterator for FilterRun<'_, T, D> {
    type Item = Result<AnalysisRecord<T>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.cursor >= self.observations.len() {
            return None;
        }
        let members = self.members.take()?;
        match self.advance(members) {
            Ok((posterior, record)) => {
                self.members = Some(posterior);
                Some(Ok(record))
            }
            Err(e) => Some(Err(e)),
        }
    }
}

/// Records of a complete run and the final posterior ensemble.
#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub records: Vec<AnalysisRecord<T>>,
    pub final_members: Vec<Vec<T>>,
}

fn run_to_end<T: Real, D: Dynamics<T>>(mut run: FilterRun<'_, T, D>) -> Result<Trajectory<T>> {
    let mut records = Vec::with_capacity(run.observations.len());
    for r in run.by_ref() {
        records.push(r?);
    }
    let final_members = run.members.take().unwrap_or_default();
    Ok(Trajectory { records, final_members })
}

/// Inflated, localized ETKF.
pub fn run_algorithm1<T: Real, D: Dynamics<T>>(
    initial: Vec<Vec<T>>,
    dynamics: &D,
    observations: &ObservationStream<T>,
    config: &FilterConfig<T>,
) -> Result<Trajectory<T>> {
    if config.variant != Variant::EtkfBaseline {
        return Err(Error::Config(format!("variant {} is not the baseline filter", config.variant)));
    }
    run_to_end(FilterRun::new(initial, dynamics, observations, *config)?)
}

/// ETKF with the gradient-second-moment weight, optionally clustered.
pub fn run_algorithm2<T: Real, D: Dynamics<T>>(
    initial: Vec<Vec<T>>,
    dynamics: &D,
    observations: &ObservationStream<T>,
    config: &FilterConfig<T>,
) -> Result<Trajectory<T>> {
    if config.variant == Variant::EtkfBaseline {
        return Err(Error::Config("the baseline variant has no gradient weight".into()));
    }
    run_to_end(FilterRun::new(initial, dynamics, observations, *config)?)
}

/// Dispatches on the configured variant.
pub fn run_filter<T: Real, D: Dynamics<T>>(
    initial: Vec<Vec<T>>,
    dynamics: &D,
    observations: &ObservationStream<T>,
    config: &FilterConfig<T>,
) -> Result<Trajectory<T>> {
    run_to_end(FilterRun::new(initial, dynamics, observations, *config)?)
}
