//! Experiment configuration and its flat `key = value` text form.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::assim::{FilterConfig, Variant};
use crate::error::{Error, Result};
use crate::pde::TransportSpeed;

/// Prefix of manifest lines that describe a run rather than configure one.
pub const RUN_KEY_PREFIX: &str = "run.";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    /// Dam break observed at every grid point.
    Dense,
    /// Dam break observed at every other grid point.
    Sparse,
    /// Dam break with an oscillatory left state, sparse observations.
    Oscillatory,
}

impl Case {
    pub const ALL: [Case; 3] = [Case::Dense, Case::Sparse, Case::Oscillatory];

    pub fn as_str(self) -> &'static str {
        match self {
            Case::Dense => "dense",
            Case::Sparse => "sparse",
            Case::Oscillatory => "oscillatory",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Case::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown case `{s}` (expected dense, sparse or oscillatory)")))
    }
}

fn speed_name(s: TransportSpeed) -> &'static str {
    match s {
        TransportSpeed::GravityWave => "gravity_wave",
        TransportSpeed::Advective => "advective",
    }
}

fn parse_speed(s: &str) -> Result<TransportSpeed> {
    match s {
        "gravity_wave" => Ok(TransportSpeed::GravityWave),
        "advective" => Ok(TransportSpeed::Advective),
        other => Err(Error::Config(format!("unknown transport speed `{other}`"))),
    }
}

/// Everything needed to reproduce one twin experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub case: Case,
    pub variant: Variant,
    pub n: usize,
    pub cfl: f64,
    pub t_end: f64,
    pub ensemble_size: usize,
    pub ic_perturb_std: f64,
    pub gamma: f64,
    pub obs_stride_steps: usize,
    pub alpha: f64,
    pub beta_max_target: f64,
    pub dist: usize,
    pub localization_bandwidth: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub h0: f64,
    pub h1: f64,
    /// Fine-grid factor of the oscillatory reference solution.
    pub reference_refinement: usize,
    pub window_lo: f64,
    pub window_hi: f64,
    pub transport_speed: TransportSpeed,
    /// Times at which prior moments are written.
    pub snapshots: Vec<f64>,
}

impl ExperimentConfig {
    /// Settings of the named case at full resolution.
    pub fn for_case(case: Case) -> Self {
        let (t_end, alpha, beta, bandwidth) = match case {
            Case::Dense => (0.15, 1.5, 0.003, 0),
            Case::Sparse | Case::Oscillatory => (0.3, 1.3, 0.0027, 1),
        };
        Self {
            case,
            variant: Variant::Gsm,
            n: 1001,
            cfl: 0.1,
            t_end,
            ensemble_size: 100,
            ic_perturb_std: 0.1,
            gamma: 0.01,
            obs_stride_steps: 5,
            alpha,
            beta_max_target: beta,
            dist: 1,
            localization_bandwidth: bandwidth,
            seed: 0,
            output_dir: PathBuf::from("out"),
            h0: 1.0,
            h1: 0.8,
            reference_refinement: 20,
            window_lo: -0.39,
            window_hi: 0.39,
            transport_speed: TransportSpeed::GravityWave,
            snapshots: vec![0.05, 0.10, 0.15],
        }
    }

    /// Builds a config from ordered `(key, value)` pairs; later pairs win.
    /// `case` is applied first so its defaults never clobber explicit keys.
    pub fn from_pairs<K: AsRef<str>, V: AsRef<str>>(pairs: &[(K, V)]) -> Result<Self> {
        let case = pairs
            .iter()
            .rev()
            .find(|(k, _)| k.as_ref() == "case")
            .map(|(_, v)| v.as_ref().parse())
            .transpose()?
            .unwrap_or(Case::Dense);
        let mut cfg = Self::for_case(case);
        for (k, v) in pairs {
            let k = k.as_ref();
            if k != "case" && !k.starts_with(RUN_KEY_PREFIX) {
                cfg.set(k, v.as_ref())?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses the text form; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_pairs(&parse_pairs(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<F: FromStr>(key: &str, value: &str) -> Result<F> {
            value.parse().map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))
        }
        match key {
            "case" => self.case = value.parse()?,
            "variant" => self.variant = value.parse()?,
            "n" => self.n = num(key, value)?,
            "cfl" => self.cfl = num(key, value)?,
            "t_end" => self.t_end = num(key, value)?,
            "ensemble_size" => self.ensemble_size = num(key, value)?,
            "ic_perturb_std" => self.ic_perturb_std = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "obs_stride_steps" => self.obs_stride_steps = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "beta_max_target" => self.beta_max_target = num(key, value)?,
            "dist" => self.dist = num(key, value)?,
            "localization_bandwidth" => self.localization_bandwidth = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "h0" => self.h0 = num(key, value)?,
            "h1" => self.h1 = num(key, value)?,
            "reference_refinement" => self.reference_refinement = num(key, value)?,
            "window_lo" => self.window_lo = num(key, value)?,
            "window_hi" => self.window_hi = num(key, value)?,
            "transport_speed" => self.transport_speed = parse_speed(value)?,
            "snapshots" => {
                self.snapshots = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| num(key, s))
                    .collect::<Result<_>>()?
            }
            other => return Err(Error::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n < crate::grid::MIN_POINTS {
            return fail(format!("n = {} is below the minimum of {}", self.n, crate::grid::MIN_POINTS));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return fail(format!("cfl = {} outside (0, 1)", self.cfl));
        }
        if !(self.t_end > 0.0) {
            return fail(format!("t_end = {} must be positive", self.t_end));
        }
        if self.ensemble_size < 2 {
            return fail(format!("ensemble_size = {} must be at least 2", self.ensemble_size));
        }
        if !(self.ic_perturb_std >= 0.0) {
            return fail(format!("ic_perturb_std = {} must be non-negative", self.ic_perturb_std));
        }
        if !(self.gamma > 0.0) {
            return fail(format!("gamma = {} must be positive", self.gamma));
        }
        if self.obs_stride_steps == 0 {
            return fail("obs_stride_steps must be positive".into());
        }
        if !(self.h0 >= self.h1 && self.h1 > 0.0) {
            return fail(format!("need h0 >= h1 > 0, got h0 = {}, h1 = {}", self.h0, self.h1));
        }
        if self.reference_refinement == 0 {
            return fail("reference_refinement must be positive".into());
        }
        if !(self.window_lo <= self.window_hi) {
            return fail(format!("window [{}, {}] is empty", self.window_lo, self.window_hi));
        }
        self.filter_config().validate()
    }

    pub fn filter_config(&self) -> FilterConfig<f64> {
        FilterConfig::new(
            self.variant,
            self.alpha,
            self.beta_max_target,
            self.localization_bandwidth,
            self.dist,
        )
    }

    /// Ordered key/value pairs; `parse` of their text form reproduces `self`.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let snapshots: Vec<String> = self.snapshots.iter().map(|t| format!("{t:?}")).collect();
        vec![
            ("case", self.case.to_string()),
            ("variant", self.variant.to_string()),
            ("n", self.n.to_string()),
            ("cfl", format!("{:?}", self.cfl)),
            ("t_end", format!("{:?}", self.t_end)),
            ("ensemble_size", self.ensemble_size.to_string()),
            ("ic_perturb_std", format!("{:?}", self.ic_perturb_std)),
            ("gamma", format!("{:?}", self.gamma)),
            ("obs_stride_steps", self.obs_stride_steps.to_string()),
            ("alpha", format!("{:?}", self.alpha)),
            ("beta_max_target", format!("{:?}", self.beta_max_target)),
            ("dist", self.dist.to_string()),
            ("localization_bandwidth", self.localization_bandwidth.to_string()),
            ("seed", self.seed.to_string()),
            ("output_dir", self.output_dir.display().to_string()),
            ("h0", format!("{:?}", self.h0)),
            ("h1", format!("{:?}", self.h1)),
            ("reference_refinement", self.reference_refinement.to_string()),
            ("window_lo", format!("{:?}", self.window_lo)),
            ("window_hi", format!("{:?}", self.window_hi)),
            ("transport_speed", speed_name(self.transport_speed).to_string()),
            ("snapshots", snapshots.join(",")),
        ]
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.pairs() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

/// Splits `key = value` lines, skipping blanks and `#` comments.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_defaults() {
        let d = ExperimentConfig::for_case(Case::Dense);
        assert_eq!((d.n, d.cfl, d.t_end, d.ensemble_size), (1001, 0.1, 0.15, 100));
        assert_eq!((d.ic_perturb_std, d.gamma, d.obs_stride_steps), (0.1, 0.01, 5));
        assert_eq!((d.alpha, d.beta_max_target, d.localization_bandwidth, d.dist), (1.5, 0.003, 0, 1));
        let s = ExperimentConfig::for_case(Case::Sparse);
        assert_eq!((s.t_end, s.alpha, s.beta_max_target, s.localization_bandwidth), (0.3, 1.3, 0.0027, 1));
        let o = ExperimentConfig::for_case(Case::Oscillatory);
        assert_eq!((o.t_end, o.alpha, o.beta_max_target, o.localization_bandwidth), (0.3, 1.3, 0.0027, 1));
        // default grid spacing, observation interval and reference spacing
        let dx = 2.0 / (d.n - 1) as f64;
        assert!((dx - 2e-3).abs() < 1e-15);
        assert!((d.cfl * dx * d.obs_stride_steps as f64 - 1e-3).abs() < 1e-15);
        assert!((dx / o.reference_refinement as f64 - 1e-4).abs() < 1e-15);
    }

    #[test]
    fn text_round_trip() {
        let mut c = ExperimentConfig::for_case(Case::Sparse);
        c.variant = Variant::GsmClustered;
        c.seed = 17;
        c.cfl = 0.1 + 1e-17;
        c.snapshots = vec![0.1, 0.25];
        assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn case_applied_before_other_keys() {
        let c = ExperimentConfig::parse("alpha = 2.0\ncase = sparse # trailing\n\nn = 201").unwrap();
        assert_eq!((c.case, c.alpha, c.n, c.t_end), (Case::Sparse, 2.0, 201, 0.3));
    }

    #[test]
    fn bad_input_is_config_error() {
        for text in ["bogus = 1", "n = many", "case = tidal", "gamma = 0", "n = 5", "no equals sign"] {
            let e = ExperimentConfig::parse(text).unwrap_err();
            assert!(e.is_config_error(), "{text}: {e}");
        }
    }

    #[test]
    fn run_keys_ignored() {
        let c = ExperimentConfig::parse("run.status = ok\nrun.sha256.summary_csv = abc\nseed = 3").unwrap();
        assert_eq!(c.seed, 3);
    }
}
