//! Joining the summary tables of several runs.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Tolerance when matching times across summaries.
const TIME_TOL: f64 = 1e-12;

/// One run's summary table.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub label: String,
    pub times: Vec<f64>,
    pub full: Vec<f64>,
    pub window: Vec<f64>,
}

impl Summary {
    pub fn read(label: impl Into<String>, path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let headers = r.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Parse(format!("{} has no `{name}` column", path.display())))
        };
        let (ct, cf, cw) = (col("t")?, col("relative_error_full")?, col("relative_error_window")?);
        let mut s = Summary { label: label.into(), times: vec![], full: vec![], window: vec![] };
        for rec in r.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("bad number in {}", path.display())))
            };
            s.times.push(num(ct)?);
            s.full.push(num(cf)?);
            s.window.push(num(cw)?);
        }
        Ok(s)
    }

    /// Mean of the full-domain and windowed errors over times in `[lo, hi]`.
    pub fn means_over(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let idx: Vec<usize> =
            (0..self.times.len()).filter(|&i| self.times[i] >= lo - 1e-9 && self.times[i] <= hi + 1e-9).collect();
        if idx.is_empty() {
            return None;
        }
        let k = idx.len() as f64;
        Some((idx.iter().map(|&i| self.full[i]).sum::<f64>() / k, idx.iter().map(|&i| self.window[i]).sum::<f64>() / k))
    }
}

/// Aggregate of one run over one time window.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowMean {
    pub label: String,
    pub t_lo: f64,
    pub t_hi: f64,
    pub mean_full: f64,
    pub mean_window: f64,
    /// `mean_full` relative to the first run's.
    pub ratio_to_first: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub times: Vec<f64>,
    pub runs: Vec<Summary>,
    pub means: Vec<WindowMean>,
}

/// Joins summaries on their shared time grid and averages over each `(lo, hi)` window.
pub fn compare_runs(runs: Vec<Summary>, windows: &[(f64, f64)]) -> Result<Comparison> {
    let first = runs.first().ok_or_else(|| Error::Config("nothing to compare".into()))?;
    let times = first.times.clone();
    for run in &runs[1..] {
        for row in 0..times.len().max(run.times.len()) {
            let (a, b) = (times.get(row).copied(), run.times.get(row).copied());
            match (a, b) {
                (Some(a), Some(b)) if (a - b).abs() <= TIME_TOL => {}
                _ => {
                    return Err(Error::TimeGridMismatch {
                        row,
                        left: a.unwrap_or(f64::NAN),
                        right: b.unwrap_or(f64::NAN),
                    })
                }
            }
        }
    }
    let mut means = Vec::new();
    for &(lo, hi) in windows {
        let base = first.means_over(lo, hi).map(|m| m.0);
        for run in &runs {
            if let Some((mean_full, mean_window)) = run.means_over(lo, hi) {
                let ratio = base.map_or(f64::NAN, |b| mean_full / b);
                means.push(WindowMean {
                    label: run.label.clone(),
                    t_lo: lo,
                    t_hi: hi,
                    mean_full,
                    mean_window,
                    ratio_to_first: ratio,
                });
            }
        }
    }
    Ok(Comparison { times, runs, means })
}

impl Comparison {
    /// `t` followed by one full-domain relative-error column per run.
    pub fn write_table<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend(self.runs.iter().map(|r| r.label.clone()));
        w.write_record(&header)?;
        for (row, t) in self.times.iter().enumerate() {
            let mut rec = vec![format!("{t:.16e}")];
            rec.extend(self.runs.iter().map(|r| format!("{:.16e}", r.full[row])));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_means<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["label", "t_lo", "t_hi", "mean_relative_error_full", "mean_relative_error_window", "ratio_to_first"])?;
        for m in &self.means {
            w.write_record([
                m.label.clone(),
                format!("{:?}", m.t_lo),
                format!("{:?}", m.t_hi),
                format!("{:.16e}", m.mean_full),
                format!("{:.16e}", m.mean_window),
                format!("{:.16e}", m.ratio_to_first),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
