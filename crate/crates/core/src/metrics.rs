//! Pointwise and relative L1 error against a reference solution.

use std::io::Write;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Slack applied to window endpoints when deciding grid-point membership.
pub const WINDOW_SLACK: f64 = 1e-12;

/// Closed spatial interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Window<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: T) -> bool {
        let slack = T::lit(WINDOW_SLACK);
        x >= self.lo - slack && x <= self.hi + slack
    }
}

/// `|estimate_i - truth_i|` entrywise.
pub fn pointwise_error<T: Real>(estimate: &[T], truth: &[T]) -> Result<Vec<T>> {
    if estimate.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "estimate has {} points, truth has {}",
            estimate.len(),
            truth.len()
        )));
    }
    Ok(estimate.iter().zip(truth).map(|(&e, &t)| (e - t).abs()).collect())
}

/// `sum |truth - estimate| / sum |truth|`, optionally restricted to grid points in `window`.
pub fn relative_error<T: Real>(
    estimate: &[T],
    truth: &[T],
    points: &[T],
    window: Option<Window<T>>,
) -> Result<T> {
    if estimate.len() != truth.len() || points.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "estimate {}, truth {}, grid {} points",
            estimate.len(),
            truth.len(),
            points.len()
        )));
    }
    let mut num = T::zero();
    let mut den = T::zero();
    let mut any = false;
    for ((&e, &t), &x) in estimate.iter().zip(truth).zip(points) {
        if window.is_some_and(|w| !w.contains(x)) {
            continue;
        }
        any = true;
        num = num + (t - e).abs();
        den = den + t.abs();
    }
    if !any {
        let w = window.expect("only a window can exclude points");
        return Err(Error::EmptyWindow { lo: w.lo.to_f64_lossy(), hi: w.hi.to_f64_lossy() });
    }
    Ok(num / den)
}

/// A time series of error values.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorSeries<T> {
    pub label: String,
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub spatial_window: Option<Window<T>>,
}

impl<T: Real> ErrorSeries<T> {
    pub fn new(label: impl Into<String>, spatial_window: Option<Window<T>>) -> Self {
        Self { label: label.into(), times: Vec::new(), values: Vec::new(), spatial_window }
    }

    pub fn push(&mut self, t: T, value: T) {
        debug_assert!(value >= T::zero());
        self.times.push(t);
        self.values.push(value);
    }

    /// Mean over samples with `t` in `[t_lo, t_hi]` (inclusive, with a small slack).
    pub fn mean_over(&self, t_lo: T, t_hi: T) -> Option<T> {
        let slack = T::lit(1e-9);
        let sel: Vec<T> = self
            .times
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= t_lo - slack && **t <= t_hi + slack)
            .map(|(_, v)| *v)
            .collect();
        if sel.is_empty() {
            None
        } else {
            Some(sel.iter().copied().sum::<T>() / T::from_usize_lossy(sel.len()))
        }
    }

    /// CSV with columns `t,value,label,window_lo,window_hi`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "value", "label", "window_lo", "window_hi"])?;
        let (lo, hi) = match self.spatial_window {
            Some(win) => (format!("{:.16e}", win.lo), format!("{:.16e}", win.hi)),
            None => (String::new(), String::new()),
        };
        for (t, v) in self.times.iter().zip(&self.values) {
            w.write_record([format!("{t:.16e}"), format!("{v:.16e}"), self.label.clone(), lo.clone(), hi.clone()])?;
        }
        w.flush()?;
        Ok(())
    }
}
