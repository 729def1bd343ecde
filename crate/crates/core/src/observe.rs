//! Point-selection observation operators and synthetic observation streams.

use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::linalg::Matrix;
use crate::rng::{gaussian, seeded, OBSERVATION_STREAM};
use crate::scalar::Real;

/// `H`: a 0/1 selection matrix with one 1 per row, stored as the selected indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationOperator {
    state_dim: usize,
    indices: Vec<usize>,
}

impl ObservationOperator {
    pub fn new(state_dim: usize, indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("observation indices must increase".into()));
        }
        if indices.last().is_some_and(|&i| i >= state_dim) {
            return Err(Error::InvalidParameter(format!(
                "observation index beyond state dimension {state_dim}"
            )));
        }
        Ok(Self { state_dim, indices })
    }

    /// Every grid point observed (`H = I`).
    pub fn dense(n: usize) -> Self {
        Self { state_dim: n, indices: (0..n).collect() }
    }

    /// Every other point starting at the first, so both ends are observed for odd `n`.
    pub fn every_other(n: usize) -> Self {
        Self { state_dim: n, indices: (0..n).step_by(2).collect() }
    }

    /// The zero map: nothing observed.
    pub fn none(n: usize) -> Self {
        Self { state_dim: n, indices: Vec::new() }
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn obs_dim(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn apply<T: Copy>(&self, state: &[T]) -> Vec<T> {
        self.indices.iter().map(|&i| state[i]).collect()
    }

    /// `H^T y`: observation values placed back at their grid indices, zero elsewhere.
    pub fn adjoint<T: Real>(&self, y: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.state_dim];
        for (&i, &v) in self.indices.iter().zip(y) {
            out[i] = v;
        }
        out
    }

    /// Observation values placed at their grid indices, `None` where unobserved.
    pub fn scatter<T: Copy>(&self, y: &[T]) -> Vec<Option<T>> {
        let mut out = vec![None; self.state_dim];
        for (&i, &v) in self.indices.iter().zip(y) {
            out[i] = Some(v);
        }
        out
    }

    /// Rows of an `n x K` matrix selected by `H`.
    pub fn apply_rows<T: Real>(&self, m: &Matrix<T>) -> Matrix<T> {
        let k = m.ncols();
        let mut out = Matrix::zeros(self.indices.len(), k);
        for (r, &i) in self.indices.iter().enumerate() {
            out.row_mut(r).copy_from_slice(m.row(i));
        }
        out
    }

    pub fn to_matrix<T: Real>(&self) -> Matrix<T> {
        let mut h = Matrix::zeros(self.indices.len(), self.state_dim);
        for (r, &i) in self.indices.iter().enumerate() {
            h[(r, i)] = T::one();
        }
        h
    }
}

/// Diagonal observation-error covariance `Gamma`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationNoise<T> {
    variances: Vec<T>,
}

impl<T: Real> ObservationNoise<T> {
    pub fn new(variances: Vec<T>) -> Result<Self> {
        if let Some(index) = variances.iter().position(|v| !(*v > T::zero()) || !v.is_finite()) {
            return Err(Error::NotPositiveDefinite {
                index,
                value: variances[index].to_f64_lossy(),
            });
        }
        Ok(Self { variances })
    }

    /// `gamma^2 I` of size `m`.
    pub fn isotropic(gamma: T, m: usize) -> Result<Self> {
        Self::new(vec![gamma * gamma; m])
    }

    pub fn variances(&self) -> &[T] {
        &self.variances
    }

    pub fn dim(&self) -> usize {
        self.variances.len()
    }
}

/// Noisy observations `y_j = H v(t_j) + eta_j` at solver steps `steps[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationStream<T> {
    pub times: Vec<T>,
    pub steps: Vec<usize>,
    pub operator: ObservationOperator,
    pub gamma: T,
    pub values: Vec<Vec<T>>,
    pub seed: u64,
}

impl<T: Real> ObservationStream<T> {
    pub fn noise(&self) -> Result<ObservationNoise<T>> {
        ObservationNoise::isotropic(self.gamma, self.operator.obs_dim())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Observation taken at solver step `step`, if any.
    pub fn at_step(&self, step: usize) -> Option<&[T]> {
        self.steps.binary_search(&step).ok().map(|j| self.values[j].as_slice())
    }

    /// CSV with columns `t,obs_index,x,y`.
    pub fn write_csv<W: Write>(&self, grid: &Grid1D<T>, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "obs_index", "x", "y"])?;
        for (t, y) in self.times.iter().zip(&self.values) {
            for (r, (&i, v)) in self.operator.indices().iter().zip(y).enumerate() {
                w.write_record([
                    format!("{t:.16e}"),
                    r.to_string(),
                    format!("{:.16e}", grid.x(i)),
                    format!("{v:.16e}"),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Observation steps every `stride` solver steps, starting at `stride`.
pub fn observation_steps(total_steps: usize, stride: usize) -> Vec<usize> {
    if stride == 0 {
        return Vec::new();
    }
    (1..=total_steps / stride).map(|j| j * stride).collect()
}

/// Draws the stream from a seeded generator, row-major over (time, observation index).
pub fn synthesize_observations<T: Real>(
    mut truth: impl FnMut(usize, T) -> Result<Vec<T>>,
    steps: &[usize],
    dt: T,
    operator: &ObservationOperator,
    gamma: T,
    seed: u64,
) -> Result<ObservationStream<T>> {
    if !(gamma > T::zero()) {
        return Err(Error::InvalidParameter(format!("noise level gamma = {gamma} must be positive")));
    }
    let mut rng = seeded(seed, OBSERVATION_STREAM);
    let mut times = Vec::with_capacity(steps.len());
    let mut values = Vec::with_capacity(steps.len());
    for &s in steps {
        let t = T::from_usize_lossy(s) * dt;
        let state = truth(s, t)?;
        if state.len() != operator.state_dim() {
            return Err(Error::Dimension(format!(
                "truth has {} points, operator expects {}",
                state.len(),
                operator.state_dim()
            )));
        }
        let y = operator.apply(&state).into_iter().map(|v| v + gaussian(&mut rng, gamma)).collect();
        times.push(t);
        values.push(y);
    }
    Ok(ObservationStream {
        times,
        steps: steps.to_vec(),
        operator: operator.clone(),
        gamma,
        values,
        seed,
    })
}
