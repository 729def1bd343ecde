//! Ensemble transform and the closed-form analysis mean.

use crate::error::{Error, Result};
use crate::linalg::{BandedCholesky, BandedSym, Matrix, SymmetricEigen};
use crate::observe::{ObservationNoise, ObservationOperator};
use crate::scalar::Real;

/// `T = [I + (H X)^T G^-1 (H X)]^-1` and its symmetric positive-definite square root.
#[derive(Clone, Debug)]
pub struct Transform<T> {
    pub t: Matrix<T>,
    pub sqrt: Matrix<T>,
}

impl<T: Real> Transform<T> {
    /// Posterior anomalies `X T^{1/2}`.
    pub fn apply(&self, centered: &Matrix<T>) -> Result<Matrix<T>> {
        centered.matmul(&self.sqrt)
    }
}

fn check_shapes<T: Real>(
    state_dim: usize,
    h: &ObservationOperator,
    noise: &ObservationNoise<T>,
) -> Result<()> {
    if h.state_dim() != state_dim {
        return Err(Error::Dimension(format!(
            "operator acts on {} points, state has {state_dim}",
            h.state_dim()
        )));
    }
    if noise.dim() != h.obs_dim() {
        return Err(Error::Dimension(format!(
            "noise has dimension {}, operator observes {} points",
            noise.dim(),
            h.obs_dim()
        )));
    }
    Ok(())
}

pub fn etkf_transform<T: Real>(
    centered: &Matrix<T>,
    h: &ObservationOperator,
    noise: &ObservationNoise<T>,
) -> Result<Transform<T>> {
    check_shapes(centered.nrows(), h, noise)?;
    let k = centered.ncols();
    let hx = h.apply_rows(centered);
    let scaled = Matrix::from_fn(hx.nrows(), k, |r, j| hx[(r, j)] / noise.variances()[r].sqrt());
    let mut a = scaled.inner_gram();
    for i in 0..k {
        a[(i, i)] = a[(i, i)] + T::one();
    }
    let eig = SymmetricEigen::new(&a)?;
    Ok(Transform { t: eig.map_spectrum(|l| T::one() / l), sqrt: eig.map_spectrum(|l| T::one() / l.sqrt()) })
}

/// Minimizer of `|y - H m|^2_{G^-1} + |m - m_hat|^2_{W^-1}`, computed as
/// `m_hat + W H^T (H W H^T + G)^-1 (y - H m_hat)` without inverting `W`.
pub fn analysis_mean<T: Real>(
    m_hat: &[T],
    y: &[T],
    h: &ObservationOperator,
    noise: &ObservationNoise<T>,
    w: &BandedSym<T>,
) -> Result<Vec<T>> {
    check_shapes(m_hat.len(), h, noise)?;
    if w.dim() != m_hat.len() || y.len() != h.obs_dim() {
        return Err(Error::Dimension(format!(
            "weight is {0}x{0}, mean has {1} entries, {2} observations for {3} rows",
            w.dim(),
            m_hat.len(),
            y.len(),
            h.obs_dim()
        )));
    }
    if h.obs_dim() == 0 {
        return Ok(m_hat.to_vec());
    }
    let mut s = w.select(h.indices());
    for (r, &g) in noise.variances().iter().enumerate() {
        s.set(r, r, s.get(r, r) + g);
    }
    let chol = BandedCholesky::factor(&s)?;
    let innovation: Vec<T> = y.iter().zip(h.apply(m_hat)).map(|(&o, p)| o - p).collect();
    let z = chol.solve(&innovation);
    let correction = w.matvec(&h.adjoint(&z));
    Ok(m_hat.iter().zip(correction).map(|(&m, c)| m + c).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_transform() {
        let x = Matrix::from_row_major(1, 1, vec![1.0_f64]).unwrap();
        let tr = etkf_transform(&x, &ObservationOperator::dense(1), &ObservationNoise::new(vec![1.0]).unwrap())
            .unwrap();
        assert!((tr.t[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((tr.sqrt[(0, 0)] - 0.7071067811865476).abs() < 1e-15);
    }

    #[test]
    fn no_observations_is_identity() {
        let x = Matrix::from_fn(4, 3, |i, j| (i as f64) - (j as f64) * 0.5);
        let tr = etkf_transform(&x, &ObservationOperator::none(4), &ObservationNoise::new(vec![]).unwrap())
            .unwrap();
        assert_eq!(tr.t, Matrix::identity(3));
        assert_eq!(tr.apply(&x).unwrap(), x);
    }

    #[test]
    fn scalar_analysis() {
        let w = BandedSym::from_diagonal(&[0.25_f64]);
        let noise = ObservationNoise::new(vec![0.25]).unwrap();
        let m = analysis_mean(&[0.0], &[1.0], &ObservationOperator::dense(1), &noise, &w).unwrap();
        assert!((m[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn uninformative_data_keeps_prior() {
        let w = BandedSym::from_diagonal(&[0.1_f64, 0.2, 0.3]);
        let noise = ObservationNoise::isotropic(1e6, 3).unwrap();
        let prior = [1.0_f64, 2.0, 3.0];
        let m = analysis_mean(&prior, &[5.0, 5.0, 5.0], &ObservationOperator::dense(3), &noise, &w).unwrap();
        for (a, b) in m.iter().zip(prior) {
            assert!((a - b).abs() / b < 1e-6);
        }
    }
}
