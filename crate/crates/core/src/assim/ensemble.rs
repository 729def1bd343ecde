//! Ensemble moments: mean, anomalies, variance, gradient second moment and correlations.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Floor on the sample variance when normalizing anomalies to correlations.
pub const EPS_VAR: f64 = 1e-12;

/// `K` state vectors of length `n` with their mean and scaled anomaly matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble<T> {
    members: Vec<Vec<T>>,
    mean: Vec<T>,
    // n x K, column k = (v_k - mean) / sqrt(K - 1)
    centered: Matrix<T>,
}

impl<T: Real> Ensemble<T> {
    pub fn new(members: Vec<Vec<T>>) -> Result<Self> {
        let k = members.len();
        if k < 2 {
            return Err(Error::InvalidParameter(format!("ensemble needs at least 2 members, got {k}")));
        }
        let n = members[0].len();
        if let Some(bad) = members.iter().position(|m| m.len() != n) {
            return Err(Error::Dimension(format!(
                "member {bad} has {} entries, member 0 has {n}",
                members[bad].len()
            )));
        }
        let kf = T::from_usize_lossy(k);
        let mean: Vec<T> = (0..n).map(|i| members.iter().map(|m| m[i]).sum::<T>() / kf).collect();
        let scale = T::one() / T::from_usize_lossy(k - 1).sqrt();
        let centered = Matrix::from_fn(n, k, |i, j| (members[j][i] - mean[i]) * scale);
        Ok(Self { members, mean, centered })
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn members(&self) -> &[Vec<T>] {
        &self.members
    }

    pub fn into_members(self) -> Vec<Vec<T>> {
        self.members
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    /// Anomalies scaled by `1/sqrt(K-1)`, one column per member.
    pub fn centered(&self) -> &Matrix<T> {
        &self.centered
    }

    /// Dense sample covariance `X X^T`; only sensible for small `n`.
    pub fn covariance(&self) -> Matrix<T> {
        self.centered.outer_gram()
    }
}

/// Mean and anomalies of `members`.
pub fn ensemble_moments<T: Real>(members: Vec<Vec<T>>) -> Result<Ensemble<T>> {
    Ensemble::new(members)
}

/// Pointwise sample variance with the `1/(K-1)` normalization.
pub fn sample_variance_diag<T: Real>(ensemble: &Ensemble<T>) -> Vec<T> {
    let km1 = T::from_usize_lossy(ensemble.size() - 1);
    let m = ensemble.mean();
    (0..ensemble.dim())
        .map(|i| {
            ensemble.members().iter().map(|v| (v[i] - m[i]) * (v[i] - m[i])).sum::<T>() / km1
        })
        .collect()
}

/// Gradient second moment of an arbitrary set of equal-length profiles.
///
/// Squared forward differences are averaged over the members (with `1/K`) at
/// the midpoints, then moved to the grid by averaging neighbours; the two end
/// values are half the adjacent midpoint value.
pub fn member_gradient_second_moment<T: Real>(members: &[Vec<T>], dx: T) -> Vec<T> {
    let k = T::from_usize_lossy(members.len().max(1));
    let n = members.first().map_or(0, Vec::len);
    if n < 2 {
        return vec![T::zero(); n];
    }
    let centre: Vec<T> = (0..n - 1)
        .map(|i| {
            members
                .iter()
                .map(|v| {
                    let d = (v[i + 1] - v[i]) / dx;
                    d * d
                })
                .sum::<T>()
                / k
        })
        .collect();
    let half = T::lit(0.5);
    let mut out = Vec::with_capacity(n);
    out.push(half * centre[0]);
    for i in 1..n - 1 {
        out.push(half * (centre[i - 1] + centre[i]));
    }
    out.push(half * centre[n - 2]);
    out
}

pub fn gradient_second_moment<T: Real>(ensemble: &Ensemble<T>, dx: T) -> Vec<T> {
    member_gradient_second_moment(ensemble.members(), dx)
}

/// Anomalies normalized row-wise by the sample standard deviation, so that
/// `X~ X~^T` is the sample correlation matrix. Variances below `eps_var` are floored.
pub fn correlation_matrix_factor<T: Real>(ensemble: &Ensemble<T>, eps_var: T) -> Matrix<T> {
    let x = ensemble.centered();
    let mut out = x.clone();
    for i in 0..x.nrows() {
        let var: T = x.row(i).iter().map(|v| *v * *v).sum();
        let s = T::one() / var.max(eps_var).sqrt();
        for v in out.row_mut(i) {
            *v = *v * s;
        }
    }
    out
}

/// Dense sample correlation matrix `X~ X~^T`.
pub fn correlation_matrix<T: Real>(ensemble: &Ensemble<T>, eps_var: T) -> Matrix<T> {
    correlation_matrix_factor(ensemble, eps_var).outer_gram()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_members_have_no_spread() {
        let e = Ensemble::new(vec![vec![1.0, 2.0, 3.0]; 4]).unwrap();
        assert!(e.centered().as_slice().iter().all(|v| *v == 0.0));
        assert_eq!(sample_variance_diag(&e), vec![0.0; 3]);
    }

    #[test]
    fn small_hand_cases() {
        let e = Ensemble::new(vec![vec![0.0_f64], vec![2.0]]).unwrap();
        assert_eq!(e.mean(), &[1.0]);
        assert_eq!(sample_variance_diag(&e), vec![2.0]);
        assert!((e.covariance()[(0, 0)] - 2.0).abs() < 1e-15);

        let e = Ensemble::new(vec![vec![0.0_f64, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        let c = e.covariance();
        for i in 0..2 {
            for j in 0..2 {
                assert!((c[(i, j)] - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rejects_ragged_or_tiny() {
        assert!(Ensemble::new(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(Ensemble::new(vec![vec![1.0]]).is_err());
    }

    #[test]
    fn gsm_hand_case() {
        let g = member_gradient_second_moment(&[vec![0.0, 1.0, 3.0]], 1.0);
        assert_eq!(g, vec![0.5, 2.5, 2.0]);
        let e = Ensemble::new(vec![vec![2.0; 6], vec![-1.0; 6]]).unwrap();
        assert_eq!(gradient_second_moment(&e, 0.1), vec![0.0; 6]);
    }

    #[test]
    fn gsm_peaks_at_step() {
        let members: Vec<Vec<f64>> = (0..5)
            .map(|k| (0..30).map(|i| if i < 17 { 1.0 + 0.01 * k as f64 } else { 0.5 }).collect())
            .collect();
        let e = Ensemble::new(members).unwrap();
        let g = gradient_second_moment(&e, 0.1);
        let peak = (0..30).max_by(|&a, &b| g[a].total_cmp(&g[b])).unwrap();
        assert!(peak == 16 || peak == 17);
    }

    #[test]
    fn correlation_signs() {
        let e = Ensemble::new(vec![vec![0.0, 5.0, 1.0], vec![1.0, 3.0, 0.0], vec![3.0, -1.0, 4.0]]).unwrap();
        let r = correlation_matrix(&e, EPS_VAR);
        for i in 0..3 {
            assert!((r[(i, i)] - 1.0).abs() < 1e-12);
        }
        assert!((r[(0, 1)] + 1.0).abs() < 1e-12);
    }
}
