//! Prior weighting matrices: localized covariance and the gradient-second-moment forms.

use std::fmt;
use std::str::FromStr;

use crate::assim::cluster::{cluster_partition, detect_discontinuity, ClusterPartition};
use crate::assim::ensemble::{correlation_matrix_factor, gradient_second_moment, Ensemble};
use crate::error::{Error, Result};
use crate::linalg::{dot, BandedSym, Matrix};
use crate::scalar::Real;

/// Relative floor added to zero diagonal entries so the weight stays invertible.
pub const WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightForm {
    /// `beta * diag(S)`.
    Diagonal,
    /// `beta * (sqrt(S_i) r_ij sqrt(S_j))` masked by the band.
    Full,
    /// As `Full`, with correlations across or inside the discontinuity region removed.
    Clustered,
}

impl fmt::Display for WeightForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightForm::Diagonal => "diagonal",
            WeightForm::Full => "full",
            WeightForm::Clustered => "clustered",
        })
    }
}

impl FromStr for WeightForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diagonal" => Ok(WeightForm::Diagonal),
            "full" => Ok(WeightForm::Full),
            "clustered" => Ok(WeightForm::Clustered),
            other => Err(Error::Config(format!("unknown weight form `{other}`"))),
        }
    }
}

/// Settings that fix a weight matrix given an ensemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightSpec<T> {
    pub form: WeightForm,
    /// The scale is chosen so that the largest entry equals this.
    pub max_target: T,
    /// Half-width of the binary Toeplitz localization band.
    pub bandwidth: usize,
    /// Radius of the discontinuity region, clustered form only.
    pub dist: usize,
    pub eps_var: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix<T> {
    pub form: WeightForm,
    pub entries: BandedSym<T>,
    pub beta: T,
    /// Partition used by the clustered form.
    pub partition: Option<ClusterPartition>,
}

impl<T: Real> WeightMatrix<T> {
    pub fn max_entry(&self) -> T {
        self.entries.max_entry()
    }
}

/// Localized sample covariance `(X X^T) o T_b` of an anomaly matrix.
pub fn localized_covariance<T: Real>(centered: &Matrix<T>, bandwidth: usize) -> BandedSym<T> {
    let n = centered.nrows();
    let b = bandwidth.min(n.saturating_sub(1));
    let mut out = BandedSym::zeros(n, b);
    for i in 0..n {
        for j in i.saturating_sub(b)..=i {
            out.set(i, j, dot(centered.row(i), centered.row(j)));
        }
    }
    out
}

/// Keeps the entries of `a` within `bandwidth` of the diagonal.
pub fn localize<T: Real>(a: &Matrix<T>, bandwidth: usize) -> BandedSym<T> {
    BandedSym::from_dense(a, bandwidth.min(a.nrows().saturating_sub(1)))
}

/// Builds the weight for `ensemble` on a grid of spacing `dx`.
pub fn build_weight<T: Real>(ensemble: &Ensemble<T>, spec: &WeightSpec<T>, dx: T) -> Result<WeightMatrix<T>> {
    if !(spec.max_target > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "weight target {} must be positive",
            spec.max_target
        )));
    }
    let n = ensemble.dim();
    let s = gradient_second_moment(ensemble, dx);
    let partition = match spec.form {
        WeightForm::Clustered => {
            let xi = detect_discontinuity(ensemble.mean(), dx);
            Some(cluster_partition(xi, spec.dist, n)?)
        }
        _ => None,
    };
    let mut entries = match spec.form {
        WeightForm::Diagonal => BandedSym::from_diagonal(&s),
        WeightForm::Full | WeightForm::Clustered => {
            let xt = correlation_matrix_factor(ensemble, spec.eps_var);
            let root: Vec<T> = s.iter().map(|v| v.sqrt()).collect();
            let b = spec.bandwidth.min(n.saturating_sub(1));
            let mut w = BandedSym::zeros(n, b);
            for i in 0..n {
                for j in i.saturating_sub(b)..=i {
                    if partition.as_ref().is_some_and(|p| !p.keeps(i, j)) {
                        continue;
                    }
                    w.set(i, j, root[i] * root[j] * dot(xt.row(i), xt.row(j)));
                }
            }
            w
        }
    };
    let max = entries.max_entry();
    if !(max > T::zero()) || !max.is_finite() {
        return Err(Error::DegeneratePriorWeight);
    }
    let beta = spec.max_target / max;
    entries.scale(beta);
    let floor = T::lit(WEIGHT_FLOOR) * spec.max_target;
    for i in 0..n {
        if entries.get(i, i) == T::zero() {
            entries.set(i, i, floor);
        }
    }
    Ok(WeightMatrix { form: spec.form, entries, beta, partition })
}
