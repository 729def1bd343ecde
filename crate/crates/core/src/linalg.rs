//! Small dense and banded linear algebra used by the analysis step.
//!
//! Matrices here are either ensemble-space (`K x K`) or banded with the
//! bandwidth of the localization mask.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, data: vec![T::zero(); nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        Self { nrows, ncols, data }
    }

    pub fn from_row_major(nrows: usize, ncols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != nrows * ncols {
            return Err(Error::Dimension(format!(
                "{} values for a {nrows}x{ncols} matrix",
                data.len()
            )));
        }
        Ok(Self { nrows, ncols, data })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.nrows).map(|i| self[(i, j)]).collect()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)])
    }

    pub fn scale(&mut self, c: T) {
        self.data.iter_mut().for_each(|v| *v = *v * c);
    }

    pub fn matmul(&self, rhs: &Matrix<T>) -> Result<Matrix<T>> {
        if self.ncols != rhs.nrows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.nrows, self.ncols, rhs.nrows, rhs.ncols
            )));
        }
        let mut out = Matrix::zeros(self.nrows, rhs.ncols);
        for i in 0..self.nrows {
            let out_row = &mut out.data[i * rhs.ncols..(i + 1) * rhs.ncols];
            for (p, &a) in self.row(i).iter().enumerate() {
                if a == T::zero() {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(p)) {
                    *o = *o + a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self * self^T`.
    pub fn outer_gram(&self) -> Matrix<T> {
        let n = self.nrows;
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = dot(self.row(i), self.row(j));
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    /// `self^T * self`.
    pub fn inner_gram(&self) -> Matrix<T> {
        let k = self.ncols;
        let mut out = Matrix::zeros(k, k);
        for r in 0..self.nrows {
            let row = self.row(r);
            for a in 0..k {
                let ra = row[a];
                if ra == T::zero() {
                    continue;
                }
                for b in a..k {
                    out[(a, b)] = out[(a, b)] + ra * row[b];
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                out[(a, b)] = out[(b, a)];
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Matrix<T>) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.ncols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.ncols + j]
    }
}

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Symmetric matrix stored by its upper band: `band[i][d] = A[i, i + d]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedSym<T> {
    n: usize,
    bandwidth: usize,
    data: Vec<T>,
}

impl<T: Real> BandedSym<T> {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        let bandwidth = bandwidth.min(n.saturating_sub(1));
        Self { n, bandwidth, data: vec![T::zero(); n * (bandwidth + 1)] }
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        Self { n: diag.len(), bandwidth: 0, data: diag.to_vec() }
    }

    /// Keeps the entries of a dense symmetric matrix within `bandwidth` of the diagonal.
    pub fn from_dense(a: &Matrix<T>, bandwidth: usize) -> Self {
        let mut out = Self::zeros(a.nrows(), bandwidth);
        for i in 0..out.n {
            for d in 0..=out.bandwidth.min(out.n - 1 - i) {
                out.set(i, i + d, a[(i, i + d)]);
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d > self.bandwidth {
            T::zero()
        } else {
            self.data[lo * (self.bandwidth + 1) + d]
        }
    }

    /// Sets `A[i, j]` and `A[j, i]`. Panics outside the band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        assert!(d <= self.bandwidth, "entry ({i}, {j}) outside bandwidth {}", self.bandwidth);
        self.data[lo * (self.bandwidth + 1) + d] = v;
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn scale(&mut self, c: T) {
        self.data.iter_mut().for_each(|v| *v = *v * c);
    }

    /// Largest stored entry (the entries outside the band are zero).
    pub fn max_entry(&self) -> T {
        let stored = self.data.iter().copied().fold(T::neg_infinity(), T::max);
        if self.bandwidth + 1 < self.n {
            stored.max(T::zero())
        } else {
            stored
        }
    }

    pub fn to_dense(&self) -> Matrix<T> {
        Matrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        let b = self.bandwidth;
        for i in 0..self.n {
            let row = &self.data[i * (b + 1)..(i + 1) * (b + 1)];
            y[i] = y[i] + row[0] * x[i];
            for d in 1..=b.min(self.n - 1 - i) {
                let a = row[d];
                y[i] = y[i] + a * x[i + d];
                y[i + d] = y[i + d] + a * x[i];
            }
        }
        y
    }

    /// Restriction to the (strictly increasing) index set `idx`, i.e. `H A H^T` for a
    /// selection operator `H`. The bandwidth cannot grow under an ordered selection.
    pub fn select(&self, idx: &[usize]) -> Self {
        let m = idx.len();
        let mut out = Self::zeros(m, self.bandwidth);
        for a in 0..m {
            for c in a..m {
                if idx[c] - idx[a] > self.bandwidth {
                    break;
                }
                if c - a <= out.bandwidth {
                    out.set(a, c, self.get(idx[a], idx[c]));
                }
            }
        }
        out
    }
}

/// Banded Cholesky factor `A = L L^T`, stored by rows of the lower band.
#[derive(Clone, Debug)]
pub struct BandedCholesky<T> {
    n: usize,
    bandwidth: usize,
    // lower[i][d] = L[i, i - d]
    lower: Vec<T>,
}

impl<T: Real> BandedCholesky<T> {
    pub fn factor(a: &BandedSym<T>) -> Result<Self> {
        let n = a.dim();
        let b = a.bandwidth();
        let mut lower = vec![T::zero(); n * (b + 1)];
        let at = |l: &Vec<T>, i: usize, j: usize| l[i * (b + 1) + (i - j)];
        let mut max_pivot = T::zero();
        let mut min_pivot = T::infinity();
        for i in 0..n {
            let j0 = i.saturating_sub(b);
            for j in j0..=i {
                let mut s = a.get(i, j);
                let k0 = j0.max(j.saturating_sub(b));
                for k in k0..j {
                    s = s - at(&lower, i, k) * at(&lower, j, k);
                }
                if i == j {
                    if !(s > T::zero()) || !s.is_finite() {
                        return Err(Error::SingularInnovation { condition: f64::INFINITY });
                    }
                    let p = s.sqrt();
                    max_pivot = max_pivot.max(p);
                    min_pivot = min_pivot.min(p);
                    lower[i * (b + 1)] = p;
                } else {
                    lower[i * (b + 1) + (i - j)] = s / at(&lower, j, j);
                }
            }
        }
        if n > 0 {
            let cond = (max_pivot / min_pivot).powi(2);
            if cond.to_f64_lossy() * T::epsilon().to_f64_lossy() > 1e-2 {
                return Err(Error::SingularInnovation { condition: cond.to_f64_lossy() });
            }
        }
        Ok(Self { n, bandwidth: b, lower })
    }

    /// Rough 2-norm condition estimate from the pivots.
    pub fn condition_estimate(&self) -> T {
        let b = self.bandwidth + 1;
        let piv = (0..self.n).map(|i| self.lower[i * b]);
        let (lo, hi) = piv.fold((T::infinity(), T::zero()), |(lo, hi), p| (lo.min(p), hi.max(p)));
        (hi / lo).powi(2)
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let b = self.bandwidth;
        let w = b + 1;
        let mut y = rhs.to_vec();
        for i in 0..self.n {
            let mut s = y[i];
            for j in i.saturating_sub(b)..i {
                s = s - self.lower[i * w + (i - j)] * y[j];
            }
            y[i] = s / self.lower[i * w];
        }
        for i in (0..self.n).rev() {
            let mut s = y[i];
            for j in i + 1..(i + b + 1).min(self.n) {
                s = s - self.lower[j * w + (j - i)] * y[j];
            }
            y[i] = s / self.lower[i * w];
        }
        y
    }
}

/// Eigen-decomposition `A = V diag(values) V^T` of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    /// Eigenvectors stored as columns.
    pub vectors: Matrix<T>,
}

impl<T: Real> SymmetricEigen<T> {
    /// Cyclic Jacobi rotations; accurate to working precision for the small
    /// ensemble-space matrices this crate decomposes.
    pub fn new(a: &Matrix<T>) -> Result<Self> {
        const MAX_SWEEPS: usize = 100;
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension("eigen-decomposition of a non-square matrix".into()));
        }
        let mut m = a.clone();
        let mut v = Matrix::identity(n);
        let two = T::lit(2.0);
        let total: T = m.as_slice().iter().map(|x| *x * *x).sum();
        let tol = T::epsilon() * T::epsilon() * total.max(T::min_positive_value());
        for sweep in 0..MAX_SWEEPS {
            let mut off = T::zero();
            for p in 0..n {
                for q in p + 1..n {
                    off = off + m[(p, q)] * m[(p, q)];
                }
            }
            if off <= tol {
                return Ok(Self::finish(m, v));
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = m[(p, q)];
                    if apq == T::zero() {
                        continue;
                    }
                    let app = m[(p, p)];
                    let aqq = m[(q, q)];
                    let theta = (aqq - app) / (two * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let mkp = m[(k, p)];
                        let mkq = m[(k, q)];
                        m[(k, p)] = c * mkp - s * mkq;
                        m[(k, q)] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let mpk = m[(p, k)];
                        let mqk = m[(q, k)];
                        m[(p, k)] = c * mpk - s * mqk;
                        m[(q, k)] = s * mpk + c * mqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
            if sweep + 1 == MAX_SWEEPS {
                break;
            }
        }
        Err(Error::EigenNoConvergence { sweeps: MAX_SWEEPS })
    }

    fn finish(m: Matrix<T>, vectors: Matrix<T>) -> Self {
        let values = (0..m.nrows()).map(|i| m[(i, i)]).collect();
        Self { values, vectors }
    }

    /// `V diag(f(values)) V^T`.
    pub fn map_spectrum(&self, f: impl Fn(T) -> T) -> Matrix<T> {
        let n = self.values.len();
        let fv: Vec<T> = self.values.iter().map(|&x| f(x)).collect();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut s = T::zero();
                for k in 0..n {
                    s = s + self.vectors[(i, k)] * fv[k] * self.vectors[(j, k)];
                }
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize) -> Matrix<f64> {
        let b = Matrix::from_fn(n, n + 2, |i, j| ((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.4);
        let mut a = b.outer_gram();
        for i in 0..n {
            a[(i, i)] += 0.5;
        }
        a
    }

    #[test]
    fn banded_cholesky_solves_dense_system() {
        let a = spd(7);
        let band = BandedSym::from_dense(&a, 6);
        let chol = BandedCholesky::factor(&band).unwrap();
        let x_true: Vec<f64> = (0..7).map(|i| i as f64 - 3.0).collect();
        let rhs = band.matvec(&x_true);
        let x = chol.solve(&rhs);
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn tridiagonal_solve() {
        let mut a = BandedSym::zeros(5, 1);
        for i in 0..5 {
            a.set(i, i, 4.0);
            if i + 1 < 5 {
                a.set(i, i + 1, -1.0);
            }
        }
        let x = BandedCholesky::factor(&a).unwrap().solve(&a.matvec(&[1.0, 2.0, 3.0, 4.0, 5.0]));
        for (i, v) in x.iter().enumerate() {
            assert!((v - (i + 1) as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = BandedSym::zeros(2, 1);
        a.set(0, 0, 1.0);
        a.set(1, 1, 1.0);
        a.set(0, 1, 2.0);
        assert!(matches!(BandedCholesky::factor(&a), Err(Error::SingularInnovation { .. })));
    }

    #[test]
    fn selection_keeps_band() {
        let a = BandedSym::from_dense(&spd(9), 1);
        let s = a.select(&[0, 2, 4, 6, 8]);
        // every other index of a tridiagonal matrix is diagonal
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert_eq!(s.get(i, j), 0.0);
                }
            }
        }
        assert_eq!(s.get(2, 2), a.get(4, 4));
    }

    #[test]
    fn jacobi_reconstructs() {
        let a = spd(6);
        let eig = SymmetricEigen::new(&a).unwrap();
        let back = eig.map_spectrum(|x| x);
        assert!(back.max_abs_diff(&a) < 1e-12);
        let sqrt = eig.map_spectrum(|x| x.sqrt());
        assert!(sqrt.matmul(&sqrt).unwrap().max_abs_diff(&a) < 1e-12);
    }
}
