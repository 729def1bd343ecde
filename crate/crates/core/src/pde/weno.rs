//! Fifth-order finite-difference WENO with global Lax–Friedrichs flux splitting.

use crate::error::{Error, Result};
use crate::scalar::{first_non_finite, Real};

/// Ghost layers needed on each side by the five-point stencils.
pub const GHOST: usize = 3;

/// Regularizer in the nonlinear weights.
pub const WENO_EPSILON: f64 = 1e-6;

/// Closure used to fill ghost values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// The last grid point duplicates the first; `n - 1` unique values wrap around.
    Periodic,
    /// End values held fixed; ghosts copy the end value.
    Fixed,
}

impl Boundary {
    /// Pads `values` with `GHOST` entries on both sides.
    pub fn pad<T: Real>(self, values: &[T]) -> Vec<T> {
        let n = values.len();
        let mut out = Vec::with_capacity(n + 2 * GHOST);
        match self {
            Boundary::Fixed => {
                out.extend(std::iter::repeat_n(values[0], GHOST));
                out.extend_from_slice(values);
                out.extend(std::iter::repeat_n(values[n - 1], GHOST));
            }
            Boundary::Periodic => {
                let unique = &values[..n - 1];
                let m = unique.len();
                for g in 0..GHOST {
                    out.push(unique[(m - GHOST % m + g) % m]);
                }
                out.extend_from_slice(unique);
                for g in 0..GHOST {
                    out.push(unique[g % m]);
                }
            }
        }
        out
    }

    /// Maps a derivative computed on the padded interior back onto the `n` grid points.
    fn finish<T: Real>(self, mut interior: Vec<T>) -> Vec<T> {
        if self == Boundary::Periodic {
            let first = interior[0];
            interior.push(first);
        }
        interior
    }
}

/// Left-biased WENO5 reconstruction at the interface to the right of `c`.
#[inline]
fn reconstruct<T: Real>(a: T, b: T, c: T, d: T, e: T) -> T {
    let c13_12 = T::lit(13.0 / 12.0);
    let quarter = T::lit(0.25);
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    let five = T::lit(5.0);
    let six = T::lit(6.0);
    let seven = T::lit(7.0);
    let eleven = T::lit(11.0);

    let q0 = (two * a - seven * b + eleven * c) / six;
    let q1 = (-b + five * c + two * d) / six;
    let q2 = (two * c + five * d - e) / six;

    let s0 = a - two * b + c;
    let s1 = b - two * c + d;
    let s2 = c - two * d + e;
    let t0 = a - four * b + three * c;
    let t1 = b - d;
    let t2 = three * c - four * d + e;
    let beta0 = c13_12 * s0 * s0 + quarter * t0 * t0;
    let beta1 = c13_12 * s1 * s1 + quarter * t1 * t1;
    let beta2 = c13_12 * s2 * s2 + quarter * t2 * t2;

    let eps = T::lit(WENO_EPSILON);
    let a0 = T::lit(0.1) / ((eps + beta0) * (eps + beta0));
    let a1 = T::lit(0.6) / ((eps + beta1) * (eps + beta1));
    let a2 = T::lit(0.3) / ((eps + beta2) * (eps + beta2));
    (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2)
}

/// `-(F_{i+1/2} - F_{i-1/2}) / dx` for every interior point of already padded arrays.
pub fn flux_difference<T: Real>(padded_v: &[T], padded_f: &[T], lambda: T, dx: T) -> Vec<T> {
    let len = padded_v.len();
    let half = T::lit(0.5);
    let fp: Vec<T> = padded_f.iter().zip(padded_v).map(|(&f, &v)| half * (f + lambda * v)).collect();
    let fm: Vec<T> = padded_f.iter().zip(padded_v).map(|(&f, &v)| half * (f - lambda * v)).collect();

    // interface p + 1/2 for p in GHOST-1 ..= len-GHOST-1
    let first = GHOST - 1;
    let last = len - GHOST - 1;
    let flux: Vec<T> = (first..=last)
        .map(|p| {
            reconstruct(fp[p - 2], fp[p - 1], fp[p], fp[p + 1], fp[p + 2])
                + reconstruct(fm[p + 3], fm[p + 2], fm[p + 1], fm[p], fm[p - 1])
        })
        .collect();
    flux.windows(2).map(|w| -(w[1] - w[0]) / dx).collect()
}

/// WENO5 approximation of `-df/dx` on the grid, with ghost values from `boundary`.
///
/// `lambda` must bound the characteristic speeds so that the split fluxes are
/// monotone.
pub fn weno5_derivative<T: Real>(
    field: &[T],
    flux: &[T],
    lambda: T,
    dx: T,
    boundary: Boundary,
) -> Result<Vec<T>> {
    if field.len() != flux.len() {
        return Err(Error::Dimension(format!(
            "field has {} points, flux has {}",
            field.len(),
            flux.len()
        )));
    }
    if field.len() < 2 * GHOST {
        return Err(Error::InvalidGrid(format!("{} points is too few for WENO5", field.len())));
    }
    if let Some(index) = first_non_finite(field) {
        return Err(Error::NonFinite { what: "field", index });
    }
    if let Some(index) = first_non_finite(flux) {
        return Err(Error::NonFinite { what: "flux", index });
    }
    let v = boundary.pad(field);
    let f = boundary.pad(flux);
    Ok(boundary.finish(flux_difference(&v, &f, lambda, dx)))
}
