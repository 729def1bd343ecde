//! Analytic wet-bed dam-break (Stoker) solution.
//!
//! Left rarefaction fan, a constant intermediate state, and a right-moving
//! shock into still water.

use crate::error::{Error, Result};
use crate::pde::GRAVITY;
use crate::scalar::Real;

const MAX_NEWTON: usize = 100;
const ROOT_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DamBreakParams<T> {
    /// Depth left of the dam.
    pub h0: T,
    /// Depth right of the dam.
    pub h1: T,
    pub g: T,
    pub x_dam: T,
}

impl<T: Real> DamBreakParams<T> {
    pub fn new(h0: T, h1: T) -> Result<Self> {
        let p = Self { h0, h1, g: T::lit(GRAVITY), x_dam: T::zero() };
        p.validate()?;
        Ok(p)
    }

    /// Accepts `h0 >= h1 > 0`; `h0 == h1` is the trivial no-wave case.
    pub fn validate(&self) -> Result<()> {
        let ok = self.h1 > T::zero()
            && self.h0 >= self.h1
            && self.g > T::zero()
            && self.h0.is_finite()
            && self.x_dam.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "dam break needs h0 >= h1 > 0 and g > 0 (h0 = {}, h1 = {}, g = {})",
                self.h0, self.h1, self.g
            )))
        }
    }

    /// Initial depth: `h0` left of the dam, `h1` right, the mean exactly on it.
    pub fn initial_depth(&self, x: T) -> T {
        if x < self.x_dam {
            self.h0
        } else if x > self.x_dam {
            self.h1
        } else {
            T::lit(0.5) * (self.h0 + self.h1)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StokerIntermediate<T> {
    pub h_m: T,
    pub u_m: T,
    /// Shock speed.
    pub s: T,
}

impl<T: Real> StokerIntermediate<T> {
    /// Momentum jump-condition residual of the shock joining `(h_m, u_m)` to `(h1, 0)`.
    pub fn rankine_hugoniot_residual(&self, p: &DamBreakParams<T>) -> T {
        let half = T::lit(0.5);
        let mass = self.s * (self.h_m - p.h1) - self.h_m * self.u_m;
        let momentum = self.s * self.h_m * self.u_m
            - (self.h_m * self.u_m * self.u_m + half * p.g * (self.h_m * self.h_m - p.h1 * p.h1));
        mass.abs().max(momentum.abs())
    }

    /// Residual of `u_m + 2 sqrt(g h_m) = 2 sqrt(g h0)` across the fan.
    pub fn rarefaction_residual(&self, p: &DamBreakParams<T>) -> T {
        let two = T::lit(2.0);
        (self.u_m + two * (p.g * self.h_m).sqrt() - two * (p.g * p.h0).sqrt()).abs()
    }
}

/// Velocity behind the shock as a function of the intermediate depth.
fn shock_velocity<T: Real>(h: T, p: &DamBreakParams<T>) -> T {
    let half = T::lit(0.5);
    (h - p.h1) * (half * p.g * (h + p.h1) / (h * p.h1)).sqrt()
}

/// Difference between the rarefaction and shock expressions for `u_m`, decreasing in `h`.
fn compatibility<T: Real>(h: T, p: &DamBreakParams<T>) -> (T, T) {
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let c0 = (p.g * p.h0).sqrt();
    let c = (p.g * h).sqrt();
    let f = two * (c0 - c) - shock_velocity(h, p);
    // derivative
    let q = half * p.g * (h + p.h1) / (h * p.h1);
    let dq = -half * p.g / (h * h);
    let dshock = q.sqrt() + (h - p.h1) * dq / (two * q.sqrt());
    let df = -p.g / c - dshock;
    (f, df)
}

/// Intermediate state by safeguarded Newton iteration on `[h1, h0]`.
pub fn stoker_solve<T: Real>(params: &DamBreakParams<T>) -> Result<StokerIntermediate<T>> {
    params.validate()?;
    let p = params;
    if p.h0 == p.h1 {
        return Ok(StokerIntermediate { h_m: p.h0, u_m: T::zero(), s: (p.g * p.h1).sqrt() });
    }
    let tol = T::lit(ROOT_TOL).max(T::lit(4.0) * T::epsilon());
    let (mut lo, mut hi) = (p.h1, p.h0);
    let mut h = T::lit(0.5) * (lo + hi);
    let mut residual = T::infinity();
    for _ in 0..MAX_NEWTON {
        let (f, df) = compatibility(h, p);
        residual = f;
        if f == T::zero() {
            break;
        }
        if f > T::zero() {
            lo = h;
        } else {
            hi = h;
        }
        let newton = h - f / df;
        let next = if newton > lo && newton < hi && df.is_finite() {
            newton
        } else {
            T::lit(0.5) * (lo + hi)
        };
        let step = (next - h).abs();
        h = next;
        if step <= tol * h {
            residual = compatibility(h, p).0;
            break;
        }
    }
    let accept = T::lit(1e-10).max(T::lit(64.0) * T::epsilon());
    if !(residual.abs() <= accept * (p.g * p.h0).sqrt()) {
        return Err(Error::NoConvergence { iterations: MAX_NEWTON, residual: residual.to_f64_lossy() });
    }
    let two = T::lit(2.0);
    let u_m = two * ((p.g * p.h0).sqrt() - (p.g * h).sqrt());
    let s = h * u_m / (h - p.h1);
    Ok(StokerIntermediate { h_m: h, u_m, s })
}

/// Depth and velocity of the analytic solution at `(x, t)`.
pub fn stoker_evaluate<T: Real>(
    params: &DamBreakParams<T>,
    mid: &StokerIntermediate<T>,
    x: T,
    t: T,
) -> (T, T) {
    if t <= T::zero() {
        return (params.initial_depth(x), T::zero());
    }
    let g = params.g;
    let c0 = (g * params.h0).sqrt();
    let c_m = (g * mid.h_m).sqrt();
    let xi = (x - params.x_dam) / t;
    let two = T::lit(2.0);
    if xi <= -c0 {
        (params.h0, T::zero())
    } else if xi <= mid.u_m - c_m {
        let w = two * c0 - xi;
        (w * w / (T::lit(9.0) * g), two / T::lit(3.0) * (xi + c0))
    } else if xi <= mid.s {
        (mid.h_m, mid.u_m)
    } else {
        (params.h1, T::zero())
    }
}

/// Convenience bundle of parameters and the solved intermediate state.
#[derive(Clone, Copy, Debug)]
pub struct StokerSolution<T> {
    pub params: DamBreakParams<T>,
    pub mid: StokerIntermediate<T>,
}

impl<T: Real> StokerSolution<T> {
    pub fn new(params: DamBreakParams<T>) -> Result<Self> {
        Ok(Self { params, mid: stoker_solve(&params)? })
    }

    pub fn eval(&self, x: T, t: T) -> (T, T) {
        stoker_evaluate(&self.params, &self.mid, x, t)
    }

    pub fn depth_profile(&self, xs: &[T], t: T) -> Vec<T> {
        xs.iter().map(|&x| self.eval(x, t).0).collect()
    }

    pub fn shock_position(&self, t: T) -> T {
        self.params.x_dam + self.mid.s * t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain bisection on the compatibility function, independent of the Newton path.
    fn bisect(p: &DamBreakParams<f64>) -> f64 {
        let f = |h: f64| {
            2.0 * ((p.g * p.h0).sqrt() - (p.g * h).sqrt())
                - (h - p.h1) * (0.5 * p.g * (h + p.h1) / (h * p.h1)).sqrt()
        };
        let (mut a, mut b) = (p.h1, p.h0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(m) > 0.0 {
                a = m
            } else {
                b = m
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn degenerate_no_wave() {
        let p = DamBreakParams::new(1.0, 1.0).unwrap();
        let m = stoker_solve(&p).unwrap();
        assert_eq!((m.h_m, m.u_m), (1.0, 0.0));
        for x in [-0.9, -0.1, 0.0, 0.3, 0.9] {
            assert_eq!(stoker_evaluate(&p, &m, x, 0.2), (1.0, 0.0));
        }
    }

    #[test]
    fn invariants_and_bisection_cross_check() {
        for (h0, h1) in [(1.0, 0.8), (1.0, 0.5), (2.0, 1.0)] {
            let p = DamBreakParams::new(h0, h1).unwrap();
            let m = stoker_solve(&p).unwrap();
            assert!(m.rankine_hugoniot_residual(&p) < 1e-12);
            assert!(m.rarefaction_residual(&p) < 1e-12);
            assert!((m.h_m - bisect(&p)).abs() < 1e-13);
            assert!(m.s > m.u_m && m.u_m > 0.0);
        }
    }

    #[test]
    fn initial_condition() {
        let p = DamBreakParams::new(1.0, 0.8).unwrap();
        let m = stoker_solve(&p).unwrap();
        assert_eq!(stoker_evaluate(&p, &m, -0.5, 0.0), (1.0, 0.0));
        assert_eq!(stoker_evaluate(&p, &m, 0.5, 0.0), (0.8, 0.0));
    }

    #[test]
    fn fan_edge_continuity() {
        let p = DamBreakParams::<f64>::new(1.0, 0.8).unwrap();
        let m = stoker_solve(&p).unwrap();
        let c0 = (p.g * p.h0).sqrt();
        for t in [0.05, 0.15, 0.3] {
            let x = -t * c0;
            let (h, _) = stoker_evaluate(&p, &m, x, t);
            assert!((h - 1.0).abs() < 1e-12);
            let (h_in, _) = stoker_evaluate(&p, &m, x + 1e-12, t);
            assert!((h_in - 1.0).abs() < 1e-10);
            // fan foot meets the intermediate state
            let foot = (m.u_m - (p.g * m.h_m).sqrt()) * t;
            let (h_foot, u_foot) = stoker_evaluate(&p, &m, foot, t);
            assert!((h_foot - m.h_m).abs() < 1e-12 && (u_foot - m.u_m).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_inverted_depths() {
        assert!(DamBreakParams::new(0.8, 1.0).is_err());
        assert!(DamBreakParams::new(1.0, 0.0).is_err());
    }
}
