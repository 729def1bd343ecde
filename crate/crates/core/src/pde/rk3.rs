//! Three-stage TVD Runge–Kutta (Shu–Osher form).

use crate::error::{Error, Result};
use crate::scalar::{first_non_finite, Real};

/// Advances `state` by one step of size `dt`.
///
/// `rhs` evaluates the semi-discrete operator. `step` is only used to label
/// errors.
pub fn tvdrk3_step<T, F>(state: &[T], dt: T, step: usize, mut rhs: F) -> Result<Vec<T>>
where
    T: Real,
    F: FnMut(&[T]) -> Result<Vec<T>>,
{
    let check = |v: &[T], stage: usize| match first_non_finite(v) {
        Some(_) => Err(Error::NonFiniteStage { step, stage }),
        None => Ok(()),
    };
    // increments on `state`; a zero operator returns it bit-identical
    let quarter = T::lit(0.25);
    let two_thirds = T::lit(2.0) / T::lit(3.0);

    let l0 = rhs(state)?;
    let u1: Vec<T> = state.iter().zip(&l0).map(|(&u, &l)| u + dt * l).collect();
    check(&u1, 1)?;

    let l1 = rhs(&u1)?;
    let u2: Vec<T> = state
        .iter()
        .zip(u1.iter().zip(&l1))
        .map(|(&u, (&v, &l))| u + quarter * ((v - u) + dt * l))
        .collect();
    check(&u2, 2)?;

    let l2 = rhs(&u2)?;
    let u3: Vec<T> = state
        .iter()
        .zip(u2.iter().zip(&l2))
        .map(|(&u, (&v, &l))| u + two_thirds * ((v - u) + dt * l))
        .collect();
    check(&u3, 3)?;
    Ok(u3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rhs_is_identity() {
        let s = vec![0.1_f64, -3.7, 1e-300, 12.5];
        let out = tvdrk3_step(&s, 0.3, 0, |u| Ok(vec![0.0; u.len()])).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn exponential_decay_one_step() {
        let out = tvdrk3_step(&[1.0_f64], 0.1, 0, |u| Ok(vec![-u[0]])).unwrap();
        // third-order Taylor polynomial of exp(-dt)
        let taylor = 1.0 - 0.1 + 0.01 / 2.0 - 0.001 / 6.0;
        assert!((out[0] - taylor).abs() < 1e-15);
        assert!((out[0] - (-0.1_f64).exp()).abs() < 5e-6);
    }

    #[test]
    fn blowup_reports_stage() {
        let err = tvdrk3_step(&[1.0_f64], 1.0, 4, |u| Ok(vec![if u[0] > 1.5 { f64::NAN } else { 1.0 }]))
            .unwrap_err();
        match err {
            Error::NonFiniteStage { step, stage } => assert_eq!((step, stage), (4, 2)),
            other => panic!("{other:?}"),
        }
    }
}
