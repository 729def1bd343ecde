use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smallest grid the WENO5 stencil plus ghost layers can operate on.
pub const MIN_POINTS: usize = 11;

/// Uniform point grid on `[x_min, x_max]` including both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid1D<T> {
    x_min: T,
    x_max: T,
    dx: T,
    points: Vec<T>,
}

impl<T: Real> Grid1D<T> {
    pub fn new(n: usize, x_min: T, x_max: T) -> Result<Self> {
        if n < MIN_POINTS {
            return Err(Error::InvalidGrid(format!("need at least {MIN_POINTS} points, got {n}")));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidGrid(format!("bad domain [{x_min}, {x_max}]")));
        }
        let dx = (x_max - x_min) / T::from_usize_lossy(n - 1);
        let mut points: Vec<T> = (0..n).map(|i| x_min + T::from_usize_lossy(i) * dx).collect();
        points[n - 1] = x_max;
        Ok(Self { x_min, x_max, dx, points })
    }

    /// The `[-1, 1]` domain used by every dam-break experiment.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, -T::one(), T::one())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn x_min(&self) -> T {
        self.x_min
    }

    pub fn x_max(&self) -> T {
        self.x_max
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn x(&self, i: usize) -> T {
        self.points[i]
    }

    /// Nearest grid index to `x`, clamped to the domain.
    pub fn index_of(&self, x: T) -> usize {
        let r = ((x - self.x_min) / self.dx).round();
        let max = T::from_usize_lossy(self.len() - 1);
        r.max(T::zero()).min(max).to_usize().unwrap_or(0)
    }

    /// Grid refined by an integer factor; coarse point `i` sits at fine index `factor * i`.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidGrid("refinement factor must be positive".into()));
        }
        Self::new(factor * (self.len() - 1) + 1, self.x_min, self.x_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_spacing() {
        let g = Grid1D::<f64>::unit(1001).unwrap();
        assert!((g.dx() - 2e-3).abs() < 1e-15);
        assert_eq!(g.x(0), -1.0);
        assert_eq!(g.x(1000), 1.0);
        assert!(g.x(500).abs() < 1e-12);
    }

    #[test]
    fn uniform_and_increasing() {
        let g = Grid1D::<f64>::unit(201).unwrap();
        for w in g.points().windows(2) {
            let rel = ((w[1] - w[0]) - g.dx()).abs() / g.dx();
            assert!(rel < 1e-12);
        }
    }

    #[test]
    fn too_small() {
        assert!(Grid1D::<f64>::unit(10).is_err());
        assert!(Grid1D::<f64>::new(20, 1.0, 1.0).is_err());
    }

    #[test]
    fn refinement_maps_indices() {
        let g = Grid1D::<f64>::unit(21).unwrap();
        let f = g.refine(4).unwrap();
        assert_eq!(f.len(), 81);
        for i in 0..21 {
            assert!((f.x(4 * i) - g.x(i)).abs() < 1e-14);
        }
        assert_eq!(g.index_of(0.0), 10);
    }
}
