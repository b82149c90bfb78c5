use serde::{Deserialize, Serialize};

use super::quad::Linear;
use super::Real;
use crate::error::{invalid, Error, Result};

/// Uniform grid `x0 + k h`, `0 <= k < n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    pub x0: T,
    pub h: T,
    pub n: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(x0: T, h: T, n: usize) -> Result<Self> {
        if !(h > T::zero()) || !h.is_finite() || !x0.is_finite() {
            return Err(invalid("grid step must be positive and finite"));
        }
        if n < 2 {
            return Err(Error::GridTooSmall { n, min: 2 });
        }
        Ok(Self { x0, h, n })
    }

    /// Grid from `x0` to `x1` with step as close to `h` as an integer
    /// number of intervals allows.
    pub fn span(x0: T, x1: T, h: T) -> Result<Self> {
        if !(x1 > x0) {
            return Err(invalid("grid span must be nonempty"));
        }
        let intervals = ((x1 - x0) / h).round().to_usize().unwrap_or(0).max(1);
        Self::new(x0, (x1 - x0) / T::of_usize(intervals), intervals + 1)
    }

    pub fn node(&self, k: usize) -> T {
        self.x0 + self.h * T::of_usize(k)
    }

    pub fn end(&self) -> T {
        self.node(self.n - 1)
    }

    pub fn nodes(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n).map(move |k| self.node(k))
    }

    pub fn contains(&self, x: T) -> bool {
        let tol = self.h * T::lit(1e-9);
        x >= self.x0 - tol && x <= self.end() + tol
    }

    pub fn check_contains(&self, x: T) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfGrid {
                x: x.to_f64_lossy(),
                lo: self.x0.to_f64_lossy(),
                hi: self.end().to_f64_lossy(),
            })
        }
    }

    /// Index of the last node not to the right of `x` (clamped).
    pub fn floor_index(&self, x: T) -> usize {
        let s = ((x - self.x0) / self.h + T::lit(1e-9)).floor();
        s.to_usize().unwrap_or(0).min(self.n - 1)
    }

    /// Sub-grid made of the first `n` nodes.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        Self::new(self.x0, self.h, n.min(self.n))
    }
}

/// Linear interpolation of grid samples; zero outside the grid.
pub fn interp_linear<T: Real, V: Linear<T>>(grid: &Grid<T>, samples: &[V], x: T) -> V {
    let zero = samples[0].zero_like();
    let s = (x - grid.x0) / grid.h;
    let last = T::of_usize(grid.n - 1);
    let tol = T::lit(1e-9);
    if s < -tol || s > last + tol {
        return zero;
    }
    let s = s.max(T::zero()).min(last);
    let k = s.floor().to_usize().unwrap_or(0).min(grid.n - 2);
    let w = s - T::of_usize(k);
    let mut out = samples[k].clone();
    out.scale_mut(T::one() - w);
    out.axpy(w, &samples[k + 1]);
    out
}

/// Four-point Lagrange interpolation of grid samples, shifted inward near
/// the ends; linear when the grid has fewer than four nodes. Points
/// outside the grid are clamped to it.
pub fn interp_cubic<T: Real, V: Linear<T>>(grid: &Grid<T>, samples: &[V], x: T) -> V {
    if grid.n < 4 {
        return interp_linear(grid, samples, x.max(grid.x0).min(grid.end()));
    }
    let s = ((x - grid.x0) / grid.h).max(T::zero()).min(T::of_usize(grid.n - 1));
    let k = s.floor().to_usize().unwrap_or(0).min(grid.n - 2);
    let first = k.saturating_sub(1).min(grid.n - 4);
    let t = s - T::of_usize(first);
    let mut out = samples[0].zero_like();
    for i in 0..4 {
        let mut w = T::one();
        for j in 0..4 {
            if j != i {
                w *= (t - T::of_usize(j)) / (T::of_usize(i) - T::of_usize(j));
            }
        }
        out.axpy(w, &samples[first + i]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_interpolation_is_exact_on_cubics() {
        let g = Grid::new(-1.0, 0.25, 9).unwrap();
        let f = |x: f64| 2.0 * x * x * x - x + 0.5;
        let v: Vec<f64> = g.nodes().map(f).collect();
        for x in [-1.0, -0.9, -0.1, 0.33, 0.99, 1.0] {
            assert!((interp_cubic(&g, &v, x) - f(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn linear_interpolation_vanishes_outside() {
        let g = Grid::new(0.0, 1.0, 3).unwrap();
        let v = [1.0, 2.0, 3.0];
        assert_eq!(interp_linear(&g, &v, 0.5), 1.5);
        assert_eq!(interp_linear(&g, &v, 2.5), 0.0);
        assert_eq!(interp_linear(&g, &v, -0.5), 0.0);
    }

    #[test]
    fn span_rounds_to_whole_intervals() {
        let g = Grid::<f64>::span(0.0, 1.0, 0.3).unwrap();
        assert_eq!(g.n, 4);
        assert!((g.end() - 1.0).abs() < 1e-15);
        assert!(Grid::new(0.0, 0.0, 4).is_err());
        assert!(matches!(Grid::new(0.0, 1.0, 1), Err(Error::GridTooSmall { .. })));
    }
}
