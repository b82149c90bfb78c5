use nalgebra::ComplexField;
use num_complex::Complex;

use super::grid::Grid;
use super::matrix::{zeros, CMatrix};
use super::Real;
use crate::error::{invalid, Result};

/// Matrix samples of a function on the horizontal line `Im z = eta`, at a
/// uniform grid of abscissae `xi` symmetric about zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSamples<T: Real> {
    pub eta: T,
    pub xi: Grid<T>,
    pub values: Vec<CMatrix<T>>,
}

impl<T: Real> LineSamples<T> {
    pub fn new(eta: T, xi: Grid<T>, values: Vec<CMatrix<T>>) -> Result<Self> {
        if !(eta > T::zero()) {
            return Err(invalid("line must lie in the upper half-plane"));
        }
        if (xi.x0 + xi.end()).abs() > xi.h * T::lit(1e-6) {
            return Err(invalid("line abscissae must be symmetric about zero"));
        }
        if values.len() != xi.n {
            return Err(invalid("one sample per abscissa required"));
        }
        let shape = values[0].shape();
        if values.iter().any(|v| v.shape() != shape) {
            return Err(invalid("line samples must share one shape"));
        }
        Ok(Self { eta, xi, values })
    }

    /// Symmetric abscissa grid on `[-a, a]` with step close to `dxi`.
    pub fn abscissae(a: T, dxi: T) -> Result<Grid<T>> {
        if !(a > T::zero()) || !(dxi > T::zero()) {
            return Err(invalid("line half-width and step must be positive"));
        }
        let half = (a / dxi).round().to_usize().unwrap_or(0).max(1);
        Grid::new(-a, a / T::of_usize(half), 2 * half + 1)
    }

    pub fn z(&self, k: usize) -> Complex<T> {
        Complex::new(self.xi.node(k), self.eta)
    }

    pub fn points(&self) -> impl Iterator<Item = Complex<T>> + '_ {
        (0..self.xi.n).map(move |k| self.z(k))
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values[0].shape()
    }

    /// Pointwise transformation of the samples.
    pub fn map(&self, f: impl Fn(Complex<T>, &CMatrix<T>) -> CMatrix<T>) -> Self {
        let values = self.values.iter().enumerate().map(|(k, v)| f(self.z(k), v)).collect();
        Self { eta: self.eta, xi: self.xi, values }
    }

    /// Coefficients `c_1, .., c_terms` of `F(z) ~ sum c_k z^{-k}` fitted to
    /// the two end samples (`terms` is 1 or 2).
    pub fn laurent_tail(&self, terms: usize) -> Vec<CMatrix<T>> {
        let (zp, zm) = (self.z(self.xi.n - 1), self.z(0));
        let (fp, fm) = (&self.values[self.xi.n - 1], &self.values[0]);
        match terms {
            0 => Vec::new(),
            1 => {
                let half = Complex::new(T::lit(0.5), T::zero());
                vec![(fp * zp + fm * zm) * half]
            }
            _ => {
                let gp = fp * (zp * zp);
                let gm = fm * (zm * zm);
                let c1 = (&gp - &gm) / (zp - zm);
                let c2 = gp - &c1 * zp;
                vec![c1, c2]
            }
        }
    }

    /// `T[F](x) = e^{eta x} int e^{-i xi x} F(xi + i eta) d xi` for `x >= 0`,
    /// which equals the contour integral of `e^{-izx} F(z)` along the line.
    ///
    /// The terms `poles[k] z^{-(k+1)}` are removed before the trapezoid sum
    /// and their exact transforms added back, so a slowly decaying `F` with
    /// known leading Laurent coefficients is handled accurately.
    pub fn transform(&self, xs: &[T], poles: &[CMatrix<T>]) -> Vec<CMatrix<T>> {
        let (rows, cols) = self.shape();
        let n = self.xi.n;
        let dxi = self.xi.h;
        let mut g: Vec<Complex<T>> = Vec::with_capacity(n * rows * cols);
        for k in 0..n {
            let z = self.z(k);
            let inv = Complex::new(T::one(), T::zero()) / z;
            let mut v = self.values[k].clone();
            let mut p = inv;
            for c in poles {
                v -= c * p;
                p *= inv;
            }
            let w = if k == 0 || k == n - 1 { dxi * T::lit(0.5) } else { dxi };
            g.extend(v.transpose().iter().map(|e| *e * w));
        }
        let block = rows * cols;
        xs.iter()
            .map(|&x| {
                let step = Complex::new(T::zero(), -dxi * x).exp();
                let mut phase = Complex::new(T::zero(), -self.xi.x0 * x).exp();
                let mut acc = vec![Complex::new(T::zero(), T::zero()); block];
                for k in 0..n {
                    let gk = &g[k * block..(k + 1) * block];
                    for (a, v) in acc.iter_mut().zip(gk) {
                        *a += *v * phase;
                    }
                    phase *= step;
                }
                let scale = (self.eta * x).exp();
                let mut out = zeros(rows, cols);
                for r in 0..rows {
                    for c in 0..cols {
                        out[(r, c)] = acc[r * cols + c] * scale;
                    }
                }
                for (j, c) in poles.iter().enumerate() {
                    out += c * pole_transform(j + 1, x);
                }
                out
            })
            .collect()
    }
}

/// Exact line transform of `z^{-k}` for `x >= 0` (right limit at `x = 0`):
/// `-2 pi i (-i x)^{k-1} / (k-1)!`.
pub fn pole_transform<T: Real>(k: usize, x: T) -> Complex<T> {
    let mut v = Complex::new(T::zero(), -T::two_pi());
    let mix = Complex::new(T::zero(), -x);
    for j in 1..k {
        v = v * mix / T::of_usize(j);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c;

    fn line(f: impl Fn(Complex<f64>) -> Complex<f64>, eta: f64, a: f64, dxi: f64) -> LineSamples<f64> {
        let xi = LineSamples::abscissae(a, dxi).unwrap();
        let values = (0..xi.n)
            .map(|k| CMatrix::from_element(1, 1, f(Complex::new(xi.node(k), eta))))
            .collect();
        LineSamples::new(eta, xi, values).unwrap()
    }

    #[test]
    fn pole_transforms() {
        assert!((pole_transform::<f64>(1, 0.7) - c(0.0, -2.0 * std::f64::consts::PI)).norm() < 1e-14);
        assert!((pole_transform::<f64>(2, 0.7) - c(-2.0 * std::f64::consts::PI * 0.7, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn transform_of_shifted_pole() {
        // F = 1/(z + i): residue at -i gives -2 pi i e^{-x}
        let l = line(|z| Complex::new(1.0, 0.0) / (z + Complex::new(0.0, 1.0)), 1.0, 200.0, 0.05);
        let tail = l.laurent_tail(2);
        assert!((tail[0][(0, 0)] - c(1.0, 0.0)).norm() < 1e-4);
        let xs = [0.1, 0.5, 1.0, 2.0];
        for (x, v) in xs.iter().zip(l.transform(&xs, &tail)) {
            let exact = c::<f64>(0.0, -2.0 * std::f64::consts::PI) * (-x).exp();
            assert!((v[(0, 0)] - exact).norm() < 1e-5, "x={x}");
        }
    }

    #[test]
    fn tail_fit_recovers_two_terms() {
        let l = line(|z| c::<f64>(0.3, 0.0) / z + c::<f64>(0.0, 2.0) / (z * z), 1.0, 50.0, 0.1);
        let t = l.laurent_tail(2);
        assert!((t[0][(0, 0)] - c(0.3, 0.0)).norm() < 1e-12);
        assert!((t[1][(0, 0)] - c(0.0, 2.0)).norm() < 1e-10);
    }
}
