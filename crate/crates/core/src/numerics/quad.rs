use num_complex::Complex;

use super::{CMatrix, Real};
use crate::error::{Error, Result};

/// Values that can be combined linearly with real coefficients.
pub trait Linear<T>: Clone {
    fn zero_like(&self) -> Self;
    /// `self += a * x`
    fn axpy(&mut self, a: T, x: &Self);
    fn scale_mut(&mut self, a: T);
}

impl<T: Real> Linear<T> for T {
    fn zero_like(&self) -> Self {
        T::zero()
    }
    fn axpy(&mut self, a: T, x: &Self) {
        *self += a * *x;
    }
    fn scale_mut(&mut self, a: T) {
        *self *= a;
    }
}

impl<T: Real> Linear<T> for Complex<T> {
    fn zero_like(&self) -> Self {
        Complex::new(T::zero(), T::zero())
    }
    fn axpy(&mut self, a: T, x: &Self) {
        self.re += a * x.re;
        self.im += a * x.im;
    }
    fn scale_mut(&mut self, a: T) {
        self.re *= a;
        self.im *= a;
    }
}

impl<T: Real> Linear<T> for CMatrix<T> {
    fn zero_like(&self) -> Self {
        CMatrix::zeros(self.nrows(), self.ncols())
    }
    fn axpy(&mut self, a: T, x: &Self) {
        self.zip_apply(x, |s, v| {
            s.re += a * v.re;
            s.im += a * v.im;
        });
    }
    fn scale_mut(&mut self, a: T) {
        self.apply(|s| {
            s.re *= a;
            s.im *= a;
        });
    }
}

/// Composite trapezoid rule over uniformly spaced samples.
pub fn trapezoid<T: Real, V: Linear<T>>(values: &[V], h: T) -> V {
    let Some(first) = values.first() else {
        panic!("trapezoid of an empty sample set");
    };
    let mut acc = first.zero_like();
    let n = values.len();
    if n < 2 {
        return acc;
    }
    let half = T::lit(0.5);
    for (k, v) in values.iter().enumerate() {
        let w = if k == 0 || k == n - 1 { half * h } else { h };
        acc.axpy(w, v);
    }
    acc
}

/// Running trapezoid integral, starting at zero.
pub fn cumulative_trapezoid<T: Real, V: Linear<T>>(values: &[V], h: T) -> Vec<V> {
    let mut out = Vec::with_capacity(values.len());
    let Some(first) = values.first() else {
        return out;
    };
    let mut acc = first.zero_like();
    out.push(acc.clone());
    let hh = T::lit(0.5) * h;
    for w in values.windows(2) {
        acc.axpy(hh, &w[0]);
        acc.axpy(hh, &w[1]);
        out.push(acc.clone());
    }
    out
}

/// Second-order central differences with one-sided stencils at both ends.
pub fn central_diff<T: Real, V: Linear<T>>(values: &[V], h: T) -> Result<Vec<V>> {
    let n = values.len();
    if n < 3 {
        return Err(Error::GridTooSmall { n, min: 3 });
    }
    let inv2h = T::one() / (T::lit(2.0) * h);
    let mut out = Vec::with_capacity(n);
    let edge = |a: &V, b: &V, c: &V, sign: T| {
        let mut d = a.zero_like();
        d.axpy(-T::lit(3.0) * inv2h * sign, a);
        d.axpy(T::lit(4.0) * inv2h * sign, b);
        d.axpy(-inv2h * sign, c);
        d
    };
    out.push(edge(&values[0], &values[1], &values[2], T::one()));
    for k in 1..n - 1 {
        let mut d = values[k + 1].clone();
        d.axpy(-T::one(), &values[k - 1]);
        d.scale_mut(inv2h);
        out.push(d);
    }
    out.push(edge(&values[n - 1], &values[n - 2], &values[n - 3], -T::one()));
    Ok(out)
}

/// Fourth-order differences: five-point central stencil inside, one-sided
/// five-point stencils at the two nodes next to each end.
///
/// Used where the result is differentiated again, since the second-order
/// end stencils leave an `O(h^2)` kink in the error that a further
/// difference turns into `O(h)`.
pub fn central_diff4<T: Real, V: Linear<T>>(values: &[V], h: T) -> Result<Vec<V>> {
    let n = values.len();
    if n < 5 {
        return central_diff(values, h);
    }
    let inv = T::one() / (T::lit(12.0) * h);
    let combo = |idx: [usize; 5], w: [f64; 5], sign: T| {
        let mut d = values[0].zero_like();
        for (i, wi) in idx.iter().zip(w) {
            d.axpy(T::lit(wi) * inv * sign, &values[*i]);
        }
        d
    };
    let e0 = [-25.0, 48.0, -36.0, 16.0, -3.0];
    let e1 = [-3.0, -10.0, 18.0, -6.0, 1.0];
    let mut out = Vec::with_capacity(n);
    out.push(combo([0, 1, 2, 3, 4], e0, T::one()));
    out.push(combo([0, 1, 2, 3, 4], e1, T::one()));
    for k in 2..n - 2 {
        out.push(combo([k - 2, k - 1, k + 1, k + 2, k], [1.0, -8.0, 8.0, -1.0, 0.0], T::one()));
    }
    let r = |j: usize| n - 1 - j;
    out.push(combo([r(0), r(1), r(2), r(3), r(4)], e1, -T::one()));
    out.push(combo([r(0), r(1), r(2), r(3), r(4)], e0, -T::one()));
    Ok(out)
}

/// Finite-difference weights (Fornberg's recursion): `w[j][k]` is the
/// weight of node `x[j]` in the `k`-th derivative at `z`, for `k <= m`.
pub fn fd_weights<T: Real>(z: T, x: &[T], m: usize) -> Vec<Vec<T>> {
    let n = x.len();
    let mut w = vec![vec![T::zero(); m + 1]; n];
    if n == 0 {
        return w;
    }
    w[0][0] = T::one();
    let mut c1 = T::one();
    let mut c4 = x[0] - z;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    w[i][k] = c1 * (T::of_usize(k) * w[i - 1][k - 1] - c5 * w[i - 1][k]) / c2;
                }
                w[i][0] = -c1 * c5 * w[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                w[j][k] = (c4 * w[j][k] - T::of_usize(k) * w[j][k - 1]) / c3;
            }
            w[j][0] = c4 * w[j][0] / c3;
        }
        c1 = c2;
    }
    w
}

/// `deriv`-th derivative of uniformly spaced samples from `width`-point
/// stencils, centered where possible and shifted inward near the ends.
pub fn uniform_derivative<T: Real, V: Linear<T>>(values: &[V], h: T, deriv: usize, width: usize) -> Result<Vec<V>> {
    let n = values.len();
    if width <= deriv || n < width {
        return Err(Error::GridTooSmall { n, min: width.max(deriv + 1) });
    }
    let scale = T::one() / h.powi(deriv as i32);
    let mut cache: Vec<Option<Vec<T>>> = vec![None; width];
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let start = k.saturating_sub(width / 2).min(n - width);
        let shift = k - start;
        let w = cache[shift].get_or_insert_with(|| {
            let nodes: Vec<T> = (0..width).map(|i| T::of_usize(i) - T::of_usize(shift)).collect();
            fd_weights(T::zero(), &nodes, deriv).into_iter().map(|row| row[deriv] * scale).collect()
        });
        let mut d = values[k].zero_like();
        for (i, wi) in w.iter().enumerate() {
            d.axpy(*wi, &values[start + i]);
        }
        out.push(d);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_of_constant_is_length() {
        let v = vec![1.0f64; 101];
        assert!((trapezoid(&v, 0.01) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_of_square() {
        let h = 0.01;
        let v: Vec<f64> = (0..=100).map(|k| (k as f64 * h).powi(2)).collect();
        let err = (trapezoid(&v, h) - 1.0 / 3.0).abs();
        // composite error is h^2/6 for x^2 on [0,1]
        assert!(err < 2e-5);
        assert!((err - h * h / 6.0).abs() < 1e-12);
    }

    #[test]
    fn central_diff_is_exact_on_linear_data() {
        let h = 0.1;
        let v: Vec<f64> = (0..7).map(|k| 3.0 * k as f64 * h - 1.0).collect();
        for d in central_diff(&v, h).unwrap() {
            assert!((d - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn central_diff_is_exact_on_quadratics() {
        let h = 0.25;
        let v: Vec<f64> = (0..6).map(|k| (k as f64 * h).powi(2)).collect();
        for (k, d) in central_diff(&v, h).unwrap().iter().enumerate() {
            assert!((d - 2.0 * k as f64 * h).abs() < 1e-12);
        }
    }

    #[test]
    fn central_diff_needs_three_nodes() {
        assert_eq!(
            central_diff(&[1.0f64, 2.0], 0.1),
            Err(Error::GridTooSmall { n: 2, min: 3 })
        );
    }

    #[test]
    fn fourth_order_is_exact_on_quartics() {
        let h = 0.1;
        let v: Vec<f64> = (0..9).map(|k| (k as f64 * h).powi(4) - (k as f64 * h)).collect();
        for (k, d) in central_diff4(&v, h).unwrap().iter().enumerate() {
            let x = k as f64 * h;
            assert!((d - (4.0 * x.powi(3) - 1.0)).abs() < 1e-12, "node {k}");
        }
    }

    #[test]
    fn cumulative_matches_total() {
        let v: Vec<f64> = (0..11).map(|k| (k as f64 * 0.1).sin()).collect();
        let c = cumulative_trapezoid(&v, 0.1);
        assert!((c[10] - trapezoid(&v, 0.1)).abs() < 1e-15);
        assert_eq!(c[0], 0.0);
    }

    #[test]
    fn fornberg_reproduces_classic_stencils() {
        let x = [-1.0f64, 0.0, 1.0];
        let w = fd_weights(0.0, &x, 2);
        let d1: Vec<f64> = w.iter().map(|r| r[1]).collect();
        let d2: Vec<f64> = w.iter().map(|r| r[2]).collect();
        assert_eq!(d1, vec![-0.5, 0.0, 0.5]);
        assert_eq!(d2, vec![1.0, -2.0, 1.0]);
    }

    #[test]
    fn third_derivative_is_exact_on_sextics() {
        let h = 0.1;
        let v: Vec<f64> = (0..12).map(|k| (k as f64 * h).powi(6) - (k as f64 * h).powi(3)).collect();
        for (k, d) in uniform_derivative(&v, h, 3, 7).unwrap().iter().enumerate() {
            let x = k as f64 * h;
            assert!((d - (120.0 * x.powi(3) - 6.0)).abs() < 1e-8, "k={k}");
        }
        assert!(uniform_derivative(&v[..5], h, 3, 7).is_err());
    }
}
