use super::matrix::{is_finite, CMatrix};
use super::Real;
use crate::error::{invalid, Error, Result};

/// Which side the coefficient multiplies the unknown from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `y' = A(s) y`
    Left,
    /// `y' = y A(s)`
    Right,
}

/// Classical fixed-step RK4 for a matrix linear system.
///
/// `coef(s, out)` writes the coefficient at `s` into `out`, which already
/// has the right shape. The interval `[s0, s1]` is split into `steps` equal
/// steps and `observe(k, y)` is called after each step `k = 1..=steps`.
pub fn rk4<T: Real>(
    mut coef: impl FnMut(T, &mut CMatrix<T>),
    side: Side,
    y0: &CMatrix<T>,
    s0: T,
    s1: T,
    steps: usize,
    mut observe: impl FnMut(usize, &CMatrix<T>),
) -> Result<CMatrix<T>> {
    let m = match side {
        Side::Left => y0.nrows(),
        Side::Right => y0.ncols(),
    };
    let mut y = y0.clone();
    if steps == 0 {
        return Ok(y);
    }
    let h = (s1 - s0) / T::of_usize(steps);
    let half = h * T::lit(0.5);
    let sixth = h / T::lit(6.0);
    let zero = num_complex::Complex::new(T::zero(), T::zero());

    let mut a0 = CMatrix::zeros(m, m);
    let mut am = CMatrix::zeros(m, m);
    let (rows, cols) = y.shape();
    let mut k = [(); 4].map(|_| CMatrix::zeros(rows, cols));
    let mut tmp = CMatrix::zeros(rows, cols);
    // Plain loops beat gemm dispatch for the small sizes used here.
    let mul = |out: &mut CMatrix<T>, a: &CMatrix<T>, x: &CMatrix<T>| {
        let (l, r) = match side {
            Side::Left => (a, x),
            Side::Right => (x, a),
        };
        let inner = l.ncols();
        for j in 0..out.ncols() {
            for i in 0..out.nrows() {
                let mut acc = zero;
                for p in 0..inner {
                    acc += l[(i, p)] * r[(p, j)];
                }
                out[(i, j)] = acc;
            }
        }
    };
    let combine = |tmp: &mut CMatrix<T>, y: &CMatrix<T>, k: &CMatrix<T>, w: T| {
        tmp.copy_from(y);
        tmp.zip_apply(k, |t, v| {
            t.re += w * v.re;
            t.im += w * v.im;
        });
    };

    coef(s0, &mut a0);
    for step in 0..steps {
        let s = s0 + h * T::of_usize(step);
        mul(&mut k[0], &a0, &y);
        combine(&mut tmp, &y, &k[0], half);
        coef(s + half, &mut am);
        mul(&mut k[1], &am, &tmp);
        combine(&mut tmp, &y, &k[1], half);
        mul(&mut k[2], &am, &tmp);
        combine(&mut tmp, &y, &k[2], h);
        coef(s0 + h * T::of_usize(step + 1), &mut a0);
        mul(&mut k[3], &a0, &tmp);
        let two = T::lit(2.0);
        for idx in 0..y.len() {
            let d = k[0][idx] + (k[1][idx] + k[2][idx]) * two + k[3][idx];
            y[idx] += d * sixth;
        }
        if !is_finite(&y) {
            return Err(Error::NonFinite("ode propagation"));
        }
        observe(step + 1, &y);
    }
    Ok(y)
}

/// Solution of `y' = rhs(s) y` at `s1`, with the largest uniform step not
/// exceeding `step`.
pub fn ode_propagate<T: Real>(
    mut rhs: impl FnMut(T) -> CMatrix<T>,
    y0: &CMatrix<T>,
    s0: T,
    s1: T,
    step: T,
) -> Result<CMatrix<T>> {
    if !(step > T::zero()) {
        return Err(invalid("ode step must be positive"));
    }
    let steps = step_count((s1 - s0).abs(), step);
    rk4(
        |s, out| {
            let a = rhs(s);
            out.copy_from(&a);
        },
        Side::Left,
        y0,
        s0,
        s1,
        steps,
        |_, _| {},
    )
}

pub(crate) fn step_count<T: Real>(length: T, step: T) -> usize {
    let n = (length / step - T::lit(1e-9)).ceil();
    n.to_usize().unwrap_or(1).max(1)
}
