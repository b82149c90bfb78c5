use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex;

use super::Real;
use crate::error::{Error, Result};

/// Dense complex matrix.
pub type CMatrix<T> = DMatrix<Complex<T>>;

/// Largest admissible condition estimate for a matrix that gets inverted.
pub const COND_LIMIT: f64 = 1e12;

pub fn zeros<T: Real>(rows: usize, cols: usize) -> CMatrix<T> {
    CMatrix::zeros(rows, cols)
}

pub fn eye<T: Real>(n: usize) -> CMatrix<T> {
    CMatrix::identity(n, n)
}

/// `diag(I_{m1}, -I_{m2})`.
pub fn jmat<T: Real>(m1: usize, m2: usize) -> CMatrix<T> {
    let mut j = eye(m1 + m2);
    for k in m1..m1 + m2 {
        j[(k, k)] = -j[(k, k)];
    }
    j
}

pub fn adjoint<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    a.adjoint()
}

/// Copy of the `rows x cols` block starting at `(r0, c0)`.
pub fn block<T: Real>(a: &CMatrix<T>, r0: usize, c0: usize, rows: usize, cols: usize) -> CMatrix<T> {
    a.view((r0, c0), (rows, cols)).into_owned()
}

pub fn set_block<T: Real>(a: &mut CMatrix<T>, r0: usize, c0: usize, b: &CMatrix<T>) {
    a.view_mut((r0, c0), (b.nrows(), b.ncols())).copy_from(b);
}

pub fn hstack<T: Real>(parts: &[&CMatrix<T>]) -> CMatrix<T> {
    let rows = parts[0].nrows();
    let cols = parts.iter().map(|p| p.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut c0 = 0;
    for p in parts {
        set_block(&mut out, 0, c0, p);
        c0 += p.ncols();
    }
    out
}

pub fn vstack<T: Real>(parts: &[&CMatrix<T>]) -> CMatrix<T> {
    let cols = parts[0].ncols();
    let rows = parts.iter().map(|p| p.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut r0 = 0;
    for p in parts {
        set_block(&mut out, r0, 0, p);
        r0 += p.nrows();
    }
    out
}

pub fn block_diag<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    let mut out = zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    set_block(&mut out, 0, 0, a);
    set_block(&mut out, a.nrows(), a.ncols(), b);
    out
}

/// Spectral norm.
pub fn op_norm<T: Real>(a: &CMatrix<T>) -> T {
    if a.is_empty() {
        return T::zero();
    }
    if a.len() == 1 {
        return a[(0, 0)].modulus();
    }
    a.singular_values().max()
}

pub fn max_abs<T: Real>(a: &CMatrix<T>) -> T {
    a.iter().fold(T::zero(), |m, z| m.max(z.modulus()))
}

pub fn is_finite<T: Real>(a: &CMatrix<T>) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn norm1<T: Real>(a: &CMatrix<T>) -> T {
    a.column_iter()
        .map(|c| c.iter().fold(T::zero(), |s, z| s + z.modulus()))
        .fold(T::zero(), |m, s| m.max(s))
}

/// Inverse guarded by a 1-norm condition estimate.
pub fn guarded_inverse<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    let singular = |cond: f64| Error::SingularDenominator { cond };
    if !is_finite(a) {
        return Err(Error::NonFinite("matrix inversion"));
    }
    let inv = a.clone().lu().try_inverse().ok_or(singular(f64::INFINITY))?;
    let cond = (norm1(a) * norm1(&inv)).to_f64_lossy();
    if !cond.is_finite() || cond > COND_LIMIT {
        return Err(singular(cond));
    }
    Ok(inv)
}

/// `a^{-1} b` with the same guard as [`guarded_inverse`].
pub fn guarded_solve<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    Ok(guarded_inverse(a)? * b)
}

/// Smallest eigenvalue of the Hermitian part of `a`.
pub fn hermitian_min_eigenvalue<T: Real>(a: &CMatrix<T>) -> T {
    let h = (a + a.adjoint()).map(|z| z * Complex::new(T::lit(0.5), T::zero()));
    if h.len() == 1 {
        return h[(0, 0)].re;
    }
    h.symmetric_eigenvalues().min()
}
