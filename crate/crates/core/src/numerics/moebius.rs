use super::matrix::{block, guarded_inverse, set_block, zeros, CMatrix};
use super::Real;
use crate::error::{invalid, Result};

/// Linear-fractional map `phi -> (R21 + R22 phi)(R11 + R12 phi)^{-1}`
/// given by the 2x2 block partition of an `m x m` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MoebiusMap<T: Real> {
    pub r11: CMatrix<T>,
    pub r12: CMatrix<T>,
    pub r21: CMatrix<T>,
    pub r22: CMatrix<T>,
}

impl<T: Real> MoebiusMap<T> {
    pub fn new(r11: CMatrix<T>, r12: CMatrix<T>, r21: CMatrix<T>, r22: CMatrix<T>) -> Result<Self> {
        let (m1, m2) = (r11.nrows(), r22.nrows());
        let ok = r11.shape() == (m1, m1)
            && r12.shape() == (m1, m2)
            && r21.shape() == (m2, m1)
            && r22.shape() == (m2, m2);
        if !ok {
            return Err(invalid("inconsistent Moebius block sizes"));
        }
        Ok(Self { r11, r12, r21, r22 })
    }

    /// Splits a square matrix after its first `m1` rows and columns.
    pub fn from_matrix(r: &CMatrix<T>, m1: usize) -> Result<Self> {
        let m = r.nrows();
        if r.ncols() != m || m1 == 0 || m1 >= m {
            return Err(invalid("Moebius matrix must be square with 0 < m1 < m"));
        }
        let m2 = m - m1;
        Ok(Self {
            r11: block(r, 0, 0, m1, m1),
            r12: block(r, 0, m1, m1, m2),
            r21: block(r, m1, 0, m2, m1),
            r22: block(r, m1, m1, m2, m2),
        })
    }

    pub fn identity(m1: usize, m2: usize) -> Self {
        Self {
            r11: CMatrix::identity(m1, m1),
            r12: zeros(m1, m2),
            r21: zeros(m2, m1),
            r22: CMatrix::identity(m2, m2),
        }
    }

    pub fn m1(&self) -> usize {
        self.r11.nrows()
    }

    pub fn m2(&self) -> usize {
        self.r22.nrows()
    }

    pub fn to_matrix(&self) -> CMatrix<T> {
        let m1 = self.m1();
        let mut r = zeros(m1 + self.m2(), m1 + self.m2());
        set_block(&mut r, 0, 0, &self.r11);
        set_block(&mut r, 0, m1, &self.r12);
        set_block(&mut r, m1, 0, &self.r21);
        set_block(&mut r, m1, m1, &self.r22);
        r
    }

    /// Map of the block product `self * other`; applying it equals applying
    /// `other` first and then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        Self::from_matrix(&(self.to_matrix() * other.to_matrix()), self.m1())
            .expect("compatible block sizes")
    }

    pub fn apply(&self, phi0: &CMatrix<T>) -> Result<CMatrix<T>> {
        moebius_apply(self, phi0)
    }
}

/// `(R21 + R22 phi0)(R11 + R12 phi0)^{-1}`.
pub fn moebius_apply<T: Real>(map: &MoebiusMap<T>, phi0: &CMatrix<T>) -> Result<CMatrix<T>> {
    if phi0.shape() != (map.m2(), map.m1()) {
        return Err(invalid("phi0 has the wrong shape for this map"));
    }
    let den = &map.r11 + &map.r12 * phi0;
    let num = &map.r21 + &map.r22 * phi0;
    Ok(num * guarded_inverse(&den)?)
}
