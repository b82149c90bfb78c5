//! Weyl and generalized Weyl (GW) functions: Weyl-disk points, truncation
//! limits, defining criteria and the Herglotz convention.

use nalgebra::ComplexField;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dirac::{propagate, propagate_at, DiracPotential, Stepping, SystemKind};
use crate::error::{invalid, Error, Result};
use crate::numerics::{
    block, eye, guarded_inverse, guarded_solve, hermitian_min_eigenvalue, jmat, op_norm, par_map, vstack, zeros,
    CMatrix, Grid, LineSamples, Real, COND_LIMIT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    #[serde(rename = "phi")]
    Phi,
    #[serde(rename = "phiH")]
    PhiH,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeylSample<T: Real> {
    pub z: Complex<T>,
    pub phi: CMatrix<T>,
    pub residual: T,
}

/// Samples of a Weyl-type function in the half-plane `Im z > offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylTable<T: Real> {
    pub m1: usize,
    pub m2: usize,
    pub convention: Convention,
    pub offset: T,
    pub samples: Vec<WeylSample<T>>,
}

impl<T: Real> WeylTable<T> {
    pub fn new(m1: usize, m2: usize, convention: Convention, offset: T, samples: Vec<WeylSample<T>>) -> Result<Self> {
        if offset < T::zero() {
            return Err(invalid("half-plane offset must be nonnegative"));
        }
        for s in &samples {
            if s.phi.shape() != (m2, m1) {
                return Err(invalid("Weyl samples must be m2 x m1"));
            }
            if !(s.z.im > offset) {
                return Err(invalid("sample outside the declared half-plane"));
            }
        }
        Ok(Self { m1, m2, convention, offset, samples })
    }

    /// Largest singular value over all samples.
    pub fn max_singular_value(&self) -> T {
        self.samples.iter().map(|s| op_norm(&s.phi)).fold(T::zero(), T::max)
    }

    /// The samples as a line function, if they lie on one horizontal line
    /// at uniformly spaced, symmetric abscissae.
    pub fn to_line(&self) -> Result<LineSamples<T>> {
        let n = self.samples.len();
        if n < 3 {
            return Err(invalid("a line needs at least three samples"));
        }
        let eta = self.samples[0].z.im;
        let x0 = self.samples[0].z.re;
        let h = self.samples[1].z.re - x0;
        let tol = h.abs() * T::lit(1e-6);
        for (k, s) in self.samples.iter().enumerate() {
            if (s.z.im - eta).abs() > tol || (s.z.re - x0 - h * T::of_usize(k)).abs() > tol {
                return Err(invalid("samples do not lie on a uniform horizontal line"));
            }
        }
        let grid = Grid::new(x0, h, n)?;
        LineSamples::new(eta, grid, self.samples.iter().map(|s| s.phi.clone()).collect())
    }

    pub fn from_line(line: &LineSamples<T>, convention: Convention, offset: T, residuals: &[T]) -> Result<Self> {
        let (m2, m1) = line.shape();
        let samples = line
            .values
            .iter()
            .enumerate()
            .map(|(k, phi)| WeylSample { z: line.z(k), phi: phi.clone(), residual: residuals.get(k).copied().unwrap_or(T::zero()) })
            .collect();
        Self::new(m1, m2, convention, offset, samples)
    }
}

/// Tall `m x m1` matrix with `P* P > 0` and `P* j P >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyJMatrix<T: Real> {
    p: CMatrix<T>,
}

impl<T: Real> PropertyJMatrix<T> {
    pub fn new(p: CMatrix<T>, m1: usize, m2: usize) -> Result<Self> {
        if p.shape() != (m1 + m2, m1) {
            return Err(invalid("property-j matrix must be m x m1"));
        }
        let tol = T::lit(1e-12);
        let gram = p.adjoint() * &p;
        if !(hermitian_min_eigenvalue(&gram) > tol) {
            return Err(invalid("P* P is not positive definite"));
        }
        let jform = p.adjoint() * jmat::<T>(m1, m2) * &p;
        if hermitian_min_eigenvalue(&jform) < -tol * (T::one() + op_norm(&gram)) {
            return Err(invalid("P* j P is not positive semidefinite"));
        }
        Ok(Self { p })
    }

    /// `[I; 0]`.
    pub fn standard(m1: usize, m2: usize) -> Self {
        Self { p: vstack(&[&eye(m1), &zeros(m2, m1)]) }
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.p
    }
}

/// `[0 I] W(b)^{-1} P ([I 0] W(b)^{-1} P)^{-1}` for the selfadjoint system.
pub fn weyl_disk_point<T: Real>(pot: &DiracPotential<T>, b: T, z: Complex<T>, p: &PropertyJMatrix<T>) -> Result<CMatrix<T>> {
    if pot.kind() != SystemKind::SelfAdjoint {
        return Err(Error::WrongKind { expected: "selfadjoint" });
    }
    if !(z.im > T::zero()) {
        return Err(invalid("Weyl disks need Im z > 0"));
    }
    let (m1, m2) = (pot.m1(), pot.m2());
    if p.matrix().nrows() != m1 + m2 {
        return Err(invalid("property-j matrix does not fit the potential"));
    }
    let b = clamp_to_grid(pot.grid(), b)?;
    let winv = propagate_at(pot, z, &[b], true, &Stepping::default())?.remove(0);
    let q = winv * p.matrix();
    let den = block(&q, 0, 0, m1, m1);
    let num = block(&q, m1, 0, m2, m1);
    Ok(num * guarded_inverse(&den)?)
}

/// Truncation points beyond the grid act as the grid end: the potential
/// vanishes there and the solution continues freely.
fn clamp_to_grid<T: Real>(grid: &Grid<T>, b: T) -> Result<T> {
    if !(b > grid.x0) {
        return Err(invalid("truncation point must lie to the right of x0"));
    }
    Ok(b.min(grid.end()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationConfig<T> {
    pub b_schedule: Vec<T>,
    pub tol: T,
    pub stepping: Stepping<T>,
}

impl<T: Real> Default for TruncationConfig<T> {
    fn default() -> Self {
        Self { b_schedule: vec![T::lit(5.0), T::lit(10.0), T::lit(20.0)], tol: T::lit(1e-6), stepping: Stepping::default() }
    }
}

impl<T: Real> TruncationConfig<T> {
    pub fn with_schedule(b_schedule: Vec<T>) -> Self {
        Self { b_schedule, ..Self::default() }
    }
}

/// Raised when a GW estimate is requested at or below the bound `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlaneWarning<T> {
    pub im_z: T,
    pub bound: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeylEstimate<T: Real> {
    pub phi: CMatrix<T>,
    pub residual: T,
    pub history: Vec<(T, CMatrix<T>)>,
    pub warning: Option<HalfPlaneWarning<T>>,
}

/// `-u22(b)^{-1} u21(b)` for every `b` in the schedule.
pub fn weyl_by_truncation<T: Real>(pot: &DiracPotential<T>, z: Complex<T>, config: &TruncationConfig<T>) -> Result<WeylEstimate<T>> {
    let est = truncation_history(pot, z, config)?;
    if est.residual > config.tol {
        return Err(Error::NotConverged { residual: est.residual.to_f64_lossy(), tol: config.tol.to_f64_lossy() });
    }
    Ok(est)
}

/// As [`weyl_by_truncation`] but without the convergence verdict.
pub fn truncation_history<T: Real>(pot: &DiracPotential<T>, z: Complex<T>, config: &TruncationConfig<T>) -> Result<WeylEstimate<T>> {
    let mut warning = None;
    match pot.kind() {
        SystemKind::SelfAdjoint => {
            if !(z.im > T::zero()) {
                return Err(invalid("Weyl functions need Im z > 0"));
            }
        }
        SystemKind::Skew => {
            let bound = pot.sup_norm();
            if !(z.im > bound) {
                warning = Some(HalfPlaneWarning { im_z: z.im, bound });
            }
        }
        SystemKind::NWave => return Err(Error::WrongKind { expected: "selfadjoint or skew" }),
    }
    let schedule = &config.b_schedule;
    if schedule.is_empty() || schedule.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("b schedule must be nonempty and increasing"));
    }
    let bs: Vec<T> = schedule.iter().map(|&b| clamp_to_grid(pot.grid(), b)).collect::<Result<_>>()?;
    let us = propagate_at(pot, z, &bs, false, &config.stepping)?;
    let (m1, m2) = (pot.m1(), pot.m2());
    let mut history = Vec::with_capacity(us.len());
    for (b, u) in schedule.iter().zip(&us) {
        let u21 = block(u, m1, 0, m2, m1);
        let u22 = block(u, m1, m1, m2, m2);
        history.push((*b, -guarded_solve(&u22, &u21)?));
    }
    let n = history.len();
    let residual = if n > 1 { op_norm(&(&history[n - 1].1 - &history[n - 2].1)) } else { T::zero() };
    Ok(WeylEstimate { phi: history[n - 1].1.clone(), residual, history, warning })
}

/// Samples of the truncation estimate on `Im z = eta`, `|Re z| <= a`.
/// Returns the line and the per-sample residuals. Work is split over
/// `workers` threads; the result does not depend on the split.
pub fn sample_line<T: Real + Send + Sync>(
    pot: &DiracPotential<T>,
    eta: T,
    a: T,
    dxi: T,
    config: &TruncationConfig<T>,
    workers: usize,
) -> Result<(LineSamples<T>, Vec<T>)> {
    let xi = LineSamples::abscissae(a, dxi)?;
    let n = xi.n;
    let eval = |k: usize| -> Result<(CMatrix<T>, T)> {
        let est = weyl_by_truncation(pot, Complex::new(xi.node(k), eta), config)?;
        Ok((est.phi, est.residual))
    };
    let results = par_map(n, workers, eval);
    let mut values = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for r in results {
        let (phi, res) = r?;
        values.push(phi);
        residuals.push(res);
    }
    Ok((LineSamples::new(eta, xi, values)?, residuals))
}

/// `sup_{x <= l} ||e^{-izx} u(x, z) [I; phi]||` over grid nodes.
pub fn gw_criterion<T: Real>(pot: &DiracPotential<T>, phi: &CMatrix<T>, z: Complex<T>, l: T) -> Result<T> {
    if !(z.im > T::zero()) {
        return Err(invalid("GW criterion needs Im z > 0"));
    }
    let (m1, m2) = (pot.m1(), pot.m2());
    if phi.shape() != (m2, m1) {
        return Err(invalid("phi must be m2 x m1"));
    }
    let col = vstack(&[&eye(m1), phi]);
    let l = l.min(pot.grid().end());
    let sol = propagate(pot, z, l)?;
    let mut sup = T::zero();
    for (k, u) in sol.samples.iter().enumerate() {
        let x = sol.grid.node(k);
        let w = (u * &col) * (Complex::new(T::zero(), -x) * z).exp();
        sup = sup.max(op_norm(&w));
    }
    Ok(sup)
}

/// Unit upper triangular `phi` making `u(b, z) phi` lower triangular, the
/// finite-`b` realization of the N-wave growth condition.
pub fn nwave_gw_by_truncation<T: Real>(pot: &DiracPotential<T>, z: Complex<T>, b: T) -> Result<CMatrix<T>> {
    if pot.kind() != SystemKind::NWave {
        return Err(Error::WrongKind { expected: "nwave" });
    }
    let bound = pot.sup_norm();
    if !(z.im < -bound) {
        return Err(invalid("N-wave GW functions need Im z < -M"));
    }
    let b = clamp_to_grid(pot.grid(), b)?;
    let u = propagate_at(pot, z, &[b], false, &Stepping::default())?.remove(0);
    unit_upper_factor(&u)
}

/// Unit upper triangular `phi` with `a phi` lower triangular.
pub(crate) fn unit_upper_factor<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    let m = a.nrows();
    let mut phi = eye::<T>(m);
    for k in 1..m {
        let lead = block(a, 0, 0, k, k);
        let rhs = block(a, 0, k, k, 1);
        let col = guarded_solve(&lead, &rhs).map_err(|_| Error::SingularFactor { column: k })?;
        for r in 0..k {
            phi[(r, k)] = -col[(r, 0)];
        }
    }
    Ok(phi)
}

/// `phi_H = i (I - phi)^{-1} (I + phi)`.
pub fn herglotz_from_weyl<T: Real>(phi: &CMatrix<T>) -> Result<CMatrix<T>> {
    let k = square(phi)?;
    let id = eye::<T>(k);
    let iu = Complex::new(T::zero(), T::one());
    Ok(guarded_solve(&(&id - phi), &(&id + phi))? * iu)
}

/// `phi = -(I + i phi_H)(I - i phi_H)^{-1}`.
pub fn weyl_from_herglotz<T: Real>(phi_h: &CMatrix<T>) -> Result<CMatrix<T>> {
    let k = square(phi_h)?;
    let id = eye::<T>(k);
    let iu = Complex::new(T::zero(), T::one());
    let num = &id + phi_h * iu;
    let den = &id - phi_h * iu;
    Ok(-(num * guarded_inverse(&den)?))
}

fn square<T: Real>(a: &CMatrix<T>) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(invalid("Herglotz conversion needs square matrices"));
    }
    Ok(a.nrows())
}

/// Guard threshold reexported for diagnostics.
pub const DENOMINATOR_COND_LIMIT: f64 = COND_LIMIT;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c;
    use num_complex::Complex64;

    fn scalar(v: Complex64) -> CMatrix<f64> {
        CMatrix::from_element(1, 1, v)
    }

    fn grid20(h: f64) -> Grid<f64> {
        Grid::span(0.0, 20.0, h).unwrap()
    }

    #[test]
    fn free_system_has_zero_weyl_function() {
        for kind in [SystemKind::SelfAdjoint, SystemKind::Skew] {
            let pot = DiracPotential::zero(kind, 1, 1, Grid::span(0.0, 2.0, 0.01).unwrap()).unwrap();
            let est = weyl_by_truncation(&pot, c(0.0, 1.0), &TruncationConfig::default()).unwrap();
            assert_eq!(op_norm(&est.phi), 0.0);
            assert_eq!(est.residual, 0.0);
        }
    }

    #[test]
    fn constant_potential_oracle() {
        let pot = DiracPotential::scalar(SystemKind::SelfAdjoint, grid20(0.01), |_| c(1.0, 0.0)).unwrap();
        let z = c(0.0, 1.0);
        let exact = c(0.0, 2f64.sqrt() - 1.0);
        let est = weyl_by_truncation(&pot, z, &TruncationConfig::default()).unwrap();
        assert!((est.phi[(0, 0)] - exact).norm() < 1e-6);
        let disk = weyl_disk_point(&pot, 20.0, z, &PropertyJMatrix::standard(1, 1)).unwrap();
        assert!((disk[(0, 0)] - exact).norm() < 1e-6);
    }

    #[test]
    fn disk_shrinks_with_b() {
        let pot = DiracPotential::scalar(SystemKind::SelfAdjoint, grid20(0.01), |x| c(0.5 * (-x).exp(), 0.0)).unwrap();
        let z = c(0.3, 1.0);
        let p1 = PropertyJMatrix::standard(1, 1);
        let p2 = PropertyJMatrix::new(CMatrix::from_row_slice(2, 1, &[c(1.0, 0.0), c(0.0, 0.5)]), 1, 1).unwrap();
        let gaps: Vec<f64> = [1.0, 2.0, 4.0]
            .iter()
            .map(|&b| op_norm(&(weyl_disk_point(&pot, b, z, &p1).unwrap() - weyl_disk_point(&pot, b, z, &p2).unwrap())))
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    }

    #[test]
    fn property_j_is_enforced() {
        let bad = CMatrix::from_row_slice(2, 1, &[c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(PropertyJMatrix::<f64>::new(bad, 1, 1).is_err());
    }

    #[test]
    fn gw_criterion_flags_growth() {
        let pot = DiracPotential::zero(SystemKind::Skew, 1, 1, Grid::span(0.0, 3.0, 0.01).unwrap()).unwrap();
        let z = c(0.0, 2.0);
        let ok = gw_criterion(&pot, &scalar(c(0.0, 0.0)), z, 3.0).unwrap();
        assert!((ok - 1.0).abs() < 1e-6);
        let bad = gw_criterion(&pot, &scalar(c(0.1, 0.0)), z, 3.0).unwrap();
        let expect = 0.1 * 12f64.exp();
        assert!((bad - expect).abs() < 1e-6 * expect);
    }

    #[test]
    fn nwave_free_field_gives_identity() {
        let g = Grid::span(0.0, 5.0, 0.01).unwrap();
        let pot = DiracPotential::nwave(g, vec![2.0, 1.0, 0.5], vec![CMatrix::zeros(3, 3); g.n]).unwrap();
        let phi = nwave_gw_by_truncation(&pot, c(0.3, -1.0), 5.0).unwrap();
        assert!((phi - eye::<f64>(3)).norm() < 1e-12);
    }

    #[test]
    fn herglotz_pair() {
        let phi = weyl_from_herglotz(&scalar(c(0.0, 1.0))).unwrap();
        assert!(phi.norm() < 1e-15);
        let phi = weyl_from_herglotz(&scalar(c(0.0, 2.0 / 3.0))).unwrap();
        assert!((phi[(0, 0)] - c(-0.2, 0.0)).norm() < 1e-14);
    }
}
