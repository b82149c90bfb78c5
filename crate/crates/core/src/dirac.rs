//! Forward problem: normalized fundamental solutions of the selfadjoint,
//! skew-selfadjoint and N-wave auxiliary Dirac systems.

use nalgebra::ComplexField;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::{
    block, eye, interp_linear, is_finite, jmat, op_norm, rk4, CMatrix, Grid, Real, Side,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemKind {
    #[serde(rename = "sa")]
    SelfAdjoint,
    #[serde(rename = "skew")]
    Skew,
    #[serde(rename = "nwave")]
    NWave,
}

impl SystemKind {
    pub fn name(self) -> &'static str {
        match self {
            SystemKind::SelfAdjoint => "sa",
            SystemKind::Skew => "skew",
            SystemKind::NWave => "nwave",
        }
    }
}

/// Field data of the N-wave auxiliary system: `D` and the Hermitian `rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct NWaveField<T: Real> {
    pub d: Vec<T>,
    pub rho: Vec<CMatrix<T>>,
}

/// Potential sampled on a uniform grid; zero outside of it.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracPotential<T: Real> {
    kind: SystemKind,
    m1: usize,
    m2: usize,
    grid: Grid<T>,
    v: Vec<CMatrix<T>>,
    nwave: Option<NWaveField<T>>,
}

/// Step-size rule for the propagators: each grid interval is split so
/// that `|z| * step` (plus the potential size) stays below `max_phase`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stepping<T> {
    pub max_phase: T,
}

impl<T: Real> Default for Stepping<T> {
    fn default() -> Self {
        Self { max_phase: T::lit(0.5) }
    }
}

impl<T: Real> DiracPotential<T> {
    /// Selfadjoint or skew potential from its `m1 x m2` blocks `v`.
    pub fn new(kind: SystemKind, m1: usize, m2: usize, grid: Grid<T>, v: Vec<CMatrix<T>>) -> Result<Self> {
        if kind == SystemKind::NWave {
            return Err(invalid("use DiracPotential::nwave for N-wave fields"));
        }
        if m1 == 0 || m2 == 0 {
            return Err(invalid("block sizes must be positive"));
        }
        if v.len() != grid.n {
            return Err(invalid(format!("expected {} potential samples, got {}", grid.n, v.len())));
        }
        if v.iter().any(|s| s.shape() != (m1, m2)) {
            return Err(invalid("potential samples must be m1 x m2"));
        }
        if !v.iter().all(is_finite) {
            return Err(Error::NonFinite("potential samples"));
        }
        Ok(Self { kind, m1, m2, grid, v, nwave: None })
    }

    pub fn from_fn(
        kind: SystemKind,
        m1: usize,
        m2: usize,
        grid: Grid<T>,
        f: impl Fn(T) -> CMatrix<T>,
    ) -> Result<Self> {
        Self::new(kind, m1, m2, grid, grid.nodes().map(f).collect())
    }

    /// Scalar (`m1 = m2 = 1`) potential.
    pub fn scalar(kind: SystemKind, grid: Grid<T>, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        Self::from_fn(kind, 1, 1, grid, |x| CMatrix::from_element(1, 1, f(x)))
    }

    pub fn zero(kind: SystemKind, m1: usize, m2: usize, grid: Grid<T>) -> Result<Self> {
        Self::from_fn(kind, m1, m2, grid, |_| CMatrix::zeros(m1, m2))
    }

    /// N-wave field with diagonal `d` (strictly decreasing, positive) and
    /// Hermitian samples `rho`; the block sizes split `m` as `1 + (m-1)`.
    pub fn nwave(grid: Grid<T>, d: Vec<T>, rho: Vec<CMatrix<T>>) -> Result<Self> {
        let m = d.len();
        if m < 2 {
            return Err(invalid("N-wave systems need m >= 2"));
        }
        if d.iter().any(|&x| !(x > T::zero())) {
            return Err(invalid("D entries must be positive"));
        }
        for (i, w) in d.windows(2).enumerate() {
            if !(w[0] > w[1]) {
                return Err(if w[0] == w[1] {
                    Error::DegenerateD { i, k: i + 1 }
                } else {
                    invalid("D entries must be strictly decreasing")
                });
            }
        }
        if rho.len() != grid.n || rho.iter().any(|r| r.shape() != (m, m)) {
            return Err(invalid("rho must hold one m x m sample per node"));
        }
        if !rho.iter().all(is_finite) {
            return Err(Error::NonFinite("rho samples"));
        }
        let tol = T::lit(1e-12);
        for r in &rho {
            if op_norm(&(r - r.adjoint())) > tol * (T::one() + op_norm(r)) {
                return Err(invalid("rho must be Hermitian"));
            }
        }
        let v = vec![CMatrix::zeros(1, m - 1); grid.n];
        Ok(Self { kind: SystemKind::NWave, m1: 1, m2: m - 1, grid, v, nwave: Some(NWaveField { d, rho }) })
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }
    pub fn m1(&self) -> usize {
        self.m1
    }
    pub fn m2(&self) -> usize {
        self.m2
    }
    pub fn m(&self) -> usize {
        self.m1 + self.m2
    }
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }
    pub fn samples(&self) -> &[CMatrix<T>] {
        &self.v
    }
    pub fn nwave_field(&self) -> Option<&NWaveField<T>> {
        self.nwave.as_ref()
    }

    /// `v(x)` by linear interpolation, zero outside the grid.
    pub fn v_at(&self, x: T) -> CMatrix<T> {
        interp_linear(&self.grid, &self.v, x)
    }

    /// `zeta(x) = [D, rho(x)]` for the N-wave kind.
    pub fn zeta_at(&self, x: T) -> Option<CMatrix<T>> {
        self.nwave.as_ref().map(|f| commutator(&f.d, &interp_linear(&self.grid, &f.rho, x)))
    }

    /// `sup_x ||v(x)||` (or `||zeta(x)||` for N-wave).
    pub fn sup_norm(&self) -> T {
        match &self.nwave {
            Some(f) => f.rho.iter().map(|r| op_norm(&commutator(&f.d, r))).fold(T::zero(), T::max),
            None => self.v.iter().map(op_norm).fold(T::zero(), T::max),
        }
    }

    /// Generator of the system at `(x, z)`, written into `out` (`m x m`).
    pub fn generator_into(&self, x: T, z: Complex<T>, out: &mut CMatrix<T>) {
        let (m1, m2) = (self.m1, self.m2);
        let iu = Complex::new(T::zero(), T::one());
        out.fill(Complex::new(T::zero(), T::zero()));
        if let Some(f) = &self.nwave {
            let zeta = commutator(&f.d, &interp_linear(&self.grid, &f.rho, x));
            for r in 0..self.m() {
                for c in 0..self.m() {
                    out[(r, c)] = -zeta[(r, c)];
                }
                out[(r, r)] += iu * z * f.d[r];
            }
            return;
        }
        let scale = match self.kind {
            SystemKind::SelfAdjoint => iu,
            _ => Complex::new(T::one(), T::zero()),
        };
        for k in 0..m1 {
            out[(k, k)] = iu * z;
        }
        for k in 0..m2 {
            out[(m1 + k, m1 + k)] = -iu * z;
        }
        let Some((k, w)) = self.locate(x) else {
            return;
        };
        let (a, b) = (&self.v[k], &self.v[(k + 1).min(self.grid.n - 1)]);
        for r in 0..m1 {
            for c in 0..m2 {
                let v = a[(r, c)] * (T::one() - w) + b[(r, c)] * w;
                out[(r, m1 + c)] = v * scale;
                out[(m1 + c, r)] = -(v.conj() * scale);
            }
        }
    }

    /// Interval index and weight for linear interpolation at `x`, or
    /// `None` outside the grid.
    fn locate(&self, x: T) -> Option<(usize, T)> {
        let s = (x - self.grid.x0) / self.grid.h;
        let last = T::of_usize(self.grid.n - 1);
        let tol = T::lit(1e-9);
        if s < -tol || s > last + tol {
            return None;
        }
        let s = s.max(T::zero()).min(last);
        let k = s.floor().to_usize().unwrap_or(0).min(self.grid.n - 2);
        Some((k, s - T::of_usize(k)))
    }

    pub fn generator(&self, x: T, z: Complex<T>) -> CMatrix<T> {
        let mut g = CMatrix::zeros(self.m(), self.m());
        self.generator_into(x, z, &mut g);
        g
    }

    fn substeps(&self, z: Complex<T>, stepping: &Stepping<T>) -> usize {
        let dmax = self.nwave.as_ref().map_or(T::one(), |f| f.d[0]);
        let rate = z.modulus() * dmax + self.sup_norm();
        let s = (self.grid.h * rate / stepping.max_phase).ceil();
        s.to_usize().unwrap_or(1).max(1)
    }

    /// RK4 from the first node to node `last`, reporting every node.
    fn run(
        &self,
        z: Complex<T>,
        last: usize,
        inverse: bool,
        stepping: &Stepping<T>,
        mut observe: impl FnMut(usize, &CMatrix<T>),
    ) -> Result<CMatrix<T>> {
        let s = self.substeps(z, stepping);
        let x1 = self.grid.node(last);
        let id = eye(self.m());
        observe(0, &id);
        let coef = |x: T, out: &mut CMatrix<T>| {
            self.generator_into(x, z, out);
            if inverse {
                out.neg_mut();
            }
        };
        let side = if inverse { Side::Right } else { Side::Left };
        rk4(coef, side, &id, self.grid.x0, x1, last * s, |k, y| {
            if k % s == 0 {
                observe(k / s, y)
            }
        })
    }

    fn last_node(&self, up_to: T) -> Result<usize> {
        self.grid.check_contains(up_to)?;
        Ok(((up_to - self.grid.x0) / self.grid.h).round().to_usize().unwrap_or(0).min(self.grid.n - 1))
    }
}

fn commutator<T: Real>(d: &[T], rho: &CMatrix<T>) -> CMatrix<T> {
    let m = d.len();
    CMatrix::from_fn(m, m, |i, k| rho[(i, k)] * (d[i] - d[k]))
}

/// `u(x_k, z)` on the potential's grid, `u(x_0) = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalSolution<T: Real> {
    pub z: Complex<T>,
    pub grid: Grid<T>,
    pub samples: Vec<CMatrix<T>>,
}

impl<T: Real> FundamentalSolution<T> {
    pub fn last(&self) -> &CMatrix<T> {
        self.samples.last().expect("nonempty solution")
    }
}

/// Fundamental solution on all grid nodes up to `up_to`.
pub fn propagate<T: Real>(pot: &DiracPotential<T>, z: Complex<T>, up_to: T) -> Result<FundamentalSolution<T>> {
    propagate_with(pot, z, up_to, &Stepping::default())
}

pub fn propagate_with<T: Real>(
    pot: &DiracPotential<T>,
    z: Complex<T>,
    up_to: T,
    stepping: &Stepping<T>,
) -> Result<FundamentalSolution<T>> {
    let last = pot.last_node(up_to)?;
    let mut samples = Vec::with_capacity(last + 1);
    pot.run(z, last, false, stepping, |_, y| samples.push(y.clone()))?;
    let grid = Grid { x0: pot.grid.x0, h: pot.grid.h, n: last + 1 };
    Ok(FundamentalSolution { z, grid, samples })
}

/// `u(x, z)` at the grid nodes nearest to the requested points (ascending),
/// computed in one sweep.
pub fn propagate_at<T: Real>(
    pot: &DiracPotential<T>,
    z: Complex<T>,
    xs: &[T],
    inverse: bool,
    stepping: &Stepping<T>,
) -> Result<Vec<CMatrix<T>>> {
    let nodes: Vec<usize> = xs.iter().map(|&x| pot.last_node(x)).collect::<Result<_>>()?;
    if nodes.windows(2).any(|w| w[0] > w[1]) {
        return Err(invalid("evaluation points must be ascending"));
    }
    let Some(&last) = nodes.last() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::with_capacity(nodes.len());
    let mut next = 0;
    pot.run(z, last, inverse, stepping, |k, y| {
        while next < nodes.len() && nodes[next] == k {
            out.push(y.clone());
            next += 1;
        }
    })?;
    Ok(out)
}

/// Transfer matrix from `x1` to `x2`, restarted from the identity at `x1`.
pub fn transfer<T: Real>(pot: &DiracPotential<T>, z: Complex<T>, x1: T, x2: T) -> Result<CMatrix<T>> {
    let (k1, k2) = (pot.last_node(x1)?, pot.last_node(x2)?);
    let s = pot.substeps(z, &Stepping::default());
    let (a, b) = (pot.grid.node(k1), pot.grid.node(k2));
    rk4(
        |x, out| pot.generator_into(x, z, out),
        Side::Left,
        &eye(pot.m()),
        a,
        b,
        k2.saturating_sub(k1) * s,
        |_, _| {},
    )
}

/// Block rows `beta = [I 0] u(x, 0)` and `gamma = [0 I] u(x, 0)`.
pub fn block_rows_at_zero<T: Real>(pot: &DiracPotential<T>) -> Result<(Vec<CMatrix<T>>, Vec<CMatrix<T>>)> {
    if pot.kind == SystemKind::NWave {
        return Err(Error::WrongKind { expected: "selfadjoint or skew" });
    }
    let (m1, m2, m) = (pot.m1, pot.m2, pot.m());
    let sol = propagate(pot, Complex::new(T::zero(), T::zero()), pot.grid.end())?;
    let beta = sol.samples.iter().map(|u| block(u, 0, 0, m1, m)).collect();
    let gamma = sol.samples.iter().map(|u| block(u, m1, 0, m2, m)).collect();
    Ok((beta, gamma))
}

/// Largest deviations from `beta j beta* = I`, `gamma j gamma* = -I`,
/// `beta j gamma* = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JIdentityReport {
    pub beta: f64,
    pub gamma: f64,
    pub cross: f64,
}

impl JIdentityReport {
    pub fn max(&self) -> f64 {
        self.beta.max(self.gamma).max(self.cross)
    }
}

pub fn check_j_identities<T: Real>(beta: &[CMatrix<T>], gamma: &[CMatrix<T>]) -> Result<JIdentityReport> {
    if beta.len() != gamma.len() || beta.is_empty() {
        return Err(invalid("beta and gamma must share a nonempty grid"));
    }
    let (m1, m2) = (beta[0].nrows(), gamma[0].nrows());
    let j = jmat::<T>(m1, m2);
    let mut rep = JIdentityReport { beta: 0.0, gamma: 0.0, cross: 0.0 };
    for (b, g) in beta.iter().zip(gamma) {
        let bj = b * &j;
        let gj = g * &j;
        rep.beta = rep.beta.max(op_norm(&(&bj * b.adjoint() - eye::<T>(m1))).to_f64_lossy());
        rep.gamma = rep.gamma.max(op_norm(&(&gj * g.adjoint() + eye::<T>(m2))).to_f64_lossy());
        rep.cross = rep.cross.max(op_norm(&(bj * g.adjoint())).to_f64_lossy());
    }
    Ok(rep)
}

/// Same report for the unitary identities of the skew case:
/// `beta beta* = I`, `gamma gamma* = I`, `beta gamma* = 0`.
pub fn check_unitary_identities<T: Real>(beta: &[CMatrix<T>], gamma: &[CMatrix<T>]) -> Result<JIdentityReport> {
    if beta.len() != gamma.len() || beta.is_empty() {
        return Err(invalid("beta and gamma must share a nonempty grid"));
    }
    let (m1, m2) = (beta[0].nrows(), gamma[0].nrows());
    let mut rep = JIdentityReport { beta: 0.0, gamma: 0.0, cross: 0.0 };
    for (b, g) in beta.iter().zip(gamma) {
        rep.beta = rep.beta.max(op_norm(&(b * b.adjoint() - eye::<T>(m1))).to_f64_lossy());
        rep.gamma = rep.gamma.max(op_norm(&(g * g.adjoint() - eye::<T>(m2))).to_f64_lossy());
        rep.cross = rep.cross.max(op_norm(&(b * g.adjoint())).to_f64_lossy());
    }
    Ok(rep)
}

/// `zeta = D rho - rho D`.
pub fn zeta_from_rho<T: Real>(d: &[T], rho: &CMatrix<T>) -> Result<CMatrix<T>> {
    check_distinct(d)?;
    if rho.shape() != (d.len(), d.len()) {
        return Err(invalid("rho must be m x m"));
    }
    Ok(commutator(d, rho))
}

/// Zero-diagonal `rho` with `[D, rho] = zeta`.
pub fn rho_from_zeta<T: Real>(d: &[T], zeta: &CMatrix<T>) -> Result<CMatrix<T>> {
    check_distinct(d)?;
    let m = d.len();
    if zeta.shape() != (m, m) {
        return Err(invalid("zeta must be m x m"));
    }
    Ok(CMatrix::from_fn(m, m, |i, k| if i == k { Complex::new(T::zero(), T::zero()) } else { zeta[(i, k)] / (d[i] - d[k]) }))
}

fn check_distinct<T: Real>(d: &[T]) -> Result<()> {
    for i in 0..d.len() {
        for k in i + 1..d.len() {
            if d[i] == d[k] {
                return Err(Error::DegenerateD { i, k });
            }
        }
    }
    Ok(())
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c;
    use num_complex::Complex64;

    fn grid(n: usize, h: f64) -> Grid<f64> {
        Grid::new(0.0, h, n).unwrap()
    }

    #[test]
    fn free_selfadjoint_propagator() {
        let pot = DiracPotential::zero(SystemKind::SelfAdjoint, 1, 2, grid(101, 0.01)).unwrap();
        let u = propagate(&pot, c(0.0, 1.0), 1.0).unwrap();
        let last = u.last();
        let e = std::f64::consts::E;
        let expect = [1.0 / e, e, e];
        for k in 0..3 {
            assert!((last[(k, k)] - c(expect[k], 0.0)).norm() < 1e-8);
        }
        assert_eq!(u.samples[0], eye(3));
    }

    #[test]
    fn free_skew_propagator() {
        let pot = DiracPotential::zero(SystemKind::Skew, 1, 1, grid(51, 0.02)).unwrap();
        let z = c(0.7, 0.3);
        let u = propagate(&pot, z, 1.0).unwrap();
        let iz = Complex64::new(0.0, 1.0) * z;
        assert!((u.last()[(0, 0)] - iz.exp()).norm() < 1e-9);
        assert!((u.last()[(1, 1)] - (-iz).exp()).norm() < 1e-9);
    }

    #[test]
    fn constant_potential_matches_matrix_exponential() {
        let pot = DiracPotential::scalar(SystemKind::SelfAdjoint, grid(101, 0.01), |_| c(1.0, 0.0)).unwrap();
        let z = c(0.0, 1.0);
        let u = propagate(&pot, z, 1.0).unwrap();
        let exact = pot.generator(0.5, z).exp();
        assert!((u.last() - &exact).norm() < 1e-8 * exact.norm());
    }

    #[test]
    fn j_unitarity_of_selfadjoint_solution() {
        let pot = DiracPotential::scalar(SystemKind::SelfAdjoint, grid(201, 0.01), |x| c(0.5 * (-x).exp(), 0.3 * x)).unwrap();
        let z = c(0.4, 0.8);
        let u = propagate(&pot, z, 2.0).unwrap();
        let ub = propagate(&pot, z.conj(), 2.0).unwrap();
        let j = jmat::<f64>(1, 1);
        for (a, b) in u.samples.iter().zip(&ub.samples) {
            assert!((a.adjoint() * &j * b - &j).norm() < 1e-9);
        }
    }

    #[test]
    fn inverse_sweep_inverts() {
        let pot = DiracPotential::scalar(SystemKind::Skew, grid(101, 0.01), |x| c(x.cos(), 0.2)).unwrap();
        let z = c(1.0, 2.0);
        let st = Stepping::default();
        let u = propagate_at(&pot, z, &[0.5, 1.0], false, &st).unwrap();
        let ui = propagate_at(&pot, z, &[0.5, 1.0], true, &st).unwrap();
        for (a, b) in u.iter().zip(&ui) {
            assert!((a * b - eye::<f64>(2)).norm() < 1e-9);
        }
    }

    #[test]
    fn propagation_is_multiplicative() {
        let pot = DiracPotential::scalar(SystemKind::SelfAdjoint, grid(101, 0.01), |x| c((3.0 * x).sin(), 0.0)).unwrap();
        let z = c(0.5, 1.0);
        let whole = propagate(&pot, z, 1.0).unwrap();
        let half = propagate(&pot, z, 0.5).unwrap();
        let t = transfer(&pot, z, 0.5, 1.0).unwrap();
        assert!((whole.last() - t * half.last()).norm() < 1e-9);
    }

    #[test]
    fn block_rows_of_free_system() {
        let pot = DiracPotential::zero(SystemKind::SelfAdjoint, 1, 1, grid(11, 0.1)).unwrap();
        let (b, g) = block_rows_at_zero(&pot).unwrap();
        for (bb, gg) in b.iter().zip(&g) {
            assert_eq!(bb, &CMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), c(0.0, 0.0)]));
            assert_eq!(gg, &CMatrix::from_row_slice(1, 2, &[c(0.0, 0.0), c(1.0, 0.0)]));
        }
        let rep = check_j_identities(&b, &g).unwrap();
        assert_eq!(rep.max(), 0.0);
    }

    #[test]
    fn block_rows_match_exponential() {
        let pot = DiracPotential::scalar(SystemKind::SelfAdjoint, grid(51, 0.02), |_| c(1.0, 0.0)).unwrap();
        let (b, g) = block_rows_at_zero(&pot).unwrap();
        let u = pot.generator(0.0, c(0.0, 0.0)).exp();
        assert!((&b[50] - block(&u, 0, 0, 1, 2)).norm() < 1e-8);
        assert!((&g[50] - block(&u, 1, 0, 1, 2)).norm() < 1e-8);
        let skew = DiracPotential::scalar(SystemKind::Skew, grid(51, 0.02), |_| c(1.0, 0.0)).unwrap();
        let (b, g) = block_rows_at_zero(&skew).unwrap();
        assert!(check_unitary_identities(&b, &g).unwrap().max() < 1e-10);
    }

    #[test]
    fn corrupted_gamma_is_detected() {
        let b = vec![CMatrix::from_row_slice(1, 2, &[c::<f64>(1.0, 0.0), c(0.0, 0.0)])];
        let g = vec![CMatrix::from_row_slice(1, 2, &[c(0.0, 0.0), c(2.0, 0.0)])];
        let rep = check_j_identities(&b, &g).unwrap();
        assert!((rep.gamma - 3.0).abs() < 1e-14);
    }

    #[test]
    fn commutator_by_hand() {
        let d = [2.0, 1.0];
        let rho = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let zeta = zeta_from_rho(&d, &rho).unwrap();
        let expect = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(zeta, expect);
        assert_eq!(rho_from_zeta(&d, &zeta).unwrap(), rho);
        assert_eq!(zeta_from_rho(&[1.0, 1.0], &rho), Err(Error::DegenerateD { i: 0, k: 1 }));
    }

    #[test]
    fn nwave_validation() {
        let g = grid(3, 0.1);
        let rho = vec![CMatrix::<f64>::zeros(2, 2); 3];
        assert!(DiracPotential::nwave(g, vec![1.0, 2.0], rho.clone()).is_err());
        assert!(DiracPotential::nwave(g, vec![2.0, 1.0], rho).is_ok());
        let mut bad = CMatrix::<f64>::zeros(2, 2);
        bad[(0, 1)] = c(1.0, 0.0);
        assert!(DiracPotential::nwave(g, vec![2.0, 1.0], vec![bad; 3]).is_err());
    }

    #[test]
    fn out_of_grid() {
        let pot = DiracPotential::zero(SystemKind::SelfAdjoint, 1, 1, grid(11, 0.1)).unwrap();
        assert!(matches!(propagate(&pot, c(0.0, 1.0), 2.0), Err(Error::OutOfGrid { .. })));
    }
}
