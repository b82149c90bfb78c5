//! Inverse problem for the selfadjoint Dirac system: from Weyl-function
//! samples on a line to `Phi_1`, the operators `S_l`, the Hamiltonian,
//! the block rows `gamma`, `beta` and finally the potential.

use num_complex::Complex;

use crate::dirac::{check_j_identities, DiracPotential, JIdentityReport, SystemKind};
use crate::error::{invalid, Error, Result};
use crate::numerics::{
    block, central_diff, central_diff4, eye, guarded_inverse, guarded_solve, hstack, jmat, op_norm, rk4, zeros,
    CMatrix, Grid, LineSamples, Real, Side,
};

/// `Phi_1` and its derivative on a grid starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Phi1Table<T: Real> {
    pub grid: Grid<T>,
    pub phi1: Vec<CMatrix<T>>,
    pub phi1_prime: Vec<CMatrix<T>>,
}

impl<T: Real> Phi1Table<T> {
    pub fn m2(&self) -> usize {
        self.phi1[0].nrows()
    }

    pub fn m1(&self) -> usize {
        self.phi1[0].ncols()
    }

    /// Largest deviation between the stored derivative and the central
    /// difference of `phi1`.
    pub fn derivative_defect(&self) -> Result<T> {
        let d = central_diff(&self.phi1, self.grid.h)?;
        Ok(d.iter().zip(&self.phi1_prime).map(|(a, b)| op_norm(&(a - b))).fold(T::zero(), T::max))
    }

    /// Largest pointwise distance to another table on the same grid.
    pub fn distance(&self, other: &Self) -> T {
        self.phi1
            .iter()
            .zip(&other.phi1)
            .chain(self.phi1_prime.iter().zip(&other.phi1_prime))
            .map(|(a, b)| op_norm(&(a - b)))
            .fold(T::zero(), T::max)
    }
}

/// `Phi_1(y) = (1/pi) T[phi / (2iz)](2y)` and `Phi_1'(y) = -(1/pi) T[phi](2y)`
/// where `T` is the line transform; `out_grid` must start at zero.
pub fn phi1_from_weyl<T: Real>(line: &LineSamples<T>, out_grid: &Grid<T>) -> Result<Phi1Table<T>> {
    if out_grid.x0 != T::zero() {
        return Err(invalid("Phi_1 grid must start at zero"));
    }
    let xs: Vec<T> = out_grid.nodes().map(|y| y * T::lit(2.0)).collect();
    let tail = line.laurent_tail(2);
    let inv_pi = T::one() / T::pi();
    let two_i = Complex::new(T::zero(), T::lit(2.0));
    let prime: Vec<CMatrix<T>> = line.transform(&xs, &tail).into_iter().map(|m| m * Complex::new(-inv_pi, T::zero())).collect();
    let divided = line.map(|z, v| v / (two_i * z));
    let (rows, cols) = line.shape();
    let poles = vec![zeros(rows, cols), &tail[0] / two_i, &tail[1] / two_i];
    let mut phi1: Vec<CMatrix<T>> = divided.transform(&xs, &poles).into_iter().map(|m| m * Complex::new(inv_pi, T::zero())).collect();
    phi1[0].fill(Complex::new(T::zero(), T::zero()));
    Ok(Phi1Table { grid: *out_grid, phi1, phi1_prime: prime })
}

/// [`phi1_from_weyl`] from two lines at different heights; fails with
/// `TailTooLarge` if the results differ by more than `tol`.
pub fn phi1_cross_checked<T: Real>(line: &LineSamples<T>, cross: &LineSamples<T>, out_grid: &Grid<T>, tol: T) -> Result<Phi1Table<T>> {
    let a = phi1_from_weyl(line, out_grid)?;
    let b = phi1_from_weyl(cross, out_grid)?;
    let dev = a.distance(&b);
    if dev > tol {
        return Err(Error::TailTooLarge { deviation: dev.to_f64_lossy(), tol: tol.to_f64_lossy() });
    }
    Ok(a)
}

/// Dense block kernel `K(x_i, x_k) = int Phi_1'(q + x_i - x_k) Phi_1'(q)* dq`
/// over `q in [0, min(x_i, x_k)]` (trapezoid), shared by both inverse
/// problems: `S = I - K` in the selfadjoint case and `S = I + K` in the
/// skew case.
#[derive(Debug, Clone)]
pub struct ConvKernel<T: Real> {
    pub n: usize,
    pub m2: usize,
    pub h: T,
    /// `(n m2) x (n m2)` Hermitian matrix of kernel values.
    pub k: CMatrix<T>,
}

impl<T: Real> ConvKernel<T> {
    pub fn build(prime: &[CMatrix<T>], h: T, n: usize) -> Self {
        let m2 = prime[0].nrows();
        let mut k = zeros(n * m2, n * m2);
        let half = T::lit(0.5);
        for d in 0..n {
            let mut run = zeros::<T>(m2, m2);
            let mut first = zeros::<T>(m2, m2);
            for q in 0..n - d {
                let term = &prime[q + d] * prime[q].adjoint();
                if q == 0 {
                    first = term.clone();
                }
                run += &term;
                let (i, kk) = (q + d, q);
                let val = if q == 0 { zeros(m2, m2) } else { (&run - (&first + &term) * Complex::new(half, T::zero())) * Complex::new(h, T::zero()) };
                k.view_mut((i * m2, kk * m2), (m2, m2)).copy_from(&val);
                if d > 0 {
                    k.view_mut((kk * m2, i * m2), (m2, m2)).copy_from(&val.adjoint());
                }
            }
        }
        Self { n, m2, h, k }
    }
}

/// Discretized `S_l` on the nodes `0, h, .., l`, stored in the symmetrized
/// Nystrom form `I + sign W^{1/2} K W^{1/2}` with trapezoid weights `W`.
#[derive(Debug, Clone)]
pub struct StructuredOperatorS<T: Real> {
    pub l: T,
    pub grid: Grid<T>,
    pub sqrt_w: Vec<T>,
    pub matrix: CMatrix<T>,
}

impl<T: Real> StructuredOperatorS<T> {
    pub(crate) fn from_kernel(kernel: &ConvKernel<T>, nodes: usize, sign: T) -> Self {
        let m2 = kernel.m2;
        let dim = nodes * m2;
        let h = kernel.h;
        let sqrt_w: Vec<T> = (0..nodes)
            .map(|i| if nodes == 1 { T::zero() } else if i == 0 || i == nodes - 1 { (h * T::lit(0.5)).sqrt() } else { h.sqrt() })
            .collect();
        let mut matrix = eye::<T>(dim);
        for c in 0..dim {
            for r in 0..dim {
                let w = sqrt_w[r / m2] * sqrt_w[c / m2] * sign;
                matrix[(r, c)] += kernel.k[(r, c)] * w;
            }
        }
        let grid = Grid { x0: T::zero(), h, n: nodes.max(1) };
        Self { l: h * T::of_usize(nodes - 1), grid, sqrt_w, matrix }
    }

    pub fn min_eigenvalue(&self) -> T {
        crate::numerics::hermitian_min_eigenvalue(&self.matrix)
    }

    pub fn hermitian_defect(&self) -> T {
        op_norm(&(&self.matrix - self.matrix.adjoint()))
    }

    pub(crate) fn cholesky(&self) -> Result<nalgebra::Cholesky<Complex<T>, nalgebra::Dyn>> {
        self.matrix.clone().cholesky().ok_or(Error::NotPositive { l: self.l.to_f64_lossy() })
    }

    /// `W^{1/2} S^{-1} g` for a block column function `g` sampled on the
    /// nodes, which is what trapezoid sums against `S^{-1} g` need.
    pub fn solve_weighted(&self, g: &[CMatrix<T>]) -> Result<Vec<CMatrix<T>>> {
        let m2 = g[0].nrows();
        let cols = g[0].ncols();
        let nodes = self.sqrt_w.len();
        let chol = self.cholesky()?;
        let mut rhs = zeros::<T>(nodes * m2, cols);
        for (i, gi) in g.iter().enumerate().take(nodes) {
            rhs.view_mut((i * m2, 0), (m2, cols)).copy_from(&(gi * Complex::new(self.sqrt_w[i], T::zero())));
        }
        let y = chol.solve(&rhs);
        Ok((0..nodes).map(|i| block(&y, i * m2, 0, m2, cols)).collect())
    }
}

/// `S_l = I - K` on `[0, l]`.
pub fn build_s<T: Real>(phi1: &Phi1Table<T>, l: T) -> Result<StructuredOperatorS<T>> {
    let nodes = nodes_for(&phi1.grid, l)?;
    let kernel = ConvKernel::build(&phi1.phi1_prime, phi1.grid.h, nodes);
    let s = StructuredOperatorS::from_kernel(&kernel, nodes, -T::one());
    s.cholesky()?;
    Ok(s)
}

pub(crate) fn nodes_for<T: Real>(grid: &Grid<T>, l: T) -> Result<usize> {
    grid.check_contains(l)?;
    Ok(((l - grid.x0) / grid.h).round().to_usize().unwrap_or(0) + 1)
}

/// `H(l)` on the grid of `Phi_1` together with positivity diagnostics.
#[derive(Debug, Clone)]
pub struct HamiltonianTable<T: Real> {
    pub grid: Grid<T>,
    pub h: Vec<CMatrix<T>>,
    /// `Pi_l* S_l^{-1} Pi_l` before differentiation.
    pub integral: Vec<CMatrix<T>>,
    /// `(l, min eigenvalue of S_l)` at a sample of the `l` values.
    pub min_eigenvalues: Vec<(T, T)>,
}

/// `H = d/dl (Pi_l* S_l^{-1} Pi_l)` for every node `l` of the `Phi_1` grid.
pub fn hamiltonian<T: Real>(phi1: &Phi1Table<T>) -> Result<HamiltonianTable<T>> {
    let n = phi1.grid.n;
    let (m1, m2) = (phi1.m1(), phi1.m2());
    let m = m1 + m2;
    let kernel = ConvKernel::build(&phi1.phi1_prime, phi1.grid.h, n);
    let probe_every = (n / 8).max(1);
    let mut integral = Vec::with_capacity(n);
    let mut min_eigenvalues = Vec::new();
    for nodes in 1..=n {
        let s = StructuredOperatorS::from_kernel(&kernel, nodes, -T::one());
        let chol = s.cholesky()?;
        if (nodes - 1) % probe_every == 0 || nodes == n {
            min_eigenvalues.push((s.l, s.min_eigenvalue()));
        }
        let mut q = zeros::<T>(nodes * m2, m);
        for i in 0..nodes {
            let w = Complex::new(s.sqrt_w[i], T::zero());
            q.view_mut((i * m2, 0), (m2, m1)).copy_from(&(&phi1.phi1[i] * w));
            for r in 0..m2 {
                q[(i * m2 + r, m1 + r)] = w;
            }
        }
        let y = chol.solve(&q);
        let f = q.adjoint() * y;
        integral.push(hermitian(&f));
    }
    let h: Vec<CMatrix<T>> = central_diff4(&integral, phi1.grid.h)?.iter().map(hermitian).collect();
    Ok(HamiltonianTable { grid: phi1.grid, h, integral, min_eigenvalues })
}

fn hermitian<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    (a + a.adjoint()) * Complex::new(T::lit(0.5), T::zero())
}

/// `gamma` from the Hamiltonian via `gamma_2^{-1} gamma_1` and the linear
/// equation for `gamma_2`.
pub fn gamma_from_h<T: Real>(ham: &HamiltonianTable<T>, m1: usize) -> Result<Vec<CMatrix<T>>> {
    let n = ham.grid.n;
    let m = ham.h[0].nrows();
    if m1 == 0 || m1 >= m {
        return Err(invalid("block split does not fit the Hamiltonian"));
    }
    let m2 = m - m1;
    let margin = T::one() - T::lit(1e-8);
    let mut rho = Vec::with_capacity(n);
    for (node, hk) in ham.h.iter().enumerate() {
        let h22 = block(hk, m1, m1, m2, m2);
        let h21 = block(hk, m1, 0, m2, m1);
        let r = guarded_solve(&h22, &h21).map_err(|_| Error::SingularBlock { node })?;
        let norm = op_norm(&r);
        if !(norm < margin) {
            return Err(Error::ContractionViolated { node, norm: norm.to_f64_lossy() });
        }
        rho.push(r);
    }
    let drho = central_diff4(&rho, ham.grid.h)?;
    let id = eye::<T>(m2);
    let mut coef = Vec::with_capacity(n);
    for (node, (r, dr)) in rho.iter().zip(&drho).enumerate() {
        let inv = guarded_inverse(&(&id - r * r.adjoint())).map_err(|_| Error::SingularBlock { node })?;
        coef.push(dr * r.adjoint() * inv);
    }
    let g2 = integrate_right(&ham.grid, &coef, &id)?;
    Ok(g2.iter().zip(&rho).map(|(g, r)| g * hstack(&[r, &id])).collect())
}

/// Solves `y' = y A(x)` with `A` known at the nodes, one RK4 step per grid
/// interval, returning `y` at every node. Midpoint values of `A` come from
/// cubic interpolation so the scheme stays fourth order.
pub(crate) fn integrate_right<T: Real>(grid: &Grid<T>, coef: &[CMatrix<T>], y0: &CMatrix<T>) -> Result<Vec<CMatrix<T>>> {
    let n = grid.n;
    let mid: Vec<CMatrix<T>> = (0..n - 1)
        .map(|k| {
            if n < 4 {
                return (&coef[k] + &coef[k + 1]) * Complex::new(T::lit(0.5), T::zero());
            }
            // Four nodes around the interval, shifted inward at the ends.
            let s = k.saturating_sub(1).min(n - 4);
            let t = T::of_usize(k - s) + T::lit(0.5);
            let mut acc = zeros::<T>(coef[0].nrows(), coef[0].ncols());
            for i in 0..4 {
                let mut w = T::one();
                for j in 0..4 {
                    if j != i {
                        w *= (t - T::of_usize(j)) / (T::of_usize(i) - T::of_usize(j));
                    }
                }
                acc += &coef[s + i] * Complex::new(w, T::zero());
            }
            acc
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    out.push(y0.clone());
    let half = grid.h * T::lit(0.5);
    rk4(
        |x, o| {
            let s = (x - grid.x0) / half;
            let k = s.round().to_usize().unwrap_or(0).min(2 * (n - 1));
            if k % 2 == 0 {
                o.copy_from(&coef[k / 2]);
            } else {
                o.copy_from(&mid[k / 2]);
            }
        },
        Side::Right,
        y0,
        grid.x0,
        grid.end(),
        n - 1,
        |_, y| out.push(y.clone()),
    )?;
    Ok(out)
}

/// `beta = beta_1 [I, gamma_1* (gamma_2*)^{-1}]` with `beta_1` from its
/// linear equation.
pub fn beta_from_gamma<T: Real>(grid: &Grid<T>, gamma: &[CMatrix<T>], m1: usize) -> Result<Vec<CMatrix<T>>> {
    let m = gamma[0].ncols();
    let m2 = m - m1;
    let j = jmat::<T>(m1, m2);
    let id = eye::<T>(m1);
    let mut tilde = Vec::with_capacity(gamma.len());
    for (node, g) in gamma.iter().enumerate() {
        let g1 = block(g, 0, 0, m2, m1);
        let g2 = block(g, 0, m1, m2, m2);
        let inv = guarded_inverse(&g2.adjoint()).map_err(|_| Error::SingularBlock { node })?;
        tilde.push(hstack(&[&id, &(g1.adjoint() * inv)]));
    }
    let dtilde = central_diff4(&tilde, grid.h)?;
    let mut coef = Vec::with_capacity(tilde.len());
    for (node, (t, dt)) in tilde.iter().zip(&dtilde).enumerate() {
        let den = guarded_inverse(&(t * &j * t.adjoint())).map_err(|_| Error::SingularBlock { node })?;
        coef.push(-(dt * &j * t.adjoint() * den));
    }
    let b1 = integrate_right(grid, &coef, &id)?;
    Ok(b1.iter().zip(&tilde).map(|(b, t)| b * t).collect())
}

/// `v = i beta' j gamma*`.
pub fn recover_potential<T: Real>(grid: &Grid<T>, beta: &[CMatrix<T>], gamma: &[CMatrix<T>]) -> Result<DiracPotential<T>> {
    if beta.len() != grid.n || gamma.len() != grid.n {
        return Err(invalid("beta and gamma must be sampled on the grid"));
    }
    let (m1, m2) = (beta[0].nrows(), gamma[0].nrows());
    let j = jmat::<T>(m1, m2);
    let iu = Complex::new(T::zero(), T::one());
    let db = central_diff4(beta, grid.h)?;
    let v = db.iter().zip(gamma).map(|(d, g)| d * &j * g.adjoint() * iu).collect();
    DiracPotential::new(SystemKind::SelfAdjoint, m1, m2, *grid, v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseConfig<T> {
    /// Step of the reconstruction grid.
    pub h: T,
    /// Reconstruct on `[0, length]`.
    pub length: T,
    /// Extra nodes computed beyond `length` and then dropped, so that the
    /// one-sided difference stencils stay away from the reported range.
    pub margin_nodes: usize,
    /// Tolerance of the two-line consistency check of `Phi_1`.
    pub cross_tol: T,
}

impl<T: Real> Default for InverseConfig<T> {
    fn default() -> Self {
        Self { h: T::lit(5e-3), length: T::one(), margin_nodes: 10, cross_tol: T::lit(1e-4) }
    }
}

impl<T: Real> InverseConfig<T> {
    pub(crate) fn work_grid(&self) -> Result<Grid<T>> {
        let n = (self.length / self.h).round().to_usize().unwrap_or(0) + 1 + self.margin_nodes;
        Grid::new(T::zero(), self.length / T::of_usize((self.length / self.h).round().to_usize().unwrap_or(1).max(1)), n)
    }

    pub(crate) fn reported_nodes(&self) -> usize {
        (self.length / self.h).round().to_usize().unwrap_or(0) + 1
    }
}

#[derive(Debug, Clone)]
pub struct InverseResult<T: Real> {
    pub potential: DiracPotential<T>,
    pub phi1: Phi1Table<T>,
    pub hamiltonian: HamiltonianTable<T>,
    pub beta: Vec<CMatrix<T>>,
    pub gamma: Vec<CMatrix<T>>,
    pub identities: JIdentityReport,
    /// Distance between `Phi_1` computed from the two lines, if a second
    /// line was supplied.
    pub cross_deviation: Option<T>,
}

/// Full selfadjoint inverse pipeline from samples on one line, optionally
/// checked against a second line at a different height.
pub fn solve_inverse<T: Real>(line: &LineSamples<T>, cross: Option<&LineSamples<T>>, config: &InverseConfig<T>) -> Result<InverseResult<T>> {
    let grid = config.work_grid()?;
    let (m2, m1) = line.shape();
    let phi1 = phi1_from_weyl(line, &grid)?;
    let cross_deviation = match cross {
        Some(c) => {
            let dev = phi1.distance(&phi1_from_weyl(c, &grid)?);
            if dev > config.cross_tol {
                return Err(Error::TailTooLarge { deviation: dev.to_f64_lossy(), tol: config.cross_tol.to_f64_lossy() });
            }
            Some(dev)
        }
        None => None,
    };
    let ham = hamiltonian(&phi1)?;
    let gamma = gamma_from_h(&ham, m1)?;
    let beta = beta_from_gamma(&grid, &gamma, m1)?;
    let full = recover_potential(&grid, &beta, &gamma)?;
    debug_assert_eq!(full.m2(), m2);
    let keep = config.reported_nodes();
    let out_grid = Grid::new(T::zero(), grid.h, keep)?;
    let potential = DiracPotential::new(SystemKind::SelfAdjoint, m1, m2, out_grid, full.samples()[..keep].to_vec())?;
    let beta: Vec<_> = beta[..keep].to_vec();
    let gamma: Vec<_> = gamma[..keep].to_vec();
    let identities = check_j_identities(&beta, &gamma)?;
    Ok(InverseResult { potential, phi1, hamiltonian: ham, beta, gamma, identities, cross_deviation })
}
