//! Inverse problem for the skew-selfadjoint Dirac system: from samples of
//! a GW-function on a line `Im z = eta` to the potential `v`.

use num_complex::Complex;

use crate::dirac::{check_unitary_identities, DiracPotential, JIdentityReport, SystemKind};
use crate::error::{invalid, Error, Result};
use crate::inverse_sa::{integrate_right, nodes_for, phi1_from_weyl, ConvKernel, InverseConfig, Phi1Table, StructuredOperatorS};
use crate::numerics::{central_diff4, eye, guarded_inverse, hermitian_min_eigenvalue, hstack, op_norm, zeros, CMatrix, Grid, LineSamples, Real};
use crate::weyl::WeylTable;

#[derive(Debug, Clone, PartialEq)]
pub struct SkewInverseConfig<T: Real> {
    /// Height of the sampling line; must exceed the half-plane offset `M`.
    pub eta: T,
    /// Half-width of the sampled window `|Re z| <= a`.
    pub a: T,
    /// Spacing of the line samples.
    pub dxi: T,
    /// Reconstruction grid and cross-check settings.
    pub inverse: InverseConfig<T>,
    /// Expected leading coefficient of `phi(z) ~ phi0 / z`, if known.
    pub phi0: Option<CMatrix<T>>,
}

impl<T: Real> SkewInverseConfig<T> {
    /// Defaults for a potential bounded by `m`: the line sits at `m + 1/2`.
    pub fn for_offset(m: T) -> Self {
        Self { eta: m + T::lit(0.5), a: T::lit(200.0), dxi: T::lit(0.05), inverse: InverseConfig::default(), phi0: None }
    }

    pub fn validate(&self, offset: T) -> Result<()> {
        if !(self.eta > offset) {
            return Err(invalid(format!(
                "eta = {} must exceed the half-plane offset {}",
                self.eta.to_f64_lossy(),
                offset.to_f64_lossy()
            )));
        }
        if !(self.a > T::zero() && self.dxi > T::zero()) {
            return Err(invalid("line window and spacing must be positive"));
        }
        Ok(())
    }
}

/// `sup ||z^2 (phi(z) - phi0 / z)||` over the samples.
pub fn check_asymptotic<T: Real>(line: &LineSamples<T>, phi0: &CMatrix<T>) -> T {
    line.points()
        .zip(&line.values)
        .map(|(z, v)| op_norm(&((v - phi0 * (Complex::new(T::one(), T::zero()) / z)) * (z * z))))
        .fold(T::zero(), T::max)
}

/// `Phi_1` from a GW-function line; the transform is the selfadjoint one
/// with the line above the half-plane offset.
pub fn phi1_skew<T: Real>(line: &LineSamples<T>, out_grid: &Grid<T>) -> Result<Phi1Table<T>> {
    phi1_from_weyl(line, out_grid)
}

/// `S_l = I + K` on `[0, l]`, with the convolution kernel of `Phi_1'`.
pub fn build_s_conv<T: Real>(phi1: &Phi1Table<T>, l: T) -> Result<StructuredOperatorS<T>> {
    let nodes = nodes_for(&phi1.grid, l)?;
    let kernel = ConvKernel::build(&phi1.phi1_prime, phi1.grid.h, nodes);
    let s = StructuredOperatorS::from_kernel(&kernel, nodes, T::one());
    s.cholesky()?;
    Ok(s)
}

/// `beta` on the grid of `phi1` together with `(l, min eigenvalue of S_l)`
/// at a sample of the nodes.
#[derive(Debug, Clone)]
pub struct BetaTable<T: Real> {
    pub beta: Vec<CMatrix<T>>,
    pub min_eigenvalues: Vec<(T, T)>,
}

/// `beta(x) = [I 0] - int_0^x (S_x^{-1} Phi_1')(t)* [Phi_1(t), I] dt`
/// with one dense solve per node.
pub fn beta_direct<T: Real>(phi1: &Phi1Table<T>) -> Result<BetaTable<T>> {
    let n = phi1.grid.n;
    let (m1, m2) = (phi1.m1(), phi1.m2());
    let kernel = ConvKernel::build(&phi1.phi1_prime, phi1.grid.h, n);
    let e1 = hstack(&[&eye::<T>(m1), &zeros(m1, m2)]);
    let id2 = eye::<T>(m2);
    let probe_every = (n / 8).max(1);
    let mut beta = Vec::with_capacity(n);
    let mut min_eigenvalues = Vec::new();
    for nodes in 1..=n {
        let s = StructuredOperatorS::from_kernel(&kernel, nodes, T::one());
        if (nodes - 1) % probe_every == 0 || nodes == n {
            min_eigenvalues.push((s.l, s.min_eigenvalue()));
        }
        let y = s.solve_weighted(&phi1.phi1_prime[..nodes])?;
        let mut b = e1.clone();
        for (i, yi) in y.iter().enumerate() {
            let w = Complex::new(s.sqrt_w[i], T::zero());
            b -= yi.adjoint() * hstack(&[&phi1.phi1[i], &id2]) * w;
        }
        beta.push(b);
    }
    Ok(BetaTable { beta, min_eigenvalues })
}

/// `gamma = theta gamma_tilde` with `beta gamma_tilde* = 0`,
/// `gamma_tilde(0) = [0 I]` and `theta` normalizing the frame.
pub fn complement_gamma<T: Real>(grid: &Grid<T>, beta: &[CMatrix<T>]) -> Result<Vec<CMatrix<T>>> {
    if beta.len() != grid.n {
        return Err(invalid("beta must be sampled on the grid"));
    }
    let (m1, m) = beta[0].shape();
    let m2 = m - m1;
    let tilde = complement_frame(beta, m1, m2)?;
    let dtilde = central_diff4(&tilde, grid.h)?;
    let mut coef = Vec::with_capacity(grid.n);
    for (node, (t, dt)) in tilde.iter().zip(&dtilde).enumerate() {
        let inv = guarded_inverse(&(t * t.adjoint())).map_err(|_| Error::DiscontinuousComplement { node })?;
        coef.push(-(dt * t.adjoint() * inv));
    }
    let theta = integrate_right(grid, &coef, &eye(m2))?;
    Ok(theta.iter().zip(&tilde).map(|(th, t)| th * t).collect())
}

/// A continuous complement of the rows of `beta`. The `1 x 1` case uses
/// `[-conj(b2), conj(b1)]`; otherwise the rows `[0 I]` are projected onto
/// the orthogonal complement of `beta`, which is continuous as long as the
/// projection keeps full rank.
fn complement_frame<T: Real>(beta: &[CMatrix<T>], m1: usize, m2: usize) -> Result<Vec<CMatrix<T>>> {
    let m = m1 + m2;
    let e2 = hstack(&[&zeros::<T>(m2, m1), &eye(m2)]);
    let floor = T::lit(1e-6);
    let mut out: Vec<CMatrix<T>> = Vec::with_capacity(beta.len());
    for (node, b) in beta.iter().enumerate() {
        let t = if m1 == 1 && m2 == 1 {
            CMatrix::from_row_slice(1, 2, &[-b[(0, 1)].conj(), b[(0, 0)].conj()])
        } else {
            let g = guarded_inverse(&(b * b.adjoint())).map_err(|_| Error::DiscontinuousComplement { node })?;
            let proj = eye::<T>(m) - b.adjoint() * g * b;
            &e2 * proj
        };
        if hermitian_min_eigenvalue(&(&t * t.adjoint())) < floor {
            return Err(Error::DiscontinuousComplement { node });
        }
        if let Some(prev) = out.last() {
            let overlap = (&t * prev.adjoint()).trace().re;
            if !(overlap > T::zero()) {
                return Err(Error::DiscontinuousComplement { node });
            }
        }
        out.push(t);
    }
    Ok(out)
}

/// `v = beta' gamma*`, with the same fourth-order stencil as the frame
/// equation.
pub fn recover_potential_skew<T: Real>(grid: &Grid<T>, beta: &[CMatrix<T>], gamma: &[CMatrix<T>]) -> Result<DiracPotential<T>> {
    if beta.len() != grid.n || gamma.len() != grid.n {
        return Err(invalid("beta and gamma must be sampled on the grid"));
    }
    let (m1, m2) = (beta[0].nrows(), gamma[0].nrows());
    let db = central_diff4(beta, grid.h)?;
    let v = db.iter().zip(gamma).map(|(d, g)| d * g.adjoint()).collect();
    DiracPotential::new(SystemKind::Skew, m1, m2, *grid, v)
}

#[derive(Debug, Clone)]
pub struct SkewInverseResult<T: Real> {
    pub potential: DiracPotential<T>,
    pub phi1: Phi1Table<T>,
    pub beta: Vec<CMatrix<T>>,
    pub gamma: Vec<CMatrix<T>>,
    pub identities: JIdentityReport,
    pub min_eigenvalues: Vec<(T, T)>,
    /// `sup ||v||` on the reported grid.
    pub sup_norm: T,
    pub cross_deviation: Option<T>,
    pub asymptotic: Option<T>,
}

/// Full skew pipeline from samples on the line `Im z = config.eta`.
pub fn solve_inverse_skew<T: Real>(
    line: &LineSamples<T>,
    cross: Option<&LineSamples<T>>,
    config: &SkewInverseConfig<T>,
) -> Result<SkewInverseResult<T>> {
    let icfg = &config.inverse;
    let grid = icfg.work_grid()?;
    let (m2, m1) = line.shape();
    if let Some(p) = &config.phi0 {
        if p.shape() != (m2, m1) {
            return Err(invalid("phi0 has the wrong shape"));
        }
    }
    let phi1 = phi1_skew(line, &grid)?;
    let cross_deviation = match cross {
        Some(c) => {
            let dev = phi1.distance(&phi1_skew(c, &grid)?);
            if dev > icfg.cross_tol {
                return Err(Error::TailTooLarge { deviation: dev.to_f64_lossy(), tol: icfg.cross_tol.to_f64_lossy() });
            }
            Some(dev)
        }
        None => None,
    };
    let asymptotic = config.phi0.as_ref().map(|p| check_asymptotic(line, p));
    let BetaTable { beta, min_eigenvalues } = beta_direct(&phi1)?;
    let gamma = complement_gamma(&grid, &beta)?;
    let full = recover_potential_skew(&grid, &beta, &gamma)?;
    let keep = icfg.reported_nodes();
    let out_grid = Grid::new(T::zero(), grid.h, keep)?;
    let potential = DiracPotential::new(SystemKind::Skew, m1, m2, out_grid, full.samples()[..keep].to_vec())?;
    let beta: Vec<_> = beta[..keep].to_vec();
    let gamma: Vec<_> = gamma[..keep].to_vec();
    let identities = check_unitary_identities(&beta, &gamma)?;
    let sup_norm = potential.sup_norm();
    Ok(SkewInverseResult { potential, phi1, beta, gamma, identities, min_eigenvalues, sup_norm, cross_deviation, asymptotic })
}

/// The map from a GW-function table to the potential it determines. The
/// table must be sampled on the line `Im z = config.eta`.
pub fn m_operator<T: Real>(table: &WeylTable<T>, config: &SkewInverseConfig<T>) -> Result<DiracPotential<T>> {
    config.validate(table.offset)?;
    let line = table.to_line()?;
    if (line.eta - config.eta).abs() > T::lit(1e-12) * (T::one() + config.eta.abs()) {
        return Err(invalid("table is not sampled on the configured line"));
    }
    Ok(solve_inverse_skew(&line, None, config)?.potential)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c;

    fn cm(v: crate::Complex<f64>) -> CMatrix<f64> {
        CMatrix::from_element(1, 1, v)
    }

    #[test]
    fn asymptotic_check_on_exact_laurent_terms() {
        let xi = LineSamples::<f64>::abscissae(10.0, 0.5).unwrap();
        let phi0 = cm(c(0.3, -0.2));
        let exact = LineSamples::new(2.0, xi, vec![cm(c(0.0, 0.0)); xi.n]).unwrap().map(|z, _| &phi0 * (c::<f64>(1.0, 0.0) / z));
        assert!(check_asymptotic(&exact, &phi0) < 1e-14);
        let cc = c::<f64>(0.0, 0.7);
        let shifted = exact.map(|z, v| v + cm(cc / (z * z)));
        assert!((check_asymptotic(&shifted, &phi0) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn zero_kernel_gives_identity_and_trivial_rows() {
        let grid = Grid::new(0.0, 0.1, 6).unwrap();
        let zero = vec![cm(c(0.0, 0.0)); 6];
        let phi1 = Phi1Table { grid, phi1: zero.clone(), phi1_prime: zero };
        let s = build_s_conv(&phi1, 0.5).unwrap();
        assert!((&s.matrix - eye::<f64>(6)).norm() < 1e-15);
        let b = beta_direct(&phi1).unwrap().beta;
        for r in &b {
            assert!((r - CMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), c(0.0, 0.0)])).norm() < 1e-15);
        }
        let g = complement_gamma(&grid, &b).unwrap();
        for r in &g {
            assert!((r - CMatrix::from_row_slice(1, 2, &[c(0.0, 0.0), c(1.0, 0.0)])).norm() < 1e-15);
        }
        let v = recover_potential_skew(&grid, &b, &g).unwrap();
        assert!(v.sup_norm() < 1e-15);
    }

    #[test]
    fn constant_kernel_matches_hand_integral() {
        // s(x, t) = |c|^2 min(x, t) for constant Phi_1' = c.
        let grid = Grid::new(0.0, 0.05, 21).unwrap();
        let cc = c(0.4, 0.3);
        let phi1 = Phi1Table { grid, phi1: vec![cm(c(0.0, 0.0)); 21], phi1_prime: vec![cm(cc); 21] };
        let k = ConvKernel::build(&phi1.phi1_prime, grid.h, 21);
        for i in 0..21 {
            for j in 0..21 {
                let expect = 0.25 * grid.node(i.min(j));
                assert!((k.k[(i, j)] - c(expect, 0.0)).norm() < 1e-12);
            }
        }
        let s = build_s_conv(&phi1, 1.0).unwrap();
        assert!(s.min_eigenvalue() > 0.0);
    }

    #[test]
    fn scalar_complement_is_orthogonal() {
        let b: CMatrix<f64> = CMatrix::from_row_slice(1, 2, &[c(0.6, 0.0), c(0.0, 0.8)]);
        let t = complement_frame(std::slice::from_ref(&b), 1, 1).unwrap();
        assert!((&b * t[0].adjoint()).norm() < 1e-15);
        assert!(((&t[0] * t[0].adjoint())[(0, 0)] - c::<f64>(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn block_complement_is_orthogonal() {
        // m1 = 1, m2 = 2: a unit row rotated away from e1.
        let (a, b) = (0.3f64, 0.2f64);
        let row = CMatrix::from_row_slice(1, 3, &[c::<f64>(a.cos(), 0.0), c(a.sin() * b.cos(), 0.0), c(0.0, a.sin() * b.sin())]);
        let t = complement_frame(std::slice::from_ref(&row), 1, 2).unwrap();
        assert!((&row * t[0].adjoint()).norm() < 1e-14);
        assert!(hermitian_min_eigenvalue(&(&t[0] * t[0].adjoint())) > 0.5);
    }

    #[test]
    fn eta_below_offset_is_rejected() {
        let cfg = SkewInverseConfig::<f64>::for_offset(1.0);
        assert!(cfg.validate(1.5).is_err());
        assert!(cfg.validate(1.2).is_ok());
    }
}
