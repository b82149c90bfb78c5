//! Time evolution of Weyl and GW functions for the integrable equations
//! with a Dirac-type auxiliary system: the `t`-equation `R_t = F R` at the
//! boundary, Moebius evolution, the sine-Gordon Goursat solver, the
//! zero-curvature check, boundary reduction limits and the Denjoy-Carleman
//! quasi-analyticity test.

use nalgebra::ComplexField;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dirac::{DiracPotential, Stepping, SystemKind};
use crate::error::{invalid, Error, Result};
use crate::inverse_skew::{check_asymptotic, solve_inverse_skew, SkewInverseConfig};
use crate::numerics::{
    block, central_diff4, cumulative_trapezoid, eye, guarded_inverse, guarded_solve, interp_cubic, jmat, moebius_apply, op_norm, par_map,
    rk4, zeros, CMatrix, Grid, LineSamples, MoebiusMap, Real, Side,
};
use crate::weyl::{sample_line, TruncationConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Equation {
    /// Defocusing NLS.
    Dnls,
    /// Focusing NLS.
    Fnls,
    /// Sine-Gordon in light-cone coordinates.
    Sge,
    /// Complex sine-Gordon.
    Csge,
    /// N-wave.
    Nwave,
}

impl Equation {
    pub fn name(self) -> &'static str {
        match self {
            Equation::Dnls => "dnls",
            Equation::Fnls => "fnls",
            Equation::Sge => "sge",
            Equation::Csge => "csge",
            Equation::Nwave => "nwave",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "dnls" => Equation::Dnls,
            "fnls" => Equation::Fnls,
            "sge" => Equation::Sge,
            "csge" => Equation::Csge,
            "nwave" => Equation::Nwave,
            _ => return Err(invalid(format!("unknown equation {s:?}"))),
        })
    }
}

/// Boundary values at `x = 0` on a `t`-grid. Which channels are present
/// depends on the equation:
///
/// * dnls, fnls: `h2 = v(0, t)` and `h3 = v_x(0, t)`, each `m1 x m2`;
/// * sge: `h2 = psi(0, t)`, real;
/// * csge: `h2 = psi(0, t)`, `h3 = chi(0, t)` real, the scalar
///   `h4 = omega(0, 0)` and the constant `c`;
/// * nwave: `rho(0, t)` and the diagonal `d_hat`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData<T: Real> {
    pub equation: Equation,
    pub t_grid: Grid<T>,
    pub h2: Vec<CMatrix<T>>,
    pub h3: Vec<CMatrix<T>>,
    pub h4: Option<T>,
    pub c: Option<T>,
    pub rho: Vec<CMatrix<T>>,
    pub d_hat: Vec<T>,
}

impl<T: Real> BoundaryData<T> {
    fn empty(equation: Equation, t_grid: Grid<T>) -> Self {
        Self { equation, t_grid, h2: Vec::new(), h3: Vec::new(), h4: None, c: None, rho: Vec::new(), d_hat: Vec::new() }
    }

    /// dNLS or fNLS data from `v(0, t)` and `v_x(0, t)`.
    pub fn nls(equation: Equation, t_grid: Grid<T>, h2: Vec<CMatrix<T>>, h3: Vec<CMatrix<T>>) -> Result<Self> {
        if !matches!(equation, Equation::Dnls | Equation::Fnls) {
            return Err(invalid("nls boundary data needs dnls or fnls"));
        }
        let out = Self { h2, h3, ..Self::empty(equation, t_grid) };
        out.validate()?;
        Ok(out)
    }

    pub fn sge(t_grid: Grid<T>, h2: &[T]) -> Result<Self> {
        let out = Self { h2: real_channel(h2), ..Self::empty(Equation::Sge, t_grid) };
        out.validate()?;
        Ok(out)
    }

    pub fn csge(t_grid: Grid<T>, h2: &[T], h3: &[T], h4: T, c: T) -> Result<Self> {
        let out = Self { h2: real_channel(h2), h3: real_channel(h3), h4: Some(h4), c: Some(c), ..Self::empty(Equation::Csge, t_grid) };
        out.validate()?;
        Ok(out)
    }

    pub fn nwave(t_grid: Grid<T>, d_hat: Vec<T>, rho: Vec<CMatrix<T>>) -> Result<Self> {
        let out = Self { d_hat, rho, ..Self::empty(Equation::Nwave, t_grid) };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.t_grid.n;
        let sized = |name: &str, v: &[CMatrix<T>]| -> Result<()> {
            if v.len() != n {
                return Err(invalid(format!("channel {name} has {} samples, the t-grid has {n}", v.len())));
            }
            if v.iter().any(|m| m.shape() != v[0].shape()) {
                return Err(invalid(format!("channel {name} changes shape")));
            }
            Ok(())
        };
        let real = |name: &str, v: &[CMatrix<T>]| -> Result<()> {
            sized(name, v)?;
            let tol = T::lit(1e-12);
            if v.iter().any(|m| m.shape() != (1, 1) || m[(0, 0)].im.abs() > tol * (T::one() + m[(0, 0)].re.abs())) {
                return Err(invalid(format!("channel {name} must be real scalar")));
            }
            Ok(())
        };
        match self.equation {
            Equation::Dnls | Equation::Fnls => {
                sized("h2", &self.h2)?;
                sized("h3", &self.h3)?;
                if self.h2[0].shape() != self.h3[0].shape() {
                    return Err(invalid("h2 and h3 must have the same shape"));
                }
            }
            Equation::Sge => real("h2", &self.h2)?,
            Equation::Csge => {
                real("h2", &self.h2)?;
                real("h3", &self.h3)?;
                if self.h4.is_none() || self.c.is_none() {
                    return Err(invalid("csge data needs h4 and c"));
                }
                for (k, h) in self.h2.iter().enumerate() {
                    if (h[(0, 0)].re * T::lit(2.0)).sin().abs() < T::lit(1e-10) {
                        return Err(Error::VanishingSine { t: self.t_grid.node(k).to_f64_lossy() });
                    }
                }
            }
            Equation::Nwave => {
                sized("rho", &self.rho)?;
                let m = self.d_hat.len();
                if m < 2 || self.rho[0].shape() != (m, m) {
                    return Err(invalid("rho must be m x m with m = len(d_hat) >= 2"));
                }
            }
        }
        Ok(())
    }

    /// `(m1, m2)` of the auxiliary system; for N-wave `(m, 0)`.
    pub fn blocks(&self) -> (usize, usize) {
        match self.equation {
            Equation::Dnls | Equation::Fnls => self.h2[0].shape(),
            Equation::Sge | Equation::Csge => (1, 1),
            Equation::Nwave => (self.d_hat.len(), 0),
        }
    }

    /// `d(t) = h3(0) - h4/2 + int_0^t h3'(s) sin(h2(s))^{-2} ds` on the
    /// `t`-grid (csge only).
    pub fn csge_phase(&self) -> Result<Vec<T>> {
        if self.equation != Equation::Csge {
            return Err(Error::WrongKind { expected: "csge" });
        }
        let h2: Vec<T> = self.h2.iter().map(|m| m[(0, 0)].re).collect();
        let h3: Vec<T> = self.h3.iter().map(|m| m[(0, 0)].re).collect();
        let dh3 = central_diff4(&h3, self.t_grid.h)?;
        let integrand: Vec<T> = dh3.iter().zip(&h2).map(|(d, h)| *d / (h.sin() * h.sin())).collect();
        let acc = cumulative_trapezoid(&integrand, self.t_grid.h);
        let base = h3[0] - self.h4.unwrap_or(T::zero()) * T::lit(0.5);
        Ok(acc.into_iter().map(|a| base + a).collect())
    }

    /// `F(0, t_k, z)` at every node of the `t`-grid.
    pub fn generator_samples(&self, z: Complex<T>) -> Result<Vec<CMatrix<T>>> {
        let phase = if self.equation == Equation::Csge { Some(self.csge_phase()?) } else { None };
        (0..self.t_grid.n).map(|k| self.generator_at_node(k, z, phase.as_ref().map(|p| p[k]))).collect()
    }

    fn generator_at_node(&self, k: usize, z: Complex<T>, phase: Option<T>) -> Result<CMatrix<T>> {
        let nwave_rho = if self.equation == Equation::Nwave { Some(&self.rho[k]) } else { None };
        let values = ChannelValues {
            h2: self.h2.get(k),
            h3: self.h3.get(k),
            rho: nwave_rho,
            phase,
        };
        f_from_values(self, &values, z)
    }
}

fn real_channel<T: Real>(h: &[T]) -> Vec<CMatrix<T>> {
    h.iter().map(|&x| CMatrix::from_element(1, 1, Complex::new(x, T::zero()))).collect()
}

struct ChannelValues<'a, T: Real> {
    h2: Option<&'a CMatrix<T>>,
    h3: Option<&'a CMatrix<T>>,
    rho: Option<&'a CMatrix<T>>,
    phase: Option<T>,
}

/// `V = [[0, v], [v*, 0]]`.
fn hermitian_block<T: Real>(v: &CMatrix<T>) -> CMatrix<T> {
    let (m1, m2) = v.shape();
    let mut out = zeros::<T>(m1 + m2, m1 + m2);
    out.view_mut((0, m1), (m1, m2)).copy_from(v);
    out.view_mut((m1, 0), (m2, m1)).copy_from(&v.adjoint());
    out
}

fn sine_gordon_block<T: Real>(psi: T, imag_offdiag: bool) -> CMatrix<T> {
    let (s, c) = ((psi * T::lit(2.0)).sin(), (psi * T::lit(2.0)).cos());
    let off = if imag_offdiag { Complex::new(T::zero(), s) } else { Complex::new(s, T::zero()) };
    let off2 = if imag_offdiag { -off } else { off };
    CMatrix::from_row_slice(2, 2, &[Complex::new(c, T::zero()), off, off2, Complex::new(-c, T::zero())])
}

fn f_from_values<T: Real>(data: &BoundaryData<T>, ch: &ChannelValues<'_, T>, z: Complex<T>) -> Result<CMatrix<T>> {
    let iu = Complex::new(T::zero(), T::one());
    let half = Complex::new(T::lit(0.5), T::zero());
    match data.equation {
        Equation::Dnls | Equation::Fnls => {
            let (v, vx) = (ch.h2.expect("nls channel"), ch.h3.expect("nls channel"));
            let (m1, m2) = v.shape();
            let j = jmat::<T>(m1, m2);
            let vv = hermitian_block(v);
            let vvx = hermitian_block(vx);
            let jv = &j * &vv;
            let jv2 = &jv * &vv;
            let z2 = z * z;
            if data.equation == Equation::Dnls {
                // -i (z^2 j + z jV - (i V_x - j V^2) / 2)
                let inner = &j * z2 + &jv * z - (&vvx * iu - &jv2) * half;
                Ok(inner * (-iu))
            } else {
                // i (z^2 j - i z jV - (V_x + j V^2) / 2)
                let inner = &j * z2 - &jv * (iu * z) - (&vvx + &jv2) * half;
                Ok(inner * iu)
            }
        }
        Equation::Sge => {
            if z.modulus() == T::zero() {
                return Err(Error::PoleAtZ);
            }
            let psi = ch.h2.expect("sge channel")[(0, 0)].re;
            Ok(sine_gordon_block(psi, false) * (Complex::new(T::one(), T::zero()) / (iu * z)))
        }
        Equation::Csge => {
            let c = data.c.expect("validated");
            let w = z + Complex::new(c, T::zero());
            if w.modulus() == T::zero() {
                return Err(Error::PoleAtZ);
            }
            let psi = ch.h2.expect("csge channel")[(0, 0)].re;
            let d = ch.phase.expect("csge phase");
            let e = |s: T| CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![(iu * d * s).exp(), (-iu * d * s).exp()]));
            let m = sine_gordon_block(psi, true);
            Ok(e(-T::one()) * m * e(T::one()) * (Complex::new(T::one(), T::zero()) / (iu * w)))
        }
        Equation::Nwave => {
            let rho = ch.rho.expect("nwave channel");
            let d = &data.d_hat;
            let m = d.len();
            Ok(CMatrix::from_fn(m, m, |i, k| {
                let zeta = rho[(i, k)] * (d[i] - d[k]);
                let diag = if i == k { iu * z * d[i] } else { Complex::new(T::zero(), T::zero()) };
                diag - zeta
            }))
        }
    }
}

/// `F(0, t, z)` for the boundary data, with channels interpolated to `t`.
pub fn build_f<T: Real>(data: &BoundaryData<T>, t: T, z: Complex<T>) -> Result<CMatrix<T>> {
    data.t_grid.check_contains(t)?;
    let g = &data.t_grid;
    let pick = |v: &[CMatrix<T>]| if v.is_empty() { None } else { Some(interp_cubic(g, v, t)) };
    let (h2, h3, rho) = (pick(&data.h2), pick(&data.h3), pick(&data.rho));
    let phase = if data.equation == Equation::Csge { Some(interp_cubic(g, &data.csge_phase()?, t)) } else { None };
    let values = ChannelValues { h2: h2.as_ref(), h3: h3.as_ref(), rho: rho.as_ref(), phase };
    f_from_values(data, &values, z)
}

/// `R(0, t_k, z)` on the nodes of a `t`-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionCoefficients<T: Real> {
    pub equation: Equation,
    pub z: Complex<T>,
    pub t_grid: Grid<T>,
    pub m1: usize,
    pub r: Vec<CMatrix<T>>,
}

impl<T: Real> EvolutionCoefficients<T> {
    pub fn last(&self) -> &CMatrix<T> {
        self.r.last().expect("nonempty coefficients")
    }

    /// Blocks of `R(0, t_k, z)` as a linear-fractional map.
    pub fn moebius(&self, k: usize) -> Result<MoebiusMap<T>> {
        if self.equation == Equation::Nwave {
            return Err(Error::WrongKind { expected: "a two-block system" });
        }
        MoebiusMap::from_matrix(&self.r[k], self.m1)
    }
}

/// Solves `Y' = A(s) Y` with `A` sampled on `grid` (cubic interpolation),
/// substeps chosen from `stepping`, and records `Y` at every node.
pub(crate) fn sampled_transfer<T: Real>(grid: &Grid<T>, samples: &[CMatrix<T>], upto: usize, stepping: &Stepping<T>) -> Result<Vec<CMatrix<T>>> {
    let m = samples[0].nrows();
    let rate = samples[..=upto].iter().map(op_norm).fold(T::zero(), T::max);
    let s = (grid.h * rate / stepping.max_phase).ceil().to_usize().unwrap_or(1).max(1);
    let mut out = Vec::with_capacity(upto + 1);
    out.push(eye::<T>(m));
    if upto == 0 {
        return Ok(out);
    }
    rk4(
        |x, o| o.copy_from(&interp_cubic(grid, samples, x)),
        Side::Left,
        &eye(m),
        grid.x0,
        grid.node(upto),
        upto * s,
        |k, y| {
            if k % s == 0 {
                out.push(y.clone());
            }
        },
    )?;
    Ok(out)
}

pub fn propagate_r<T: Real>(data: &BoundaryData<T>, z: Complex<T>, t1: T, stepping: &Stepping<T>) -> Result<EvolutionCoefficients<T>> {
    data.validate()?;
    data.t_grid.check_contains(t1)?;
    let upto = ((t1 - data.t_grid.x0) / data.t_grid.h).round().to_usize().unwrap_or(0).min(data.t_grid.n - 1);
    let samples = data.generator_samples(z)?;
    let r = sampled_transfer(&data.t_grid, &samples, upto, stepping)?;
    let t_grid = Grid { x0: data.t_grid.x0, h: data.t_grid.h, n: upto + 1 };
    Ok(EvolutionCoefficients { equation: data.equation, z, t_grid, m1: data.blocks().0, r })
}

/// `phi(t, z) = (R21 + R22 phi0)(R11 + R12 phi0)^{-1}` at the last node.
pub fn evolve_weyl<T: Real>(coef: &EvolutionCoefficients<T>, phi0: &CMatrix<T>) -> Result<CMatrix<T>> {
    evolve_weyl_at(coef, coef.r.len() - 1, phi0)
}

pub fn evolve_weyl_at<T: Real>(coef: &EvolutionCoefficients<T>, k: usize, phi0: &CMatrix<T>) -> Result<CMatrix<T>> {
    moebius_apply(&coef.moebius(k)?, phi0)
}

/// Normalized N-wave GW function at time `t` from `R = R(0, t, z)` and the
/// normalized (unit upper triangular) `phi0`.
pub fn nwave_evolve_normalized<T: Real>(r: &CMatrix<T>, phi0: &CMatrix<T>) -> Result<CMatrix<T>> {
    let m = r.nrows();
    if r.shape() != (m, m) || phi0.shape() != (m, m) || m < 2 {
        return Err(invalid("R and phi0 must be square of the same size >= 2"));
    }
    let a = r * phi0;
    let mut out = eye::<T>(m);
    for k in 1..m {
        let num = block(&a, 0, k, k, m - k);
        let den = block(&a, k, k, m - k, m - k);
        let psi = num * guarded_inverse(&den)?;
        for i in 0..k {
            out[(i, k)] = psi[(i, 0)];
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionConfig<T> {
    pub stepping: Stepping<T>,
    /// `epsilon(z)` of the sine-Gordon domain condition; when given, the
    /// condition is enforced on the whole `t`-grid.
    pub sge_epsilon: Option<T>,
}

impl<T: Real> Default for ReductionConfig<T> {
    fn default() -> Self {
        Self { stepping: Stepping::default(), sge_epsilon: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionResult<T: Real> {
    /// `(T, -R22(T)^{-1} R21(T))` for each `T` in the schedule.
    pub estimates: Vec<(T, CMatrix<T>)>,
    /// Norms of successive differences of the estimates.
    pub residuals: Vec<T>,
}

impl<T: Real> ReductionResult<T> {
    pub fn last(&self) -> &CMatrix<T> {
        &self.estimates.last().expect("nonempty schedule").1
    }

    /// Whether the residuals decrease strictly.
    pub fn monotone(&self) -> bool {
        self.residuals.windows(2).all(|w| w[1] < w[0])
    }
}

/// Estimates of `phi(0, z)` from `R(0, T, z)` at the times of `schedule`.
pub fn boundary_reduction_limit<T: Real>(
    data: &BoundaryData<T>,
    z: Complex<T>,
    schedule: &[T],
    config: &ReductionConfig<T>,
) -> Result<ReductionResult<T>> {
    if schedule.is_empty() || schedule.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("T schedule must be nonempty and increasing"));
    }
    match data.equation {
        Equation::Dnls => {
            let bound = data.h2.iter().map(op_norm).fold(T::zero(), T::max);
            if z.im < T::lit(0.5) || z.re > -bound {
                return Err(invalid(format!(
                    "z must satisfy Im z >= 1/2 and Re z <= -{} for dnls",
                    bound.to_f64_lossy()
                )));
            }
        }
        Equation::Sge => {
            if let Some(eps) = config.sge_epsilon {
                for (k, h) in data.h2.iter().enumerate() {
                    let two = h[(0, 0)].re * T::lit(2.0);
                    if (two.cos() - eps) * z.im < (z.re * two.sin()).abs() {
                        return Err(invalid(format!("z violates the sine-Gordon domain condition at t = {}", data.t_grid.node(k).to_f64_lossy())));
                    }
                }
            }
        }
        Equation::Nwave => return Err(Error::WrongKind { expected: "a two-block system" }),
        Equation::Fnls | Equation::Csge => {}
    }
    let last = *schedule.last().expect("nonempty");
    let coef = propagate_r(data, z, last, &config.stepping)?;
    let (m1, m2) = data.blocks();
    let mut estimates = Vec::with_capacity(schedule.len());
    for &t in schedule {
        data.t_grid.check_contains(t)?;
        let k = ((t - data.t_grid.x0) / data.t_grid.h).round().to_usize().unwrap_or(0);
        let r = &coef.r[k];
        let r21 = block(r, m1, 0, m2, m1);
        let r22 = block(r, m1, m1, m2, m2);
        estimates.push((t, -guarded_solve(&r22, &r21)?));
    }
    let residuals = estimates.windows(2).map(|w| op_norm(&(&w[1].1 - &w[0].1))).collect();
    Ok(ReductionResult { estimates, residuals })
}

/// Samples of a solution on a rectangle, `values[it][ix]`; sine-Gordon
/// fields hold `psi`, NLS fields hold `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D<T: Real> {
    pub x_grid: Grid<T>,
    pub t_grid: Grid<T>,
    pub values: Vec<Vec<CMatrix<T>>>,
}

impl<T: Real> Field2D<T> {
    pub fn from_fn(x_grid: Grid<T>, t_grid: Grid<T>, f: impl Fn(T, T) -> CMatrix<T>) -> Self {
        let values = t_grid.nodes().map(|t| x_grid.nodes().map(|x| f(x, t)).collect()).collect();
        Self { x_grid, t_grid, values }
    }

    fn column(&self, ix: usize) -> Vec<CMatrix<T>> {
        self.values.iter().map(|row| row[ix].clone()).collect()
    }

    fn x_derivative_column(&self, ix: usize) -> Result<Vec<CMatrix<T>>> {
        self.values.iter().map(|row| Ok(central_diff4(row, self.x_grid.h)?.swap_remove(ix))).collect()
    }
}

/// `||W(x1, t1) R(0, t1) - R(x1, t1) W(x1, 0)||` for a field on a
/// rectangle; `W` solves the `x`-equation at fixed `t`, `R` the `t`-equation
/// at fixed `x`.
pub fn compatibility_check<T: Real>(
    equation: Equation,
    field: &Field2D<T>,
    z: Complex<T>,
    x1: T,
    t1: T,
    stepping: &Stepping<T>,
) -> Result<T> {
    if !matches!(equation, Equation::Dnls | Equation::Fnls | Equation::Sge) {
        return Err(Error::WrongKind { expected: "dnls, fnls or sge" });
    }
    let (xg, tg) = (&field.x_grid, &field.t_grid);
    if field.values.len() != tg.n || field.values.iter().any(|r| r.len() != xg.n) {
        return Err(invalid("field does not match its grids"));
    }
    xg.check_contains(x1)?;
    tg.check_contains(t1)?;
    let ix = ((x1 - xg.x0) / xg.h).round().to_usize().unwrap_or(0);
    let it = ((t1 - tg.x0) / tg.h).round().to_usize().unwrap_or(0);
    let iu = Complex::new(T::zero(), T::one());

    let x_generators = |row: &[CMatrix<T>]| -> Result<Vec<CMatrix<T>>> {
        let potential: Vec<CMatrix<T>> = match equation {
            Equation::Sge => central_diff4(row, xg.h)?.into_iter().map(|d| -d).collect(),
            _ => row.to_vec(),
        };
        Ok(potential
            .iter()
            .map(|v| {
                let (m1, m2) = v.shape();
                let j = jmat::<T>(m1, m2);
                let jv = &j * hermitian_block(v);
                match equation {
                    // i (z j + j V)
                    Equation::Dnls => (&j * z + jv) * iu,
                    // i z j + j V
                    _ => &j * (iu * z) + jv,
                }
            })
            .collect())
    };
    let t_path = |col: usize| -> Result<CMatrix<T>> {
        let data = match equation {
            Equation::Sge => {
                let h2: Vec<T> = field.column(col).iter().map(|m| m[(0, 0)].re).collect();
                BoundaryData::sge(*tg, &h2)?
            }
            _ => BoundaryData::nls(equation, *tg, field.column(col), field.x_derivative_column(col)?)?,
        };
        let samples = data.generator_samples(z)?;
        Ok(sampled_transfer(tg, &samples, it, stepping)?.swap_remove(it))
    };
    let w_path = |row: usize| -> Result<CMatrix<T>> {
        let samples = x_generators(&field.values[row])?;
        Ok(sampled_transfer(xg, &samples, ix, stepping)?.swap_remove(ix))
    };
    let lhs = w_path(it)? * t_path(0)?;
    let rhs = t_path(ix)? * w_path(0)?;
    Ok(op_norm(&(lhs - rhs)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoursatConfig<T: Real> {
    pub skew: SkewInverseConfig<T>,
    pub truncation: TruncationConfig<T>,
    /// Number of times at which the inverse map is evaluated; `psi` is
    /// interpolated linearly in `t` between them.
    pub t_points: usize,
    pub stepping: Stepping<T>,
    pub workers: usize,
}

impl<T: Real> GoursatConfig<T> {
    pub fn for_offset(m: T) -> Self {
        Self {
            skew: SkewInverseConfig::for_offset(m),
            truncation: TruncationConfig::default(),
            t_points: 8,
            stepping: Stepping::default(),
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoursatSolution<T: Real> {
    pub x_grid: Grid<T>,
    pub t_grid: Grid<T>,
    /// `psi[it][ix]`.
    pub psi: Vec<Vec<T>>,
    /// Times at which the inverse map was evaluated.
    pub sub_times: Vec<T>,
    /// `sup_x |psi_x|` at each of `sub_times`.
    pub sup_psi_x: Vec<T>,
    /// `sup |z^2 (phi(0, z) - phi0 / z)|` on the line, with `phi0` from the
    /// fitted tail.
    pub asymptotic: T,
}

/// Sine-Gordon Goursat problem from `psi(x, 0) = h1` and `psi(0, t) = h2`.
pub fn sge_goursat<T: Real + Send + Sync>(
    x_grid: &Grid<T>,
    h1: &[T],
    t_grid: &Grid<T>,
    h2: &[T],
    config: &GoursatConfig<T>,
) -> Result<GoursatSolution<T>> {
    if h1.len() != x_grid.n || h2.len() != t_grid.n {
        return Err(invalid("h1 and h2 must be sampled on their grids"));
    }
    if x_grid.x0 != T::zero() || t_grid.x0 != T::zero() {
        return Err(invalid("Goursat grids must start at zero"));
    }
    if (h1[0] - h2[0]).abs() > T::lit(1e-8) * (T::one() + h1[0].abs()) {
        return Err(invalid("corner values h1(0) and h2(0) differ"));
    }
    if config.t_points < 2 {
        return Err(invalid("at least two evaluation times are needed"));
    }
    let v: Vec<T> = central_diff4(h1, x_grid.h)?.into_iter().map(|d| -d).collect();
    let pot = DiracPotential::scalar(SystemKind::Skew, *x_grid, |x| {
        Complex::new(interp_cubic(x_grid, &v, x), T::zero())
    })?;
    config.skew.validate(pot.sup_norm())?;
    let (line, _) = sample_line(&pot, config.skew.eta, config.skew.a, config.skew.dxi, &config.truncation, config.workers)?;
    let tail = line.laurent_tail(2);
    let asymptotic = check_asymptotic(&line, &tail[0]);

    let data = BoundaryData::sge(*t_grid, h2)?;
    let nodes: Vec<usize> = (0..config.t_points)
        .map(|j| ((t_grid.n - 1) * j + (config.t_points - 1) / 2) / (config.t_points - 1))
        .collect();
    let evolved: Vec<Result<Vec<CMatrix<T>>>> = par_map(line.values.len(), config.workers, |k| {
        let z = line.z(k);
        let samples = data.generator_samples(z)?;
        let r = sampled_transfer(t_grid, &samples, t_grid.n - 1, &config.stepping)?;
        nodes.iter().map(|&n| moebius_apply(&MoebiusMap::from_matrix(&r[n], 1)?, &line.values[k])).collect()
    });
    let evolved: Vec<Vec<CMatrix<T>>> = evolved.into_iter().collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(nodes.len());
    let mut sup_psi_x = Vec::with_capacity(nodes.len());
    let mut x_out = None;
    for (j, &n) in nodes.iter().enumerate() {
        let values: Vec<CMatrix<T>> = evolved.iter().map(|e| e[j].clone()).collect();
        let line_t = LineSamples::new(line.eta, line.xi, values)?;
        let out = solve_inverse_skew(&line_t, None, &config.skew)?;
        let vt: Vec<T> = out.potential.samples().iter().map(|m| m[(0, 0)].re).collect();
        let g = *out.potential.grid();
        let integral = cumulative_trapezoid(&vt, g.h);
        rows.push(integral.iter().map(|i| h2[n] - *i).collect::<Vec<T>>());
        sup_psi_x.push(vt.iter().fold(T::zero(), |a, b| a.max(b.abs())));
        x_out = Some(g);
    }
    let x_out = x_out.expect("at least two evaluation times");
    let psi = (0..t_grid.n)
        .map(|it| {
            let seg = nodes.windows(2).position(|w| it <= w[1]).unwrap_or(nodes.len() - 2);
            let (a, b) = (nodes[seg], nodes[seg + 1]);
            let w = T::of_usize(it.saturating_sub(a)) / T::of_usize(b - a);
            rows[seg].iter().zip(&rows[seg + 1]).map(|(p, q)| *p * (T::one() - w) + *q * w).collect()
        })
        .collect();
    let sub_times = nodes.iter().map(|&n| t_grid.node(n)).collect();
    Ok(GoursatSolution { x_grid: x_out, t_grid: *t_grid, psi, sub_times, sup_psi_x, asymptotic })
}

/// Outcome of the Denjoy-Carleman test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuasiAnalyticity {
    QuasiAnalytic,
    NotQuasiAnalytic,
    Inconclusive,
}

/// Analytic bound on `L_n` beyond the computed range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TailBound {
    /// `L_n <= c n^p` for all `n`; with `p <= 1` the series diverges.
    Upper { c: f64, p: f64 },
    /// `L_n >= c n^p` for all `n`; with `p > 1` the series converges.
    Lower { c: f64, p: f64 },
}

impl TailBound {
    /// Bounds for `M_k = (k!)^s` from `(k/e)^k <= k! <= k^k`: `L_n` lies
    /// between `(n/e)^s` and `n^s`.
    pub fn stirling(s: f64) -> [TailBound; 2] {
        [TailBound::Upper { c: 1.0, p: s }, TailBound::Lower { c: (-s).exp(), p: s }]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DcReport {
    pub verdict: QuasiAnalyticity,
    /// `sum_{n <= n_max} 1 / L_n`.
    pub partial_sum: f64,
    /// Upper bound on the whole series when convergence is certified.
    pub series_bound: Option<f64>,
    /// Largest violation of the supplied bounds on the computed range
    /// (relative, in log scale); zero when all of them hold.
    pub certificate_violation: f64,
}

/// Denjoy-Carleman test for the class defined by `M_k`, given as
/// `ln M_k` for `k = 1..=n_max` so that fast growing sequences do not
/// overflow. `L_n = inf_{n <= k <= n_max} M_k^{1/k}`; the verdict uses the
/// partial sum and the analytic tail bounds.
pub fn denjoy_carleman(log_mk: &[f64], bounds: &[TailBound]) -> DcReport {
    let n_max = log_mk.len();
    if n_max == 0 {
        return DcReport { verdict: QuasiAnalyticity::Inconclusive, partial_sum: 0.0, series_bound: None, certificate_violation: 0.0 };
    }
    let mut log_l = vec![0.0; n_max];
    let mut run = f64::INFINITY;
    for k in (1..=n_max).rev() {
        run = run.min(log_mk[k - 1] / k as f64);
        log_l[k - 1] = run;
    }
    // The infimum over a truncated range only approximates L_n near n_max;
    // the first half of the range is used for checks.
    let trusted = (n_max / 2).max(1);
    let partial_sum: f64 = log_l.iter().map(|l| (-l).exp()).sum();
    let mut violation: f64 = 0.0;
    let mut diverges = false;
    let mut series_bound = None;
    for b in bounds {
        match *b {
            TailBound::Upper { c, p } => {
                for n in 1..=trusted {
                    let bound = c.ln() + p * (n as f64).ln();
                    violation = violation.max(log_l[n - 1] - bound);
                }
                diverges |= p <= 1.0;
            }
            TailBound::Lower { c, p } => {
                for n in 1..=trusted {
                    let bound = c.ln() + p * (n as f64).ln();
                    violation = violation.max(bound - log_l[n - 1]);
                }
                if p > 1.0 {
                    // sum_{n > N} 1/(c n^p) <= N^{1-p} / (c (p - 1)).
                    let nn = trusted as f64;
                    let head: f64 = log_l[..trusted].iter().map(|l| (-l).exp()).sum();
                    let tail = nn.powf(1.0 - p) / (c * (p - 1.0));
                    series_bound = Some(series_bound.map_or(head + tail, |s: f64| s.min(head + tail)));
                }
            }
        }
    }
    let tol = 1e-9;
    let verdict = if violation > tol {
        QuasiAnalyticity::Inconclusive
    } else if diverges && series_bound.is_none() {
        QuasiAnalyticity::QuasiAnalytic
    } else if series_bound.is_some() && !diverges {
        QuasiAnalyticity::NotQuasiAnalytic
    } else {
        QuasiAnalyticity::Inconclusive
    };
    DcReport { verdict, partial_sum, series_bound, certificate_violation: violation.max(0.0) }
}

/// `ln M_k` for `M_k = (k!)^s`, `k = 1..=n_max`.
pub fn log_factorial_power(s: f64, n_max: usize) -> Vec<f64> {
    let mut acc = 0.0;
    (1..=n_max)
        .map(|k| {
            acc += (k as f64).ln();
            s * acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn scalar(v: C) -> CMatrix<f64> {
        CMatrix::from_element(1, 1, v)
    }

    fn zero_nls(n: usize) -> BoundaryData<f64> {
        let g = Grid::new(0.0, 0.01, n).unwrap();
        BoundaryData::nls(Equation::Dnls, g, vec![scalar(c(0.0, 0.0)); n], vec![scalar(c(0.0, 0.0)); n]).unwrap()
    }

    #[test]
    fn zero_dnls_generator_and_flow() {
        let data = zero_nls(101);
        let z = c(0.3, 0.8);
        let f: CMatrix<f64> = build_f(&data, 0.37, z).unwrap();
        let expect: CMatrix<f64> = jmat::<f64>(1, 1) * (-c(0.0, 1.0) * z * z);
        assert!((&f - expect).norm() < 1e-15);
        let r = propagate_r(&data, z, 1.0, &Stepping::default()).unwrap();
        assert_eq!(r.r[0], eye::<f64>(2));
        let e = (c(0.0, -1.0) * z * z).exp();
        assert!((r.last()[(0, 0)] - e).norm() < 1e-9);
        assert!((r.last()[(1, 1)] - e.inv()).norm() < 1e-9);
        let phi0 = scalar(c(0.2, -0.1));
        let phi = evolve_weyl(&r, &phi0).unwrap();
        let oracle = phi0[(0, 0)] * (c(0.0, 2.0) * z * z).exp();
        assert!((phi[(0, 0)] - oracle).norm() < 1e-9);
        assert!((evolve_weyl_at(&r, 0, &phi0).unwrap() - &phi0).norm() == 0.0);
    }

    #[test]
    fn sge_zero_boundary_generator() {
        let g = Grid::new(0.0, 0.1, 5).unwrap();
        let data = BoundaryData::sge(g, &[0.0; 5]).unwrap();
        let z = c(0.5, 2.0);
        let f: CMatrix<f64> = build_f(&data, 0.2, z).unwrap();
        let expect: CMatrix<f64> = jmat::<f64>(1, 1) * (c(1.0, 0.0) / (c(0.0, 1.0) * z));
        assert!((&f - expect).norm() < 1e-15);
        assert_eq!(build_f(&data, 0.2, c(0.0, 0.0)), Err(Error::PoleAtZ));
    }

    #[test]
    fn csge_phase_is_constant_for_constant_chi() {
        let g = Grid::new(0.0, 0.05, 21).unwrap();
        let data = BoundaryData::csge(g, &[0.4; 21], &[0.7; 21], 0.2, 1.0).unwrap();
        for d in data.csge_phase().unwrap() {
            assert!((d - 0.6).abs() < 1e-14);
        }
        assert!(matches!(BoundaryData::csge(g, &[0.0; 21], &[0.7; 21], 0.2, 1.0), Err(Error::VanishingSine { .. })));
        assert_eq!(build_f(&data, 0.1, c(-1.0, 0.0)), Err(Error::PoleAtZ));
    }

    #[test]
    fn constant_generator_matches_exponential() {
        let g = Grid::new(0.0, 0.02, 51).unwrap();
        let rho = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]);
        let data = BoundaryData::nwave(g, vec![2.0, 1.0], vec![rho; 51]).unwrap();
        let z = c(0.4, -0.5);
        let r = propagate_r(&data, z, 1.0, &Stepping::default()).unwrap();
        let a = build_f(&data, 0.0, z).unwrap();
        let expm = a.clone().exp();
        assert!((r.last() - &expm).norm() < 1e-7);
    }

    #[test]
    fn restarted_propagation_composes() {
        let n = 101;
        let g = Grid::new(0.0, 0.01, n).unwrap();
        let v = |t: f64| scalar(c(0.3 * t.sin(), 0.1 * t));
        let vx = |t: f64| scalar(c(0.2, -0.1 * t.cos()));
        let data = BoundaryData::nls(Equation::Dnls, g, g.nodes().map(v).collect(), g.nodes().map(vx).collect()).unwrap();
        let z = c(0.5, 1.0);
        let full = propagate_r(&data, z, 1.0, &Stepping::default()).unwrap();
        let g2 = Grid::new(0.5, 0.01, 51).unwrap();
        let late = BoundaryData::nls(Equation::Dnls, g2, g2.nodes().map(v).collect(), g2.nodes().map(vx).collect()).unwrap();
        let second = propagate_r(&late, z, 1.0, &Stepping::default()).unwrap();
        let composed = second.last() * &full.r[50];
        assert!((full.last() - composed).norm() < 1e-9);
    }

    /// Unit upper `U` with `a = U L`, `L` lower, via LU of the flipped matrix.
    fn ul_oracle(a: &CMatrix<f64>) -> CMatrix<f64> {
        let m = a.nrows();
        let flip = CMatrix::from_fn(m, m, |i, k| a[(m - 1 - i, m - 1 - k)]);
        // Doolittle without pivoting: flip = L U with unit lower L.
        let mut l = eye::<f64>(m);
        let mut u = flip.clone();
        for k in 0..m {
            for i in k + 1..m {
                let f = u[(i, k)] / u[(k, k)];
                l[(i, k)] = f;
                for j in 0..m {
                    let t = u[(k, j)];
                    u[(i, j)] -= f * t;
                }
            }
        }
        CMatrix::from_fn(m, m, |i, k| l[(m - 1 - i, m - 1 - k)])
    }

    #[test]
    fn nwave_normalized_evolution_matches_renormalization() {
        for m in [2usize, 3] {
            let r = CMatrix::<f64>::from_fn(m, m, |i, k| c(1.0 + (i * m + k) as f64 * 0.1, 0.05 * (i as f64 - k as f64)) + if i == k { c(2.0, 0.0) } else { c(0.0, 0.0) });
            let mut phi0 = eye::<f64>(m);
            for k in 1..m {
                for i in 0..k {
                    phi0[(i, k)] = c(0.2 * (i + 1) as f64, -0.1 * k as f64);
                }
            }
            let phi = nwave_evolve_normalized(&r, &phi0).unwrap();
            let oracle = ul_oracle(&(&r * &phi0));
            assert!((&phi - &oracle).norm() < 1e-12, "m = {m}");
            for i in 0..m {
                assert_eq!(phi[(i, i)], c(1.0, 0.0));
                for k in 0..i {
                    assert_eq!(phi[(i, k)], c(0.0, 0.0));
                }
            }
            assert_eq!(nwave_evolve_normalized(&eye(m), &phi0).unwrap(), phi0);
        }
    }

    #[test]
    fn reduction_on_zero_data_is_zero() {
        let data = zero_nls(501);
        let res = boundary_reduction_limit(&data, c(-1.0, 1.0), &[1.0, 2.0, 5.0], &ReductionConfig::default()).unwrap();
        assert!(res.last().norm() < 1e-15);
        assert!(boundary_reduction_limit(&data, c(1.0, 1.0), &[1.0], &ReductionConfig::default()).is_err());
        assert!(boundary_reduction_limit(&data, c(-1.0, 0.2), &[1.0], &ReductionConfig::default()).is_err());
    }

    #[test]
    fn zero_field_is_compatible() {
        let xg = Grid::new(0.0, 0.05, 21).unwrap();
        let tg = Grid::new(0.0, 0.05, 11).unwrap();
        let field = Field2D::from_fn(xg, tg, |_, _| scalar(c(0.0, 0.0)));
        let res = compatibility_check(Equation::Dnls, &field, c(0.0, 2.0), 1.0, 0.5, &Stepping::default()).unwrap();
        assert!(res < 1e-10);
        assert!(compatibility_check(Equation::Csge, &field, c(0.0, 2.0), 1.0, 0.5, &Stepping::default()).is_err());
    }

    #[test]
    fn denjoy_carleman_classics() {
        let n = 200;
        let one = denjoy_carleman(&vec![0.0; n], &TailBound::stirling(0.0));
        assert_eq!(one.verdict, QuasiAnalyticity::QuasiAnalytic);
        assert!((one.partial_sum - n as f64).abs() < 1e-9);
        let fact = denjoy_carleman(&log_factorial_power(1.0, n), &TailBound::stirling(1.0));
        assert_eq!(fact.verdict, QuasiAnalyticity::QuasiAnalytic);
        let sq = denjoy_carleman(&log_factorial_power(2.0, n), &TailBound::stirling(2.0));
        assert_eq!(sq.verdict, QuasiAnalyticity::NotQuasiAnalytic);
        assert!(sq.partial_sum <= sq.series_bound.unwrap());
        let wrong = denjoy_carleman(&log_factorial_power(2.0, n), &[TailBound::Upper { c: 1.0, p: 1.0 }]);
        assert_eq!(wrong.verdict, QuasiAnalyticity::Inconclusive);
        assert_eq!(denjoy_carleman(&log_factorial_power(1.0, n), &[]).verdict, QuasiAnalyticity::Inconclusive);
    }

    #[test]
    fn trivial_goursat_data_give_zero() {
        let xg = Grid::new(0.0, 0.05, 41).unwrap();
        let tg = Grid::new(0.0, 0.05, 5).unwrap();
        let mut cfg = GoursatConfig::for_offset(0.0);
        cfg.skew.a = 10.0;
        cfg.skew.dxi = 0.5;
        cfg.skew.inverse.h = 0.05;
        cfg.skew.inverse.length = 0.5;
        cfg.t_points = 3;
        let sol = sge_goursat(&xg, &[0.0; 41], &tg, &[0.0; 5], &cfg).unwrap();
        assert_eq!(sol.psi.len(), 5);
        assert!(sol.psi.iter().flatten().all(|p| p.abs() < 1e-12));
    }
}
