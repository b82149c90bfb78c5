//! Time-domain Dirac system `i Y_t + J Y_x + V Y = 0` with boundary control
//! `Y_1(0, t) = f(t)`: a characteristic-lattice simulator, extraction of the
//! response function, its links to the Weyl and Herglotz functions of the
//! spectral system, the inverse problem, and explicit solutions.
//!
//! Only the scalar case is covered; `p` and `q` are real.

use nalgebra::ComplexField;
use num_complex::Complex;

use crate::dirac::{DiracPotential, SystemKind};
use crate::error::{invalid, Error, Result};
use crate::inverse_sa::{solve_inverse, InverseConfig, InverseResult};
use crate::numerics::{
    central_diff4, fd_weights, guarded_solve, hermitian_min_eigenvalue, interp_cubic, op_norm, uniform_derivative, CMatrix, Grid, LineSamples,
    Real,
};

fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

fn iu<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// `V = [[p, q], [q, -p]]` sampled on a grid starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDomainPotential<T: Real> {
    pub grid: Grid<T>,
    pub p: Vec<T>,
    pub q: Vec<T>,
}

impl<T: Real> TimeDomainPotential<T> {
    pub fn new(grid: Grid<T>, p: Vec<T>, q: Vec<T>) -> Result<Self> {
        if grid.x0 != T::zero() {
            return Err(invalid("time-domain potential grid must start at zero"));
        }
        if p.len() != grid.n || q.len() != grid.n {
            return Err(invalid(format!("expected {} samples of p and q", grid.n)));
        }
        if !p.iter().chain(&q).all(|x| x.is_finite()) {
            return Err(Error::NonFinite("p, q"));
        }
        Ok(Self { grid, p, q })
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn(T) -> (T, T)) -> Result<Self> {
        let (p, q) = grid.nodes().map(f).unzip();
        Self::new(grid, p, q)
    }

    pub fn zero(grid: Grid<T>) -> Result<Self> {
        Self::new(grid, vec![T::zero(); grid.n], vec![T::zero(); grid.n])
    }

    /// From the spectral potential `v = i q - p`.
    pub fn from_v(grid: Grid<T>, v: &[Complex<T>]) -> Result<Self> {
        Self::new(grid, v.iter().map(|v| -v.re).collect(), v.iter().map(|v| v.im).collect())
    }

    pub fn v(&self) -> Vec<Complex<T>> {
        self.p.iter().zip(&self.q).map(|(&p, &q)| Complex::new(-p, q)).collect()
    }

    /// The equivalent scalar selfadjoint spectral system.
    pub fn to_dirac(&self) -> Result<DiracPotential<T>> {
        let v = self.v().into_iter().map(|v| CMatrix::from_element(1, 1, v)).collect();
        DiracPotential::new(SystemKind::SelfAdjoint, 1, 1, self.grid, v)
    }

    /// `sup ||V(x)|| = sup sqrt(p^2 + q^2)`.
    pub fn sup_norm(&self) -> T {
        self.p.iter().zip(&self.q).map(|(&p, &q)| (p * p + q * q).sqrt()).fold(T::zero(), T::max)
    }

    /// Exponent `M = 2 sqrt(2) sup ||V||` of the growth bounds.
    pub fn growth_rate(&self) -> T {
        T::lit(2.0 * std::f64::consts::SQRT_2) * self.sup_norm()
    }
}

/// Boundary control `f` on a `t`-grid starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryControl<T: Real> {
    pub t_grid: Grid<T>,
    pub f: Vec<Complex<T>>,
}

impl<T: Real> BoundaryControl<T> {
    /// Checks `f(0) = 0` and that the one-sided difference at zero is
    /// small against the largest difference quotient, i.e. `f'(0) = 0`
    /// up to `O(h)`.
    pub fn new(t_grid: Grid<T>, f: Vec<Complex<T>>) -> Result<Self> {
        if t_grid.x0 != T::zero() {
            return Err(invalid("control grid must start at zero"));
        }
        if f.len() != t_grid.n || f.len() < 3 {
            return Err(invalid("control needs one sample per node and at least 3 nodes"));
        }
        if !f.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("control"));
        }
        let scale = f.iter().map(|z| z.modulus()).fold(T::zero(), T::max);
        if f[0].modulus() > T::lit(1e-12) * scale.max(T::one()) {
            return Err(invalid("control must vanish at t = 0"));
        }
        let h = t_grid.h;
        let d0 = (f[1] * T::lit(4.0) - f[2] - f[0] * T::lit(3.0)).modulus() / (T::lit(2.0) * h);
        let dmax = f.windows(2).map(|w| (w[1] - w[0]).modulus() / h).fold(T::zero(), T::max);
        if d0 > h * dmax.max(T::eps()) {
            return Err(invalid("control must have vanishing derivative at t = 0"));
        }
        Ok(Self { t_grid, f })
    }

    /// The probe `f(t) = amplitude * t^2 e^{-t}`.
    pub fn probe(t_grid: Grid<T>, amplitude: T) -> Result<Self> {
        Self::new(t_grid, t_grid.nodes().map(|t| Complex::new(probe(amplitude, t), T::zero())).collect())
    }
}

fn probe<T: Real>(a: T, t: T) -> T {
    a * t * t * (-t).exp()
}

fn probe_third<T: Real>(a: T, t: T) -> T {
    a * (T::lit(-6.0) + T::lit(6.0) * t - t * t) * (-t).exp()
}

/// Solution on the lattice `{(j h, k h)}`, `0 <= j, k <= steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation<T: Real> {
    pub grid: Grid<T>,
    y1: Vec<Complex<T>>,
    y2: Vec<Complex<T>>,
    /// `max ||Y(x, t)|| / (c0 e^{M t})` with `c0 = sup ||f [1; i]||`.
    pub growth_ratio: T,
}

impl<T: Real> Simulation<T> {
    pub fn steps(&self) -> usize {
        self.grid.n - 1
    }

    /// `Y(x_j, t_k)`.
    pub fn at(&self, j: usize, k: usize) -> [Complex<T>; 2] {
        let i = k * self.grid.n + j;
        [self.y1[i], self.y2[i]]
    }

    /// `Y_2(0, t_k)` for all `k`.
    pub fn boundary_output(&self) -> Vec<Complex<T>> {
        (0..self.grid.n).map(|k| self.at(0, k)[1]).collect()
    }
}

/// Lattice march in the characteristic variables `A = (Y_1 + i Y_2)/2`,
/// `B = (Y_1 - i Y_2)/2`, which satisfy `A_t - A_x = (ip - q) B` and
/// `B_t + B_x = (ip + q) A`. Each new node is the implicit trapezoid
/// update along its two characteristics, so a node only ever sees the
/// nodes `(j - 1, k)` and `(j + 1, k)`.
fn march<T: Real>(pot: &TimeDomainPotential<T>, f: &[Complex<T>], mut visit: impl FnMut(usize, &[Complex<T>], &[Complex<T>])) -> Result<()> {
    let n = f.len();
    let half = pot.grid.h * T::lit(0.5);
    let ca: Vec<Complex<T>> = (0..n).map(|j| Complex::new(-pot.q[j], pot.p[j]) * half).collect();
    let cb: Vec<Complex<T>> = (0..n).map(|j| Complex::new(pot.q[j], pot.p[j]) * half).collect();
    let one = Complex::new(T::one(), T::zero());
    let inv: Vec<Complex<T>> = (0..n)
        .map(|j| if j == 0 { one / (one + ca[0]) } else { one / (one - ca[j] * cb[j]) })
        .collect();
    let mut a = vec![zero::<T>(); n];
    let mut b = vec![zero::<T>(); n];
    let mut an = a.clone();
    let mut bn = b.clone();
    visit(0, &a, &b);
    for k in 1..n {
        let incoming = |j: usize, a: &[Complex<T>], b: &[Complex<T>]| if j + 1 < n { a[j + 1] + ca[j + 1] * b[j + 1] } else { zero() };
        let alpha = incoming(0, &a, &b);
        an[0] = (alpha + ca[0] * f[k]) * inv[0];
        bn[0] = f[k] - an[0];
        for j in 1..n {
            let alpha = incoming(j, &a, &b);
            let beta = b[j - 1] + cb[j - 1] * a[j - 1];
            an[j] = (alpha + ca[j] * beta) * inv[j];
            bn[j] = beta + cb[j] * an[j];
        }
        if !an.iter().chain(&bn).all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("lattice solution"));
        }
        std::mem::swap(&mut a, &mut an);
        std::mem::swap(&mut b, &mut bn);
        visit(k, &a, &b);
    }
    Ok(())
}

fn lattice_steps<T: Real>(pot: &TimeDomainPotential<T>, control: &BoundaryControl<T>, t_end: T) -> Result<usize> {
    let h = pot.grid.h;
    if (control.t_grid.h - h).abs() > h * T::lit(1e-9) {
        return Err(invalid("the lattice needs equal steps in x and t"));
    }
    if !(t_end > T::zero()) {
        return Err(invalid("final time must be positive"));
    }
    let steps = (t_end / h).round().to_usize().unwrap_or(0);
    if steps < 2 {
        return Err(Error::GridTooSmall { n: steps + 1, min: 3 });
    }
    if control.t_grid.n <= steps {
        return Err(Error::OutOfGrid { x: t_end.to_f64_lossy(), lo: 0.0, hi: control.t_grid.end().to_f64_lossy() });
    }
    if pot.grid.n <= steps {
        return Err(invalid(format!(
            "potential must be sampled on [0, {}] to cover the lattice",
            t_end.to_f64_lossy()
        )));
    }
    Ok(steps)
}

/// Solves the controlled system on the characteristic lattice up to
/// `t_end`; the lattice step is the step of the potential grid.
pub fn simulate<T: Real>(pot: &TimeDomainPotential<T>, control: &BoundaryControl<T>, t_end: T) -> Result<Simulation<T>> {
    let steps = lattice_steps(pot, control, t_end)?;
    let n = steps + 1;
    let grid = Grid::new(T::zero(), pot.grid.h, n)?;
    let mut y1 = Vec::with_capacity(n * n);
    let mut y2 = Vec::with_capacity(n * n);
    let m = pot.growth_rate();
    let c0 = control.f[..n].iter().map(|z| z.modulus()).fold(T::zero(), T::max) * T::lit(std::f64::consts::SQRT_2);
    let mut growth = T::zero();
    march(pot, &control.f[..n], |k, a, b| {
        let bound = c0 * (m * grid.node(k)).exp();
        for j in 0..n {
            let (u1, u2) = (a[j] + b[j], iu::<T>() * (b[j] - a[j]));
            if bound > T::zero() {
                growth = growth.max((u1.norm_sqr() + u2.norm_sqr()).sqrt() / bound);
            }
            y1.push(u1);
            y2.push(u2);
        }
    })?;
    Ok(Simulation { grid, y1, y2, growth_ratio: growth })
}

/// Response function `r` on a `t`-grid: `Y_2(0, .) = i f + r * f`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseKernel<T: Real> {
    pub t_grid: Grid<T>,
    pub r: Vec<Complex<T>>,
}

impl<T: Real> ResponseKernel<T> {
    pub fn new(t_grid: Grid<T>, r: Vec<Complex<T>>) -> Result<Self> {
        if t_grid.x0 != T::zero() || r.len() != t_grid.n || t_grid.n < 6 {
            return Err(invalid("response needs at least 6 samples on a grid starting at zero"));
        }
        if !r.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("response function"));
        }
        Ok(Self { t_grid, r })
    }

    pub fn from_fn(t_grid: Grid<T>, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        Self::new(t_grid, t_grid.nodes().map(f).collect())
    }

    /// `max |r(t)| / (M e^{M t})`, at most one when the kernel bound holds.
    pub fn growth_ratio(&self, m: T) -> T {
        self.t_grid
            .nodes()
            .zip(&self.r)
            .map(|(t, r)| r.modulus() / (m * (m * t).exp()).max(T::eps()))
            .fold(T::zero(), T::max)
    }
}

/// Integrals of the Lagrange basis on the unit nodes `0..m` over `[0, upto]`.
fn lagrange_integrals<T: Real>(m: usize, upto: T) -> Vec<T> {
    (0..m)
        .map(|i| {
            let mut coef = vec![T::one()];
            for j in (0..m).filter(|&j| j != i) {
                let d = T::of_usize(i) - T::of_usize(j);
                let mut next = vec![T::zero(); coef.len() + 1];
                for (p, c) in coef.iter().enumerate() {
                    next[p + 1] += *c / d;
                    next[p] -= *c * T::of_usize(j) / d;
                }
                coef = next;
            }
            coef.iter().enumerate().fold(T::zero(), |acc, (p, c)| acc + *c * upto.powi(p as i32 + 1) / T::of_usize(p + 1))
        })
        .collect()
}

/// Fourth-order weights `(node, weight)` for `int_0^{t_k}`: Gregory's end
/// corrections from five intervals on, a five-node Lagrange rule (which
/// reaches past `t_k`) before that.
struct ConvRule<T> {
    h: T,
    start: Vec<Vec<T>>,
}

const START: usize = 5;

impl<T: Real> ConvRule<T> {
    fn new(h: T) -> Self {
        let start = (0..START).map(|k| lagrange_integrals(START, T::of_usize(k)).into_iter().map(|w| w * h).collect()).collect();
        Self { h, start }
    }

    fn row(&self, k: usize) -> Vec<(usize, T)> {
        if k < START {
            return self.start[k].iter().copied().enumerate().collect();
        }
        let g = [T::lit(3.0 / 8.0), T::lit(7.0 / 6.0), T::lit(23.0 / 24.0)];
        (0..=k)
            .map(|i| {
                let e = i.min(k - i);
                (i, if e < 3 { g[e] * self.h } else { self.h })
            })
            .collect()
    }
}

/// `(K * u)(t_k) = int_0^{t_k} K(t_k - s) u(s) ds`; `kernel` must accept
/// small negative arguments.
pub fn convolve<T: Real>(kernel: impl Fn(T) -> Complex<T>, u: &[Complex<T>], h: T) -> Result<Vec<Complex<T>>> {
    if u.len() < START + 1 {
        return Err(Error::GridTooSmall { n: u.len(), min: START + 1 });
    }
    let rule = ConvRule::new(h);
    let kt: Vec<Complex<T>> = (0..u.len()).map(|j| kernel(T::of_usize(j) * h)).collect();
    Ok((0..u.len())
        .map(|k| {
            rule.row(k).into_iter().fold(zero(), |acc, (i, w)| {
                let kv = if i <= k { kt[k - i] } else { kernel((T::of_usize(k) - T::of_usize(i)) * h) };
                acc + kv * u[i] * w
            })
        })
        .collect())
}

/// Solves `lead u(t) + (K * u)(t) = rhs(t)` with the rule of [`convolve`].
pub fn volterra_second_kind<T: Real>(lead: Complex<T>, kernel: impl Fn(T) -> Complex<T>, rhs: &[Complex<T>], h: T) -> Result<Vec<Complex<T>>> {
    let n = rhs.len();
    if n < START + 1 {
        return Err(Error::GridTooSmall { n, min: START + 1 });
    }
    let rule = ConvRule::new(h);
    let kt: Vec<Complex<T>> = (0..n).map(|j| kernel(T::of_usize(j) * h)).collect();
    let kval = |k: usize, i: usize| if i <= k { kt[k - i] } else { kernel((T::of_usize(k) - T::of_usize(i)) * h) };
    let mut u = vec![zero::<T>(); n];
    u[0] = rhs[0] / lead;
    let m = START - 1;
    let mut a = CMatrix::<T>::zeros(m, m);
    let mut b = CMatrix::<T>::zeros(m, 1);
    for k in 1..START {
        b[(k - 1, 0)] = rhs[k];
        for (i, w) in rule.row(k) {
            let c = kval(k, i) * w;
            if i == 0 {
                b[(k - 1, 0)] -= c * u[0];
            } else {
                a[(k - 1, i - 1)] += c;
            }
        }
        a[(k - 1, k - 1)] += lead;
    }
    let first = guarded_solve(&a, &b)?;
    for k in 1..START {
        u[k] = first[(k - 1, 0)];
    }
    for k in START..n {
        let row = rule.row(k);
        let mut acc = rhs[k];
        let mut diag = lead;
        for (i, w) in row {
            if i == k {
                diag += kt[0] * w;
            } else {
                acc -= kt[k - i] * u[i] * w;
            }
        }
        u[k] = acc / diag;
    }
    if !u.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("Volterra solution"));
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractConfig<T> {
    /// Final time; defaults to the end of the potential grid.
    pub t_end: Option<T>,
    /// Amplitude `a` of the probe `a t^2 e^{-t}`.
    pub amplitude: T,
}

impl<T: Real> Default for ExtractConfig<T> {
    fn default() -> Self {
        Self { t_end: None, amplitude: T::one() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseExtraction<T: Real> {
    pub kernel: ResponseKernel<T>,
    pub control: BoundaryControl<T>,
    pub amplitude: T,
    /// Simulated `Y_2(0, t)` on the lattice of the potential grid.
    pub output: Vec<Complex<T>>,
    /// `Y_2(0, t)` at every second node, extrapolated from the lattices
    /// with steps `h` and `2h`.
    pub output_extrapolated: Vec<Complex<T>>,
}

impl<T: Real> ResponseExtraction<T> {
    /// `max |i f + r * f - Y_2(0, .)|` over the nodes of the extrapolated
    /// output.
    pub fn round_trip_residual(&self) -> Result<T> {
        let h = self.kernel.t_grid.h;
        let conv = convolve(|t| Complex::new(probe(self.amplitude, t), T::zero()), &self.kernel.r, h)?;
        Ok(self
            .output_extrapolated
            .iter()
            .enumerate()
            .map(|(k, y)| (iu::<T>() * self.control.f[2 * k] + conv[2 * k] - *y).modulus())
            .fold(T::zero(), T::max))
    }
}

/// Nodes at the start of a deconvolved kernel that are replaced by
/// extrapolation: there the third difference only has one-sided stencils,
/// which pick up the corner layer of the lattice solution at `(0, 0)`.
const LAYER: usize = 3;

/// Deconvolution on one lattice; returns `(r, Y_2(0, .))`.
fn deconvolve<T: Real>(pot: &TimeDomainPotential<T>, amp: T, steps: usize) -> Result<(Vec<Complex<T>>, Vec<Complex<T>>)> {
    let h = pot.grid.h;
    let control = BoundaryControl::probe(Grid::new(T::zero(), h, steps + 1)?, amp)?;
    let mut output = Vec::with_capacity(steps + 1);
    march(pot, &control.f, |_, a, b| output.push(iu::<T>() * (b[0] - a[0])))?;
    let g: Vec<Complex<T>> = output.iter().zip(&control.f).map(|(y, f)| *y - iu::<T>() * *f).collect();
    let g3 = uniform_derivative(&g, h, 3, 7)?;
    let lead = Complex::new(T::lit(2.0) * amp, T::zero());
    let mut r = volterra_second_kind(lead, |t| Complex::new(probe_third(amp, t), T::zero()), &g3, h)?;
    let nodes: Vec<T> = (LAYER..LAYER + 4).map(T::of_usize).collect();
    for k in 0..LAYER {
        let w = fd_weights(T::of_usize(k), &nodes, 0);
        r[k] = w.iter().enumerate().fold(zero(), |acc, (i, wi)| acc + r[LAYER + i] * wi[0]);
    }
    Ok((r, output))
}

/// Response function of the system from probe simulations.
///
/// With `g = Y_2(0, .) - i f = r * f` and `f(0) = f'(0) = 0`, three
/// derivatives give the second-kind equation `f''(0) r + r * f''' = g'''`,
/// which is solved by forward substitution. This is done on the lattice of
/// the potential grid and on the one with twice its step, and the two
/// kernels are combined by Richardson extrapolation, which removes the
/// `O(h^2)` error of the lattice scheme.
pub fn extract_response<T: Real>(pot: &TimeDomainPotential<T>, config: &ExtractConfig<T>) -> Result<ResponseExtraction<T>> {
    let amp = config.amplitude;
    let lead = T::lit(2.0) * amp;
    if !(lead.abs() > T::lit(1e-8)) {
        return Err(Error::IllConditionedProbe { ratio: lead.abs().to_f64_lossy() });
    }
    let t_end = config.t_end.unwrap_or_else(|| pot.grid.end());
    let h = pot.grid.h;
    let steps = (t_end / h).round().to_usize().unwrap_or(0);
    let t_grid = Grid::new(T::zero(), h, steps + 1)?;
    let control = BoundaryControl::probe(t_grid, amp)?;
    lattice_steps(pot, &control, t_end)?;
    let half = steps / 2;
    if half < 2 * START {
        return Err(Error::GridTooSmall { n: steps + 1, min: 4 * START + 1 });
    }
    let coarse = TimeDomainPotential::new(
        Grid::new(T::zero(), h * T::lit(2.0), half + 1)?,
        pot.p.iter().step_by(2).take(half + 1).copied().collect(),
        pot.q.iter().step_by(2).take(half + 1).copied().collect(),
    )?;
    let fine = TimeDomainPotential::new(t_grid, pot.p[..=steps].to_vec(), pot.q[..=steps].to_vec())?;
    let (fine_r, output) = deconvolve(&fine, amp, steps)?;
    let (coarse_r, coarse_out) = deconvolve(&coarse, amp, half)?;
    let third = T::one() / T::lit(3.0);
    let correction: Vec<Complex<T>> = (0..=half).map(|k| (fine_r[2 * k] - coarse_r[k]) * third).collect();
    let r = (0..=steps).map(|k| fine_r[k] + interp_cubic(&coarse.grid, &correction, t_grid.node(k))).collect();
    let output_extrapolated = (0..=half).map(|k| output[2 * k] + (output[2 * k] - coarse_out[k]) * third).collect();
    Ok(ResponseExtraction { kernel: ResponseKernel::new(t_grid, r)?, control, amplitude: amp, output, output_extrapolated })
}

/// Largest accepted tail of the Laplace integral relative to `1 + |r^|`.
const TAIL_TOL: f64 = 1e-2;

/// `int_0^{t_end} e^{izt} u(t) dt` for the piecewise-linear interpolant of
/// `u`, integrated exactly so that large `Re z` is harmless. Also returns
/// `e^{iz t_end}`.
fn filon<T: Real>(u: &[Complex<T>], h: T, z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let w = iu::<T>() * z * h;
    let one = Complex::new(T::one(), T::zero());
    let (e1, a1) = if w.modulus() < T::lit(1e-2) {
        let p = |c: [f64; 5]| c.iter().rev().fold(zero::<T>(), |acc, &ci| acc * w + Complex::new(T::lit(ci), T::zero()));
        (p([1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0, 1.0 / 120.0]), p([0.5, 1.0 / 3.0, 0.125, 1.0 / 30.0, 1.0 / 144.0]))
    } else {
        let ew = w.exp();
        ((ew - one) / w, ((w - one) * ew + one) / (w * w))
    };
    let (a1, a0) = (a1 * h, (e1 - a1) * h);
    let step = w.exp();
    let mut phase = one;
    let mut acc = zero::<T>();
    for k in 0..u.len().saturating_sub(1) {
        acc += phase * (a0 * u[k] + a1 * u[k + 1]);
        phase *= step;
    }
    (acc, phase)
}

/// `r^(z) = int_0^inf e^{izt} r(t) dt`: the grid part by [`filon`], plus
/// the tail of an exponential fitted to the last two samples. Returns
/// `(r^, |tail|)`.
pub fn laplace<T: Real>(r: &ResponseKernel<T>, z: Complex<T>) -> Result<(Complex<T>, T)> {
    let h = r.t_grid.h;
    let n = r.t_grid.n;
    let (acc, phase) = filon(&r.r, h, z);
    let last = r.r[n - 1];
    let tail = if last.modulus() == T::zero() {
        zero()
    } else {
        let prev = r.r[n - 2];
        let lambda = if prev.modulus() == T::zero() { None } else { Some((last / prev).ln() / h) };
        match lambda.map(|l| iu::<T>() * z + l) {
            Some(rate) if rate.re < T::zero() => -(last * phase) / rate,
            _ => return Err(Error::TailTooLarge { deviation: f64::INFINITY, tol: TAIL_TOL }),
        }
    };
    let value = acc + tail;
    let tmag = tail.modulus();
    if tmag > T::lit(TAIL_TOL) * (T::one() + value.modulus()) {
        return Err(Error::TailTooLarge { deviation: tmag.to_f64_lossy(), tol: TAIL_TOL });
    }
    Ok((value, tmag))
}

fn scalar<T: Real>(v: Complex<T>) -> CMatrix<T> {
    CMatrix::from_element(1, 1, v)
}

/// `phi(z) = r^(z) / (r^(z) + 2i)`, the Weyl function of the spectral
/// system with `v = i q - p`.
pub fn weyl_from_response<T: Real>(r: &ResponseKernel<T>, z: Complex<T>) -> Result<CMatrix<T>> {
    if !(z.im > T::zero()) {
        return Err(invalid("z must lie in the upper half-plane"));
    }
    let (rh, _) = laplace(r, z)?;
    let den = rh + Complex::new(T::zero(), T::lit(2.0));
    if den.modulus() <= T::eps() {
        return Err(Error::SingularDenominator { cond: f64::INFINITY });
    }
    Ok(scalar(rh / den))
}

/// `phi_H(z) = r^(z) + i`.
pub fn herglotz_from_response<T: Real>(r: &ResponseKernel<T>, z: Complex<T>) -> Result<CMatrix<T>> {
    if !(z.im > T::zero()) {
        return Err(invalid("z must lie in the upper half-plane"));
    }
    Ok(scalar(laplace(r, z)?.0 + iu::<T>()))
}

/// Accelerant `s~'` on a grid starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Accelerant<T: Real> {
    pub grid: Grid<T>,
    pub s_prime: Vec<Complex<T>>,
}

impl<T: Real> Accelerant<T> {
    /// `r(t) = 2i conj(s~'(t))`.
    pub fn response(&self) -> Vec<Complex<T>> {
        self.s_prime.iter().map(|s| Complex::new(T::zero(), T::lit(2.0)) * s.conj()).collect()
    }
}

/// `s~(x)^* = (1/4 pi) T[(phi_H - i)/z](x)` from Herglotz samples on a
/// line, where `T` is the line transform, followed by one difference in
/// `x`. The part `i/z^2` of `phi_H/z^2` only adds a linear term to the
/// inner integral and is dropped; the leading Laurent terms of `phi_H - i`
/// are transformed exactly.
pub fn accelerant_from_herglotz<T: Real>(phi_h: &LineSamples<T>, out_grid: &Grid<T>) -> Result<Accelerant<T>> {
    if out_grid.x0 != T::zero() {
        return Err(invalid("accelerant grid must start at zero"));
    }
    if phi_h.shape() != (1, 1) {
        return Err(invalid("Herglotz samples must be scalar"));
    }
    let rh = phi_h.map(|_, v| v - scalar(iu::<T>()));
    let tail = rh.laurent_tail(2);
    let divided = rh.map(|z, v| v / z);
    let poles = vec![CMatrix::zeros(1, 1), tail[0].clone(), tail[1].clone()];
    let xs: Vec<T> = out_grid.nodes().collect();
    let scale = T::one() / (T::lit(4.0) * T::pi());
    let s: Vec<Complex<T>> = divided.transform(&xs, &poles).into_iter().map(|m| (m[(0, 0)] * scale).conj()).collect();
    let s_prime = central_diff4(&s, out_grid.h)?;
    Ok(Accelerant { grid: *out_grid, s_prime })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynInverseConfig<T: Real> {
    pub eta: T,
    pub a: T,
    pub dxi: T,
    pub inverse: InverseConfig<T>,
}

impl<T: Real> Default for DynInverseConfig<T> {
    fn default() -> Self {
        Self { eta: T::one(), a: T::lit(200.0), dxi: T::lit(0.05), inverse: InverseConfig::default() }
    }
}

#[derive(Debug, Clone)]
pub struct DynInverseResult<T: Real> {
    pub potential: TimeDomainPotential<T>,
    pub spectral: InverseResult<T>,
    pub line: LineSamples<T>,
}

/// Recovers `p, q` from the response function: Weyl samples on the line
/// `Im z = eta`, the selfadjoint inverse pipeline, then `p = -Re v`,
/// `q = Im v`.
pub fn response_to_potential<T: Real>(r: &ResponseKernel<T>, config: &DynInverseConfig<T>) -> Result<DynInverseResult<T>> {
    let xi = LineSamples::abscissae(config.a, config.dxi)?;
    let values = (0..xi.n)
        .map(|k| weyl_from_response(r, Complex::new(xi.node(k), config.eta)))
        .collect::<Result<Vec<_>>>()?;
    let line = LineSamples::new(config.eta, xi, values)?;
    let spectral = solve_inverse(&line, None, &config.inverse)?;
    let v: Vec<Complex<T>> = spectral.potential.samples().iter().map(|m| m[(0, 0)]).collect();
    let potential = TimeDomainPotential::from_v(*spectral.potential.grid(), &v)?;
    Ok(DynInverseResult { potential, spectral, line })
}

/// `alpha`, `theta1`, `theta2` with
/// `alpha - alpha^* = -i (theta1 + theta2)(theta1 + theta2)^*`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitInverseData<T: Real> {
    pub alpha: CMatrix<T>,
    pub theta1: CMatrix<T>,
    pub theta2: CMatrix<T>,
}

impl<T: Real> ExplicitInverseData<T> {
    pub fn new(alpha: CMatrix<T>, theta1: Vec<Complex<T>>, theta2: Vec<Complex<T>>) -> Result<Self> {
        let n = alpha.nrows();
        if n == 0 || alpha.ncols() != n || theta1.len() != n || theta2.len() != n {
            return Err(invalid("alpha must be n x n and theta1, theta2 of length n"));
        }
        let theta1 = CMatrix::from_column_slice(n, 1, &theta1);
        let theta2 = CMatrix::from_column_slice(n, 1, &theta2);
        let s = &theta1 + &theta2;
        let defect = &alpha - alpha.adjoint() + &s * s.adjoint() * iu::<T>();
        let deviation = op_norm(&defect);
        if deviation > T::lit(1e-12) * op_norm(&alpha).max(T::one()) {
            return Err(Error::IdentityViolated { deviation: deviation.to_f64_lossy() });
        }
        Ok(Self { alpha, theta1, theta2 })
    }

    pub fn n(&self) -> usize {
        self.alpha.nrows()
    }

    /// `A = alpha + i theta1 (theta1 + theta2)^*`.
    pub fn a_matrix(&self) -> CMatrix<T> {
        let s = &self.theta1 + &self.theta2;
        &self.alpha + &self.theta1 * s.adjoint() * iu::<T>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitSolution<T: Real> {
    pub v: Vec<Complex<T>>,
    pub response: ResponseKernel<T>,
    pub potential: TimeDomainPotential<T>,
    /// Smallest eigenvalue of `S(x)` over the grid.
    pub s_min_eigenvalue: T,
}

/// `(e^{Fx}, int_0^x e^{Ft} Q e^{F^* t} dt)` from one exponential of the
/// block matrix `[[F, Q], [0, -F^*]]`.
fn gramian<T: Real>(f: &CMatrix<T>, q: &CMatrix<T>, x: T) -> (CMatrix<T>, CMatrix<T>) {
    let n = f.nrows();
    let mut m = CMatrix::<T>::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(f);
    m.view_mut((0, n), (n, n)).copy_from(q);
    m.view_mut((n, n), (n, n)).copy_from(&(-f.adjoint()));
    let e = (m * Complex::new(x, T::zero())).exp();
    let efx = e.view((0, 0), (n, n)).into_owned();
    let g = e.view((0, n), (n, n)).into_owned();
    let w = g * efx.adjoint();
    (efx, w)
}

/// Closed-form potential and response function for explicit data:
/// `S(x) = I + int_0^x Lambda Lambda^*`, `Lambda(t) = [e^{-itA} theta1, e^{itA} theta2]`,
/// `v(x) = -2i theta1^* e^{ixA^*} S(x)^{-1} e^{ixA} theta2` and
/// `r(t) = -2i theta2^* e^{-it alpha} theta1`.
pub fn explicit_inverse<T: Real>(data: &ExplicitInverseData<T>, x_grid: &Grid<T>, t_grid: &Grid<T>) -> Result<ExplicitSolution<T>> {
    let n = data.n();
    let a = data.a_matrix();
    let f1 = &a * (-iu::<T>());
    let f2 = &a * iu::<T>();
    let q1 = &data.theta1 * data.theta1.adjoint();
    let q2 = &data.theta2 * data.theta2.adjoint();
    let id = CMatrix::<T>::identity(n, n);
    let m2i = Complex::new(T::zero(), T::lit(-2.0));
    let mut v = Vec::with_capacity(x_grid.n);
    let mut s_min = T::max_value().unwrap_or(T::one());
    for x in x_grid.nodes() {
        let (e1, w1) = gramian(&f1, &q1, x);
        let (e2, w2) = gramian(&f2, &q2, x);
        let s = &id + w1 + w2;
        let lam = hermitian_min_eigenvalue(&s);
        s_min = s_min.min(lam);
        if !(lam > T::lit(1e3) * T::eps()) {
            return Err(Error::SingularS { x: x.to_f64_lossy() });
        }
        let rhs = &e2 * &data.theta2;
        let sol = guarded_solve(&s, &rhs).map_err(|_| Error::SingularS { x: x.to_f64_lossy() })?;
        let left = data.theta1.adjoint() * e1.adjoint();
        v.push((left * sol)[(0, 0)] * m2i);
    }
    let r = t_grid
        .nodes()
        .map(|t| {
            let e = (&data.alpha * Complex::new(T::zero(), -t)).exp();
            (data.theta2.adjoint() * e * &data.theta1)[(0, 0)] * m2i
        })
        .collect();
    let potential = TimeDomainPotential::from_v(*x_grid, &v)?;
    Ok(ExplicitSolution { v, response: ResponseKernel::new(*t_grid, r)?, potential, s_min_eigenvalue: s_min })
}

/// Residual `max_x ||z Y^ + J Y^' + V Y^ + i e^{izT} Y(x, T)||` of the
/// transform `Y^(x, z) = int_0^T e^{izt} Y(x, t) dt`; the last term is the
/// boundary contribution of the finite horizon. Requires `Im z > M`.
pub fn fourier_bridge_check<T: Real>(sim: &Simulation<T>, pot: &TimeDomainPotential<T>, z: Complex<T>) -> Result<T> {
    let n = sim.grid.n;
    if pot.grid.n < n || (pot.grid.h - sim.grid.h).abs() > sim.grid.h * T::lit(1e-9) {
        return Err(invalid("potential does not match the simulation lattice"));
    }
    let window = TimeDomainPotential::new(sim.grid, pot.p[..n].to_vec(), pot.q[..n].to_vec())?;
    let m = window.growth_rate();
    if !(z.im > m) {
        return Err(invalid(format!("Im z must exceed M = {}", m.to_f64_lossy())));
    }
    let t_end = sim.grid.end();
    let mut yh: Vec<CMatrix<T>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut col = CMatrix::<T>::zeros(2, 1);
        for c in 0..2 {
            let u: Vec<Complex<T>> = (0..n).map(|k| sim.at(j, k)[c]).collect();
            col[(c, 0)] = filon(&u, sim.grid.h, z).0;
        }
        yh.push(col);
    }
    let dy = central_diff4(&yh, sim.grid.h)?;
    let jm = CMatrix::from_row_slice(2, 2, &[zero(), Complex::new(T::one(), T::zero()), Complex::new(-T::one(), T::zero()), zero()]);
    let edge = (iu::<T>() * z * t_end).exp() * iu::<T>();
    let mut worst = T::zero();
    for j in 0..n {
        let (p, q) = (Complex::new(pot.p[j], T::zero()), Complex::new(pot.q[j], T::zero()));
        let vm = CMatrix::from_row_slice(2, 2, &[p, q, q, -p]);
        let [u1, u2] = sim.at(j, n - 1);
        let end = CMatrix::from_column_slice(2, 1, &[u1, u2]) * edge;
        let res = &yh[j] * z + &jm * &dy[j] + vm * &yh[j] + end;
        worst = worst.max(res.norm());
    }
    Ok(worst)
}
