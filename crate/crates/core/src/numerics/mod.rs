//! Shared kernels: scalars, grids, dense complex matrices, quadrature,
//! fixed-step propagation, linear-fractional maps and the line transform.

mod grid;
mod matrix;
mod moebius;
mod ode;
mod par;
mod quad;
mod scalar;
mod transform;

pub use grid::{interp_cubic, interp_linear, Grid};
pub use matrix::{
    adjoint, block, block_diag, eye, guarded_inverse, guarded_solve, hermitian_min_eigenvalue,
    hstack, is_finite, jmat, max_abs, op_norm, set_block, vstack, zeros, CMatrix, COND_LIMIT,
};
pub use moebius::{moebius_apply, MoebiusMap};
pub use ode::{ode_propagate, rk4, Side};
pub(crate) use par::par_map;
pub use quad::{central_diff, central_diff4, cumulative_trapezoid, fd_weights, trapezoid, uniform_derivative, Linear};
pub use scalar::{c, cr, Real};
pub use transform::{pole_transform, LineSamples};
