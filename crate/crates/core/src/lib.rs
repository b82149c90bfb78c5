//! Numerical toolkit for direct and inverse spectral problems of Dirac-type
//! systems and for the Weyl-function approach to initial-boundary value
//! problems of integrable wave equations.
//!
//! Every routine is generic over the real scalar type through [`Real`];
//! the `f64` aliases at the crate root are what most callers want.

pub mod dirac;
pub mod dynamical;
mod error;
pub mod evolution;
pub mod inverse_sa;
pub mod inverse_skew;
pub mod io;
pub mod numerics;
pub mod weyl;

pub use error::{Error, Result};
pub use numerics::{CMatrix, Grid, MoebiusMap, Real};

/// Complex scalar with the given real component type.
pub type Complex<T> = num_complex::Complex<T>;

pub type C64 = Complex<f64>;
pub type CMatrix64 = CMatrix<f64>;
pub type Grid64 = Grid<f64>;
pub type MoebiusMap64 = MoebiusMap<f64>;
pub type DiracPotential64 = dirac::DiracPotential<f64>;
pub type WeylTable64 = weyl::WeylTable<f64>;
pub type BoundaryData64 = evolution::BoundaryData<f64>;
pub type TimeDomainPotential64 = dynamical::TimeDomainPotential<f64>;
pub type ResponseKernel64 = dynamical::ResponseKernel<f64>;
pub type ExplicitInverseData64 = dynamical::ExplicitInverseData<f64>;
