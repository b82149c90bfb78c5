use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar type the toolkit is generic over (`f32` or `f64`).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + FloatConst {
    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("integer representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon.
    fn eps() -> Self {
        Self::default_epsilon()
    }
}

impl<T> Real for T where T: RealField + Copy + FromPrimitive + ToPrimitive + FloatConst {}

/// Complex number from `f64` parts.
pub fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

/// Complex number with zero imaginary part.
pub fn cr<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}
