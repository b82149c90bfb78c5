use num_complex::Complex;

use weylkit_core::dirac::{propagate, DiracPotential, SystemKind};
use weylkit_core::weyl::{weyl_by_truncation, TruncationConfig};
use weylkit_core::Grid;

#[test]
fn free_system_in_single_precision() {
    let grid = Grid::<f32>::span(0.0, 1.0, 0.01).unwrap();
    let pot = DiracPotential::zero(SystemKind::SelfAdjoint, 1, 1, grid).unwrap();
    let z = Complex::new(0.0f32, 1.0);
    let u = propagate(&pot, z, 1.0).unwrap();
    // u = exp(i x z j) with j = diag(1, -1).
    let e = (-1.0f32).exp();
    assert!((u.last()[(0, 0)].re - e).abs() < 1e-5);
    assert!((u.last()[(1, 1)].re - 1.0 / e).abs() < 1e-4);
}

#[test]
fn weyl_function_in_single_precision() {
    let grid = Grid::<f32>::span(0.0, 10.0, 0.01).unwrap();
    let pot = DiracPotential::scalar(SystemKind::SelfAdjoint, grid, |x| Complex::new(0.5 * (-x).exp(), 0.0)).unwrap();
    let config = TruncationConfig { tol: 1e-3, ..TruncationConfig::with_schedule(vec![2.5, 5.0, 10.0]) };
    let wide = weyl_by_truncation(&pot, Complex::new(0.0f32, 1.0), &config).unwrap();
    let grid64 = Grid::<f64>::span(0.0, 10.0, 0.01).unwrap();
    let pot64 = DiracPotential::scalar(SystemKind::SelfAdjoint, grid64, |x| Complex::new(0.5 * (-x).exp(), 0.0)).unwrap();
    let config64 = TruncationConfig { tol: 1e-3, ..TruncationConfig::with_schedule(vec![2.5, 5.0, 10.0]) };
    let narrow = weyl_by_truncation(&pot64, Complex::new(0.0, 1.0), &config64).unwrap();
    let n = narrow.phi[(0, 0)];
    let d = wide.phi[(0, 0)] - Complex::new(n.re as f32, n.im as f32);
    assert!(d.norm() < 1e-4, "{d}");
}
