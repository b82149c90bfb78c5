use num_complex::Complex64 as C;
use proptest::prelude::*;

use weylkit_core::dirac::{block_rows_at_zero, DiracPotential, SystemKind};
use weylkit_core::inverse_sa::{
    beta_from_gamma, build_s, gamma_from_h, hamiltonian, phi1_cross_checked, phi1_from_weyl, recover_potential,
    solve_inverse, HamiltonianTable, InverseConfig, Phi1Table,
};
use weylkit_core::numerics::{hermitian_min_eigenvalue, op_norm, LineSamples};
use weylkit_core::weyl::{sample_line, TruncationConfig};
use weylkit_core::{CMatrix64, Grid64};

fn s(z: C) -> CMatrix64 {
    CMatrix64::from_element(1, 1, z)
}

fn line(eta: f64, a: f64, dxi: f64, f: impl Fn(C) -> C) -> LineSamples<f64> {
    let xi = LineSamples::abscissae(a, dxi).unwrap();
    let values = xi.nodes().map(|x| s(f(C::new(x, eta)))).collect();
    LineSamples::new(eta, xi, values).unwrap()
}

#[test]
fn zero_weyl_function_gives_zero_phi1() {
    let grid = Grid64::span(0.0, 1.0, 0.05).unwrap();
    let t = phi1_from_weyl(&line(1.0, 50.0, 0.05, |_| C::new(0.0, 0.0)), &grid).unwrap();
    assert!(t.phi1.iter().chain(&t.phi1_prime).all(|m| op_norm(m) == 0.0));
}

#[test]
fn simple_pole_transforms_to_a_ramp() {
    let phi0 = C::new(0.3, -0.2);
    let grid = Grid64::span(0.0, 1.0, 0.05).unwrap();
    let t = phi1_from_weyl(&line(1.0, 1e3, 0.05, |z| phi0 / z), &grid).unwrap();
    for (x, p) in grid.nodes().zip(&t.phi1) {
        let want = C::new(0.0, 2.0) * x * phi0;
        assert!((p[(0, 0)] - want).norm() < 1e-6, "x = {x}: {} vs {want}", p[(0, 0)]);
    }
}

#[test]
fn phi1_does_not_depend_on_the_line() {
    let f = |z: C| C::new(0.4, 0.0) / (z + C::new(0.0, 1.0));
    let grid = Grid64::span(0.0, 1.0, 0.01).unwrap();
    let a = line(1.0, 400.0, 0.025, f);
    let b = line(2.0, 400.0, 0.025, f);
    let t = phi1_cross_checked(&a, &b, &grid, 1e-4).unwrap();
    assert!(t.distance(&phi1_from_weyl(&b, &grid).unwrap()) <= 1e-4);
}

#[test]
fn cross_check_rejects_inconsistent_lines() {
    let grid = Grid64::span(0.0, 1.0, 0.01).unwrap();
    let a = line(1.0, 200.0, 0.05, |z| C::new(0.4, 0.0) / (z + C::new(0.0, 1.0)));
    let b = line(2.0, 200.0, 0.05, |z| C::new(0.1, 0.0) / (z + C::new(0.0, 1.0)));
    assert!(phi1_cross_checked(&a, &b, &grid, 1e-4).is_err());
}

#[test]
fn constant_phi1_gives_identity_operator() {
    let grid = Grid64::span(0.0, 1.0, 0.1).unwrap();
    let t = Phi1Table { grid, phi1: vec![s(C::new(0.7, 0.1)); grid.n], phi1_prime: vec![s(C::new(0.0, 0.0)); grid.n] };
    let op = build_s(&t, 1.0).unwrap();
    assert_eq!(op.matrix, CMatrix64::identity(grid.n, grid.n));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn operator_is_hermitian(re in proptest::collection::vec(-0.5..0.5f64, 21), im in proptest::collection::vec(-0.5..0.5f64, 21)) {
        let grid = Grid64::span(0.0, 1.0, 0.05).unwrap();
        let prime: Vec<CMatrix64> = re.iter().zip(&im).map(|(&a, &b)| s(C::new(a, b))).collect();
        let t = Phi1Table { grid, phi1: vec![s(C::new(0.0, 0.0)); grid.n], phi1_prime: prime };
        if let Ok(op) = build_s(&t, 1.0) {
            prop_assert!(op.hermitian_defect() <= 1e-12);
        }
    }
}

#[test]
fn trivial_hamiltonian_gives_trivial_rows() {
    let grid = Grid64::span(0.0, 1.0, 0.05).unwrap();
    let h = CMatrix64::from_diagonal(&nalgebra::DVector::from_vec(vec![C::new(0.0, 0.0), C::new(1.0, 0.0)]));
    let ham = HamiltonianTable { grid, h: vec![h.clone(); grid.n], integral: vec![h; grid.n], min_eigenvalues: Vec::new() };
    let gamma = gamma_from_h(&ham, 1).unwrap();
    let want_gamma = CMatrix64::from_row_slice(1, 2, &[C::new(0.0, 0.0), C::new(1.0, 0.0)]);
    assert!(gamma.iter().all(|g| op_norm(&(g - &want_gamma)) < 1e-14));

    let beta = beta_from_gamma(&grid, &gamma, 1).unwrap();
    let want_beta = CMatrix64::from_row_slice(1, 2, &[C::new(1.0, 0.0), C::new(0.0, 0.0)]);
    assert!(beta.iter().all(|b| op_norm(&(b - &want_beta)) < 1e-14));

    let pot = recover_potential(&grid, &beta, &gamma).unwrap();
    assert!(pot.samples().iter().all(|v| op_norm(v) < 1e-14));
}

#[test]
fn exponential_potential_round_trip() {
    let v = |x: f64| C::new(0.5 * (-x).exp(), 0.0);
    let pot = DiracPotential::scalar(SystemKind::SelfAdjoint, Grid64::span(0.0, 20.0, 0.01).unwrap(), v).unwrap();
    let (line, _) = sample_line(&pot, 1.0, 200.0, 0.05, &TruncationConfig::default(), 1).unwrap();
    let config = InverseConfig { h: 0.01, length: 1.0, ..InverseConfig::default() };
    let res = solve_inverse(&line, None, &config).unwrap();

    let err = res.potential.grid().nodes().zip(res.potential.samples()).map(|(x, s)| (s[(0, 0)] - v(x)).norm()).fold(0.0, f64::max);
    assert!(err <= 5e-2, "sup error {err}");
    assert!(res.identities.max() <= 1e-4, "{:?}", res.identities);
    assert!(res.hamiltonian.min_eigenvalues.iter().all(|&(_, e)| e > 0.0));

    // Pi* S^{-1} Pi grows with l, so its increments are positive semidefinite.
    for w in res.hamiltonian.integral.windows(2) {
        let inc = &w[1] - &w[0];
        assert!(hermitian_min_eigenvalue(&inc) >= -1e-10);
    }

    // The Hamiltonian matches gamma* gamma of the forward solution at z = 0.
    let (_, gamma) = block_rows_at_zero(&pot).unwrap();
    for (k, h) in res.hamiltonian.h.iter().enumerate().take(res.potential.grid().n) {
        let g = &gamma[k];
        assert!(op_norm(&(h - g.adjoint() * g)) < 5e-2, "node {k}");
    }
}

#[test]
fn hamiltonian_of_zero_phi1_is_constant() {
    let grid = Grid64::span(0.0, 0.5, 0.05).unwrap();
    let zero = s(C::new(0.0, 0.0));
    let t = Phi1Table { grid, phi1: vec![zero.clone(); grid.n], phi1_prime: vec![zero; grid.n] };
    let ham = hamiltonian(&t).unwrap();
    let want = CMatrix64::from_diagonal(&nalgebra::DVector::from_vec(vec![C::new(0.0, 0.0), C::new(1.0, 0.0)]));
    assert!(ham.h.iter().all(|h| op_norm(&(h - &want)) < 1e-12));
}
