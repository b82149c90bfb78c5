use num_complex::Complex64 as C;
use proptest::prelude::*;

use weylkit_core::dirac::{propagate, rho_from_zeta, transfer, zeta_from_rho, DiracPotential, SystemKind};
use weylkit_core::dynamical::ExplicitInverseData;
use weylkit_core::evolution::{evolve_weyl, propagate_r, BoundaryData, Equation};
use weylkit_core::io;
use weylkit_core::numerics::{jmat, moebius_apply, op_norm};
use weylkit_core::weyl::{herglotz_from_weyl, weyl_by_truncation, TruncationConfig};
use weylkit_core::{CMatrix64, Grid64, MoebiusMap64};

fn cx() -> impl Strategy<Value = C> {
    (-1.0..1.0, -1.0..1.0).prop_map(|(a, b)| C::new(a, b))
}

fn cmat(r: usize, c: usize) -> impl Strategy<Value = CMatrix64> {
    proptest::collection::vec(cx(), r * c).prop_map(move |v| CMatrix64::from_vec(r, c, v))
}

fn upper() -> impl Strategy<Value = C> {
    (-3.0..3.0, 0.3..3.0).prop_map(|(a, b)| C::new(a, b))
}

/// Smooth decaying scalar potential `a e^{-s x} + b sin(x) e^{-x}`.
fn smooth(kind: SystemKind, a: C, b: C, s: f64, grid: Grid64) -> DiracPotential<f64> {
    DiracPotential::scalar(kind, grid, |x| a * (-s * x).exp() + b * x.sin() * (-x).exp()).unwrap()
}

fn rel(a: &CMatrix64, b: &CMatrix64) -> f64 {
    op_norm(&(a - b)) / op_norm(b).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moebius_composition(r in cmat(4, 4), s in cmat(4, 4), phi in cmat(2, 2).prop_map(|p| p * C::new(0.3, 0.0))) {
        let eye = CMatrix64::identity(4, 4) * C::new(2.0, 0.0);
        let (r, s) = (&r + &eye, &s + &eye);
        let mr = MoebiusMap64::from_matrix(&r, 2).unwrap();
        let ms = MoebiusMap64::from_matrix(&s, 2).unwrap();
        let mrs = MoebiusMap64::from_matrix(&(&r * &s), 2).unwrap();
        let (Ok(inner), Ok(direct)) = (moebius_apply(&ms, &phi), moebius_apply(&mrs, &phi)) else {
            return Err(TestCaseError::reject("singular input"));
        };
        let Ok(nested) = moebius_apply(&mr, &inner) else {
            return Err(TestCaseError::reject("singular input"));
        };
        prop_assert!(rel(&nested, &direct) < 1e-12);
    }

    #[test]
    fn moebius_matrix_round_trip(r in cmat(3, 3)) {
        let m = MoebiusMap64::from_matrix(&r, 1).unwrap();
        prop_assert_eq!(m.to_matrix(), r);
    }

    #[test]
    fn zeta_is_skew_for_hermitian_rho(a in cmat(3, 3), d0 in 0.5..1.0, d1 in 1.5..2.0, d2 in 2.5..3.0) {
        let rho = &a + a.adjoint();
        let d = [d2, d1, d0];
        let zeta = zeta_from_rho(&d, &rho).unwrap();
        prop_assert!(op_norm(&(&zeta + zeta.adjoint())) <= 1e-15);
        let back = rho_from_zeta(&d, &zeta).unwrap();
        for i in 0..3 {
            for k in 0..3 {
                if i != k {
                    prop_assert!((back[(i, k)] - rho[(i, k)]).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn complex_text_round_trip(re in -1e6..1e6f64, im in -1e6..1e6f64) {
        let z = C::new(re, im);
        prop_assert_eq!(io::parse_complex(&io::format_complex(z)).unwrap(), z);
    }

    #[test]
    fn potential_json_round_trip(a in cx(), b in cx(), s in 0.5..2.0) {
        let pot = smooth(SystemKind::SelfAdjoint, a, b, s, Grid64::new(0.0, 0.1, 21).unwrap());
        let back = io::potential_from_json(&io::potential_to_json(&pot).unwrap()).unwrap();
        prop_assert_eq!(back.samples(), pot.samples());
        prop_assert_eq!(back.grid(), pot.grid());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn selfadjoint_j_identity(a in cx(), b in cx(), s in 0.5..2.0, z in upper()) {
        let pot = smooth(SystemKind::SelfAdjoint, a, b, s, Grid64::span(0.0, 2.0, 1e-3).unwrap());
        let j = jmat::<f64>(1, 1);
        let u = propagate(&pot, z, 2.0).unwrap();
        let ub = propagate(&pot, z.conj(), 2.0).unwrap();
        for k in (0..u.samples.len()).step_by(100) {
            let dev = op_norm(&(u.samples[k].adjoint() * &j * &ub.samples[k] - &j));
            prop_assert!(dev <= 1e-8, "node {k}: {dev}");
        }
    }

    #[test]
    fn propagation_is_multiplicative(a in cx(), b in cx(), s in 0.5..2.0, z in upper(), kind in prop_oneof![Just(SystemKind::SelfAdjoint), Just(SystemKind::Skew)]) {
        let pot = smooth(kind, a, b, s, Grid64::span(0.0, 2.0, 1e-2).unwrap());
        let u = propagate(&pot, z, 2.0).unwrap();
        let t = transfer(&pot, z, 0.7, 2.0).unwrap();
        let k1 = pot.grid().floor_index(0.7);
        prop_assert!(rel(&(&t * &u.samples[k1]), u.last()) < 1e-9);
    }

    #[test]
    fn weyl_is_contractive_and_herglotz(a in cx(), b in cx(), s in 0.5..2.0, z in upper()) {
        let pot = smooth(SystemKind::SelfAdjoint, a, b, s, Grid64::span(0.0, 20.0, 1e-2).unwrap());
        let est = weyl_by_truncation(&pot, z, &TruncationConfig::default()).unwrap();
        prop_assert!(op_norm(&est.phi) <= 1.0 + 1e-8);
        let h = herglotz_from_weyl(&est.phi).unwrap();
        let im = (h.adjoint() - &h) * C::new(0.0, 1.0);
        prop_assert!(im[(0, 0)].re >= -1e-8);
    }

    #[test]
    fn evolution_at_zero_time_is_identity(h2 in cx(), h3 in cx(), z in upper(), phi in cx()) {
        let grid = Grid64::span(0.0, 1.0, 0.01).unwrap();
        let scalar = |w: C| CMatrix64::from_element(1, 1, w);
        let data = BoundaryData::nls(Equation::Dnls, grid, vec![scalar(h2); grid.n], vec![scalar(h3); grid.n]).unwrap();
        let coef = propagate_r(&data, z, 0.0, &Default::default()).unwrap();
        prop_assert_eq!(coef.last(), &CMatrix64::identity(2, 2));
        let phi = scalar(phi * 0.5);
        prop_assert_eq!(evolve_weyl(&coef, &phi).unwrap(), phi);
    }
}

#[test]
fn explicit_data_requires_the_identity() {
    let alpha = |im: f64| CMatrix64::from_element(1, 1, C::new(0.0, im));
    let half = vec![C::new(0.5, 0.0)];
    assert!(ExplicitInverseData::new(alpha(-0.5), half.clone(), half.clone()).is_ok());
    assert!(ExplicitInverseData::new(alpha(-0.4), half.clone(), half).is_err());
}

#[test]
fn grids_reject_bad_steps() {
    assert!(Grid64::new(0.0, 0.0, 10).is_err());
    assert!(Grid64::new(0.0, -0.1, 10).is_err());
    assert!(Grid64::new(0.0, 0.1, 1).is_err());
    assert!(Grid64::span(0.0, 1.0, 0.25).is_ok_and(|g| g.n == 5));
}
