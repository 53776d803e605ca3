use proptest::prelude::*;
use volkov_fp_core::clifford::{
    dirac_gamma, light_cone, lightcone_operators, spin_inner, transverse_slash, SpinMatrix, Spinor, METRIC,
};
use volkov_fp_core::potential::{phase, phase_integrand, zeta, PhaseQuery, PlaneWavePotential};
use volkov_fp_core::quadrature::integrate_adaptive;

fn spinor() -> impl Strategy<Value = Spinor> {
    prop::array::uniform8(-2.0f64..2.0).prop_map(|a| {
        Spinor::from_parts([a[0], a[1], a[2], a[3]], [a[4], a[5], a[6], a[7]])
    })
}

#[test]
fn anticommutators_are_exact() {
    for i in 0..4 {
        for j in 0..4 {
            let gi = dirac_gamma(i).unwrap();
            let gj = dirac_gamma(j).unwrap();
            let ac = gi * gj + gj * gi;
            let expect = if i == j { SpinMatrix::identity().scale_real(2.0 * METRIC[i]) } else { SpinMatrix::zero() };
            assert_eq!(ac, expect, "({i}, {j})");
        }
    }
}

#[test]
fn light_cone_identities_are_exact() {
    let (np, nm, pp, pm) = lightcone_operators();
    let id = SpinMatrix::identity();
    assert_eq!(np * np, SpinMatrix::zero());
    assert_eq!(nm * nm, SpinMatrix::zero());
    assert_eq!(np * nm + nm * np, id);
    assert_eq!(pp + pm, id);
    assert_eq!(pp * pp, pp);
    assert_eq!(pm * pm, pm);
    assert_eq!(pm * pp, SpinMatrix::zero());
    assert_eq!(light_cone().gamma[0] * pm, np * pm);
}

#[test]
fn spin_product_has_signature_two_two() {
    // gamma^0 is the Gram matrix of the form in the standard basis.
    let diag: Vec<f64> = (0..4).map(|i| spin_inner(&Spinor::basis(i), &Spinor::basis(i)).re).collect();
    assert_eq!(diag.iter().filter(|&&d| d > 0.0).count(), 2);
    assert_eq!(diag.iter().filter(|&&d| d < 0.0).count(), 2);
}

proptest! {
    #[test]
    fn gammas_are_spin_symmetric(psi in spinor(), phi in spinor(), j in 0usize..4) {
        let g = dirac_gamma(j).unwrap();
        let d = spin_inner(&(g * psi), &phi) - spin_inner(&psi, &(g * phi));
        prop_assert!(d.norm() < 1e-13);
    }

    #[test]
    fn spin_product_is_conjugate_symmetric(psi in spinor(), phi in spinor()) {
        let d = spin_inner(&psi, &phi) - spin_inner(&phi, &psi).conj();
        prop_assert!(d.norm() < 1e-14);
    }

    #[test]
    fn slash_squares_to_minus_norm(k2 in -3.0f64..3.0, k3 in -3.0f64..3.0, a2 in -2.0f64..2.0, a3 in -2.0f64..2.0) {
        let s = transverse_slash(k2, k3, a2, a3);
        let expect = SpinMatrix::identity().scale_real(-((k2 + a2).powi(2) + (k3 + a3).powi(2)));
        prop_assert!((s * s - expect).max_abs() < 1e-13);
        let g0 = light_cone().gamma[0];
        let g1 = light_cone().gamma[1];
        prop_assert!((s * g0 + g0 * s).max_abs() < 1e-14);
        prop_assert!((s * g1 + g1 * s).max_abs() < 1e-14);
    }

    #[test]
    fn harmonic_closed_form_matches_quadrature(
        lambda in 0.0f64..1.0, omega in prop_oneof![-3.0f64..-0.2, 0.2f64..3.0],
        k2 in -1.0f64..1.0, k3 in -1.0f64..1.0, m in 0.1f64..2.0,
        a in -10.0f64..10.0, b in -10.0f64..10.0,
    ) {
        let pot = PlaneWavePotential::harmonic(lambda, omega).unwrap();
        let q = PhaseQuery::new(k2, k3, m).unwrap();
        let closed = phase(&pot, &q, a, b).unwrap();
        let oracle = integrate_adaptive(|s| phase_integrand(&pot, &q, s).unwrap(), a, b, 1e-13, &[]).unwrap();
        prop_assert!((closed - oracle).abs() <= 1e-10 * oracle.abs().max(1e-3));
    }

    #[test]
    fn phase_is_additive(
        a in -8.0f64..8.0, b in -8.0f64..8.0, c in -8.0f64..8.0,
        k2 in -1.0f64..1.0, m in 0.2f64..2.0, which in 0usize..3,
    ) {
        let pot = match which {
            0 => PlaneWavePotential::Zero,
            1 => PlaneWavePotential::harmonic(0.4, 1.3).unwrap(),
            _ => PlaneWavePotential::pulse(0.6, 2.0, 1.5).unwrap(),
        };
        let q = PhaseQuery::new(k2, 0.1, m).unwrap();
        let lhs = phase(&pot, &q, a, b).unwrap() + phase(&pot, &q, b, c).unwrap();
        let rhs = phase(&pot, &q, a, c).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn zeta_grows_at_least_like_mass_squared(
        s in -10.0f64..10.0, h in 1e-3f64..5.0, k2 in -1.0f64..1.0, m in 0.2f64..2.0, pulse in any::<bool>(),
    ) {
        let pot = if pulse {
            PlaneWavePotential::pulse(0.8, 1.0, 2.0).unwrap()
        } else {
            PlaneWavePotential::harmonic(0.5, 0.7).unwrap()
        };
        let q = PhaseQuery::new(k2, -0.3, m).unwrap();
        let inc = zeta(&pot, &q, s + h).unwrap() - zeta(&pot, &q, s).unwrap();
        prop_assert!(inc >= m * m * h * (1.0 - 1e-12));
        prop_assert!(phase_integrand(&pot, &q, s).unwrap() >= m * m);
    }
}

#[test]
fn integrand_bounded_below_on_dense_grid() {
    let pot = PlaneWavePotential::harmonic(0.9, 2.3).unwrap();
    let q = PhaseQuery::new(-0.9, 0.0, 0.7).unwrap();
    for i in 0..20_001 {
        let s = -50.0 + i as f64 * 0.005;
        assert!(phase_integrand(&pot, &q, s).unwrap() >= q.m * q.m);
    }
}

#[test]
fn zeta_at_origin_vanishes() {
    let q = PhaseQuery::new(0.3, 0.0, 1.0).unwrap();
    for pot in [PlaneWavePotential::Zero, PlaneWavePotential::harmonic(0.2, 1.0).unwrap(), PlaneWavePotential::pulse(0.2, 1.0, 1.0).unwrap()] {
        assert_eq!(zeta(&pot, &q, 0.0).unwrap(), 0.0);
        assert_eq!(phase(&pot, &q, 2.5, 2.5).unwrap(), 0.0);
    }
}

#[test]
fn tabulated_harmonic_profile_reproduces_closed_form() {
    use std::io::Write;
    use volkov_fp_core::potential::PotentialSpec;
    let dir = tempfile::tempdir().unwrap();
    let mut f = std::fs::File::create(dir.path().join("wave.csv")).unwrap();
    writeln!(f, "# lambda = 0.4, omega = 1.3\ns,a2,a3").unwrap();
    for i in 0..=2000 {
        let s = -10.0 + i as f64 * 0.01;
        writeln!(f, "{s},{},0", 0.4 * (1.3 * s).cos()).unwrap();
    }
    drop(f);
    let spec: PotentialSpec = serde_json::from_str(r#"{"kind": "tabulated", "path": "wave.csv"}"#).unwrap();
    let tab = PlaneWavePotential::from_spec(&spec, Some(dir.path())).unwrap();
    let exact = PlaneWavePotential::harmonic(0.4, 1.3).unwrap();
    let q = PhaseQuery::new(0.3, -0.2, 1.0).unwrap();
    for (a, b) in [(-8.0, 8.0), (-3.0, 0.5), (2.0, 7.5)] {
        let got = phase(&tab, &q, a, b).unwrap();
        let want = phase(&exact, &q, a, b).unwrap();
        assert!((got - want).abs() < 1e-7 * want.abs(), "[{a}, {b}]: {got} vs {want}");
    }
    assert!(phase(&tab, &q, -11.0, 0.0).is_err());
}
