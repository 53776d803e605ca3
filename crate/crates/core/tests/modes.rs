use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use volkov_fp_core::clifford::{light_cone, spin_inner, Spinor};
use volkov_fp_core::modes::{
    dirac_residual, dirac_residual_fd, evolve_between, evolve_pi_minus, mass_pairing_identity, mode_wavefunction,
    null_decay_scan, null_scalar_product, reconstruct_full, MassFamily, MassFamilyDocument, MassPair, ModeAmplitude,
    ModeParams, NullPoint, PacketDocument, PacketNode, Stencil, WavePacket,
};
use volkov_fp_core::potential::PlaneWavePotential;

fn random_amp(rng: &mut ChaCha8Rng) -> ModeAmplitude {
    ModeAmplitude::from_components([
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
    ])
}

fn random_mode(rng: &mut ChaCha8Rng) -> ModeParams {
    let mag = rng.gen_range(0.2..2.0);
    let u = if rng.gen_bool(0.5) { mag } else { -mag };
    ModeParams::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), u, rng.gen_range(0.3..2.0)).unwrap()
}

fn random_point(rng: &mut ChaCha8Rng) -> NullPoint {
    NullPoint::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
}

#[test]
fn analytic_residuals_vanish_for_closed_form_phases() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pots = [PlaneWavePotential::Zero, PlaneWavePotential::harmonic(0.2, 1.0).unwrap()];
    for pot in &pots {
        for _ in 0..1000 {
            let (amp, mode, p) = (random_amp(&mut rng), random_mode(&mut rng), random_point(&mut rng));
            let psi = mode_wavefunction(&amp, &mode, pot, &p).unwrap().norm();
            let r = dirac_residual(&amp, &mode, pot, &p).unwrap();
            assert!(r <= 1e-10 * psi, "{r:e} vs {psi}");
        }
    }
}

#[test]
fn plane_wave_residual_is_tiny() {
    let amp = ModeAmplitude::from_components([Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    let mode = ModeParams::new(0.0, 0.0, -0.5, 1.0).unwrap();
    let r = dirac_residual(&amp, &mode, &PlaneWavePotential::Zero, &NullPoint::new(1.0, 2.0, 0.0, 0.0)).unwrap();
    assert!(r <= 1e-12);
}

#[test]
fn finite_difference_residual_converges_quadratically() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pot = PlaneWavePotential::harmonic(0.2, 1.0).unwrap();
    for _ in 0..5 {
        let (amp, mode, p) = (random_amp(&mut rng), random_mode(&mut rng), random_point(&mut rng));
        let r1 = dirac_residual_fd(&amp, &mode, &pot, &p, 2e-2, Stencil::Second).unwrap();
        let r2 = dirac_residual_fd(&amp, &mode, &pot, &p, 1e-2, Stencil::Second).unwrap();
        let ratio = r1 / r2;
        assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
    }
}

#[test]
fn pulse_modes_solve_the_equation_with_quadrature_phases() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pot = PlaneWavePotential::pulse(0.5, 1.5, 2.0).unwrap();
    for _ in 0..40 {
        let (amp, mode, p) = (random_amp(&mut rng), random_mode(&mut rng), random_point(&mut rng));
        let psi = mode_wavefunction(&amp, &mode, &pot, &p).unwrap().norm();
        assert!(dirac_residual(&amp, &mode, &pot, &p).unwrap() <= 1e-8 * psi);
        let fd = dirac_residual_fd(&amp, &mode, &pot, &p, 2e-3, Stencil::Fourth).unwrap();
        assert!(fd <= 1e-8 * psi.max(1.0), "fd residual {fd:e}");
    }
}

#[test]
fn wavefunction_basics() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pot = PlaneWavePotential::harmonic(0.3, 0.8).unwrap();
    for _ in 0..20 {
        let (amp, mode) = (random_amp(&mut rng), random_mode(&mut rng));
        let s = rng.gen_range(-4.0..4.0);
        let at_origin = mode_wavefunction(&amp, &mode, &pot, &NullPoint::new(s, 0.0, 0.0, 0.0)).unwrap();
        let direct = reconstruct_full(&evolve_pi_minus(&amp, &mode, &pot, s).unwrap(), &mode, &pot, s).unwrap();
        assert!((at_origin - direct).norm() < 1e-15);
        let l = rng.gen_range(-3.0..3.0);
        let a = mode_wavefunction(&amp, &mode, &pot, &NullPoint::new(s, l, 0.1, 0.2)).unwrap();
        let b = mode_wavefunction(&amp, &mode, &pot, &NullPoint::new(s, l + 2.0 * PI / mode.u.abs(), 0.1, 0.2)).unwrap();
        assert!((a - b).norm() < 1e-12);
    }
}

proptest! {
    #[test]
    fn evolution_is_unitary_and_composes(
        s1 in -6.0f64..6.0, s2 in -6.0f64..6.0, seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (amp, mode) = (random_amp(&mut rng), random_mode(&mut rng));
        let pot = PlaneWavePotential::harmonic(0.4, 1.2).unwrap();
        let at1 = evolve_pi_minus(&amp, &mode, &pot, s1).unwrap();
        prop_assert!((at1.norm() - amp.chi0().norm()).abs() < 1e-14);
        let via = evolve_between(&at1, &mode, &pot, s1, s2).unwrap();
        let direct = evolve_pi_minus(&amp, &mode, &pot, s2).unwrap();
        prop_assert!((via - direct).norm() < 1e-12);
    }

    #[test]
    fn reconstruction_satisfies_constraint(seed in any::<u64>(), s in -10.0f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (amp, mode) = (random_amp(&mut rng), random_mode(&mut rng));
        let pot = PlaneWavePotential::harmonic(0.5, 1.0).unwrap();
        let pm = evolve_pi_minus(&amp, &mode, &pot, s).unwrap();
        let chi = reconstruct_full(&pm, &mode, &pot, s).unwrap();
        let lc = light_cone();
        let (a2, a3) = pot.components(s).unwrap();
        let slash = volkov_fp_core::clifford::transverse_slash(mode.k2, mode.k3, a2, a3);
        let shifted = slash - volkov_fp_core::SpinMatrix::identity().scale_real(mode.m);
        let r = (lc.n_minus * chi).scale(Complex64::new(2.0 * mode.u, 0.0)) + shifted * pm;
        prop_assert!(r.norm() <= 1e-13 * (1.0 + chi.norm()));
        prop_assert!((lc.pi_minus * chi - pm).norm() < 1e-14);
    }
}

fn random_packet(rng: &mut ChaCha8Rng, m: f64) -> WavePacket {
    let us = [-1.3, -0.7, -0.3, 0.4, 0.9];
    let ks = [-0.5, 0.0, 0.5];
    WavePacket::tensor(
        m,
        (&us, &[0.3; 5]),
        (&ks, &[0.5; 3]),
        (&ks, &[0.5; 3]),
        |_, _, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        |_, _, _| {
            ModeAmplitude::from_components([Complex64::new(0.8, -0.2), Complex64::new(0.1, 0.4)])
        },
    )
    .unwrap()
}

#[test]
fn null_scalar_product_is_independent_of_s() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let pot = PlaneWavePotential::harmonic(0.3, 1.0).unwrap();
    for _ in 0..50 {
        let psi = random_packet(&mut rng, 1.0);
        let phi = random_packet(&mut rng, 1.0);
        let reference = null_scalar_product(&psi, &phi, &pot, 0.0).unwrap();
        for k in -10..=10 {
            let v = null_scalar_product(&psi, &phi, &pot, k as f64).unwrap();
            assert!((v - reference).norm() <= 1e-10 * reference.norm().max(1.0));
        }
        let back = null_scalar_product(&phi, &psi, &pot, 2.0).unwrap();
        assert!((back - reference.conj()).norm() <= 1e-10 * reference.norm().max(1.0));
        let own = null_scalar_product(&psi, &psi, &pot, 1.0).unwrap();
        assert!(own.re > 0.0 && own.im.abs() < 1e-10 * own.re);
    }
}

#[test]
fn single_node_packet_normalization() {
    let b = volkov_fp_core::clifford::pi_minus_basis()[0];
    // ≺b|gamma^0 b≻ = 1 for the unit basis vector of the Pi- range
    assert!((spin_inner(&b, &(light_cone().gamma[0] * b)) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    let mode = ModeParams::new(0.2, 0.1, -0.6, 1.0).unwrap();
    let node = PacketNode {
        k2: 0.2,
        k3: 0.1,
        u: -0.6,
        quad_weight: 0.37,
        weight: Complex64::new(1.0, 0.0),
        chi0: ModeAmplitude::new(b).unwrap(),
    };
    let p = WavePacket::new(mode.m, vec![node]).unwrap();
    let v = null_scalar_product(&p, &p, &PlaneWavePotential::Zero, 3.0).unwrap();
    assert!((v - Complex64::new((2.0 * PI).powi(4) * 0.37, 0.0)).norm() < 1e-10);
}

#[test]
fn mismatched_packets_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = random_packet(&mut rng, 1.0);
    let b = random_packet(&mut rng, 1.1);
    assert!(null_scalar_product(&a, &b, &PlaneWavePotential::Zero, 0.0).is_err());
}

#[test]
fn mass_pairing_identity_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let mode = random_mode(&mut rng);
        let pot = PlaneWavePotential::harmonic(rng.gen_range(0.0..0.5), 1.0).unwrap();
        let pair = MassPair {
            k2: mode.k2,
            k3: mode.k3,
            u: mode.u,
            m: rng.gen_range(0.5..1.5),
            m_prime: rng.gen_range(0.5..1.5),
            chi0: random_amp(&mut rng),
            chi0_prime: random_amp(&mut rng),
        };
        let s = rng.gen_range(-5.0..5.0);
        let (lhs, rhs) = mass_pairing_identity(&pair, &pot, s).unwrap();
        assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1e-12), "{lhs} vs {rhs}");
    }
}

#[test]
fn mass_pairing_phase_and_example() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let pot = PlaneWavePotential::harmonic(0.2, 1.0).unwrap();
    let pair = MassPair {
        k2: 0.3,
        k3: 0.0,
        u: -0.5,
        m: 1.0,
        m_prime: 1.2,
        chi0: random_amp(&mut rng),
        chi0_prime: random_amp(&mut rng),
    };
    let (lhs2, rhs2) = mass_pairing_identity(&pair, &pot, 2.0).unwrap();
    assert!((lhs2 - rhs2).norm() <= 1e-10 * rhs2.norm());
    let (lhs0, _) = mass_pairing_identity(&pair, &pot, 0.0).unwrap();
    let expect = Complex64::from_polar(1.0, (1.0 - 1.44) * 2.0 / (4.0 * -0.5));
    assert!((lhs2 / lhs0 - expect).norm() < 1e-12);

    let same = MassPair { m_prime: 1.0, chi0_prime: pair.chi0, ..pair };
    let (l, r) = mass_pairing_identity(&same, &pot, 1.7).unwrap();
    let init = spin_inner(&pair.chi0.chi0(), &(light_cone().gamma[0] * pair.chi0.chi0()));
    assert!((r - init * 2.0).norm() < 1e-14 && (l - r).norm() < 1e-12);
}

fn smooth_packet(m: f64) -> WavePacket {
    let amp = ModeAmplitude::from_components([Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.5)]);
    WavePacket::smooth_in_u(m, 0.0, 0.0, (-2.0, -0.2), 4001, -1.1, 0.15, amp).unwrap()
}

fn l_grid() -> Vec<f64> {
    let pos: Vec<f64> = (0..24).map(|i| 20.0 * 10f64.powf(i as f64 / 23.0)).collect();
    pos.iter().copied().chain(pos.iter().map(|l| -l)).collect()
}

#[test]
fn smooth_packets_decay_along_the_null_direction() {
    let packet = smooth_packet(1.0);
    let zero = null_decay_scan(&packet, &PlaneWavePotential::Zero, &[-5.0, 0.0, 5.0], &l_grid()).unwrap();
    assert!(zero.decaying && zero.min_order >= 4.0, "{}", zero.min_order);
    let harm = null_decay_scan(&packet, &PlaneWavePotential::harmonic(0.2, 1.0).unwrap(), &[-5.0, 0.0, 5.0], &l_grid()).unwrap();
    assert!(harm.min_order >= 4.0);
    assert!((harm.min_order - zero.min_order).abs() <= 0.1 * zero.min_order, "{} vs {}", harm.min_order, zero.min_order);
}

#[test]
fn single_mode_packet_is_flagged() {
    let mode = ModeParams::new(0.0, 0.0, -0.8, 1.0).unwrap();
    let amp = ModeAmplitude::from_components([Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    let packet = WavePacket::single(&mode, amp, Complex64::new(1.0, 0.0)).unwrap();
    let r = null_decay_scan(&packet, &PlaneWavePotential::Zero, &[0.0], &l_grid()).unwrap();
    assert!(!r.decaying);
    assert!(r.min_order.abs() < 1e-10);
}

#[test]
fn documents_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let pot = PlaneWavePotential::harmonic(0.2, 1.0).unwrap();
    let doc = PacketDocument { potential: pot.to_spec(), packet: random_packet(&mut rng, 1.0) };
    let text = serde_json::to_string(&doc).unwrap();
    let back: PacketDocument = serde_json::from_str(&text).unwrap();
    assert_eq!(back, doc);

    let fam = MassFamily::with_bump((0.8, 1.2), 5, &random_packet(&mut rng, 0.8)).unwrap();
    let fdoc = MassFamilyDocument { potential: pot.to_spec(), family: fam };
    let text = serde_json::to_string(&fdoc).unwrap();
    let back: MassFamilyDocument = serde_json::from_str(&text).unwrap();
    assert_eq!(back, fdoc);

    // an amplitude outside the Pi- range is rejected on load
    let bad = text.replacen("\"chi0\":[[", "\"chi0\":[[5.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],\"x\":[[", 1);
    assert!(serde_json::from_str::<MassFamilyDocument>(&bad).is_err());
    let _ = Spinor::zero();
}
