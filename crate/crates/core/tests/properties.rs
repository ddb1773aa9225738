use std::f64::consts::PI;

use nalgebra::Vector3;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rotomag::angular_momentum::{self as am};
use rotomag::heff;
use rotomag::linalg;
use rotomag::phases::{self, phase_distance, principal_value};
use rotomag::propagator::{self, Propagator};
use rotomag::scenario::{
    derive_frame_a, derive_frame_c, resonance_orders, RotatingField, Scenario, ScenarioA, ScenarioB, ScenarioC, Sign,
    DEFAULT_RESONANCE_TOL,
};

fn field() -> impl Strategy<Value = RotatingField> {
    (0.2..2.0f64, 0.05..PI - 0.05).prop_map(|(w, th)| RotatingField::new(w, th).unwrap())
}

fn scenario_a(l_max: u32) -> impl Strategy<Value = ScenarioA> {
    (field(), 0.05..2.5f64, 0..=l_max, -1.5..1.5f64).prop_map(|(f, w0, l, eps)| ScenarioA::new(f, w0, l, eps).unwrap())
}

fn scenario_b() -> impl Strategy<Value = ScenarioB> {
    (scenario_a(2), -1.0..1.0f64).prop_map(|(a, xi)| ScenarioB::new(a, xi).unwrap())
}

fn scenario_c() -> impl Strategy<Value = ScenarioC> {
    (field(), 1..=4u32, any::<bool>(), any::<bool>(), 0.2..2.0f64).prop_map(|(f, two_s, q, mu, w2)| {
        let sign = |b: bool| if b { Sign::Plus } else { Sign::Minus };
        ScenarioC::new(f, two_s, sign(q), sign(mu), 1.0, w2, 1.0).unwrap()
    })
}

fn any_scenario() -> impl Strategy<Value = Scenario> {
    prop_oneof![
        scenario_a(2).prop_map(Scenario::A),
        scenario_b().prop_map(Scenario::B),
        scenario_c().prop_map(Scenario::CSpin),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frame_vectors(sc in scenario_a(3)) {
        let frame = derive_frame_a(&sc).unwrap();
        let orbital = frame.orbital.unwrap();
        for tilt in [orbital, frame.spin] {
            prop_assert!((tilt.sin * tilt.sin + tilt.cos * tilt.cos - 1.0).abs() < 1e-12);
            let omega = tilt.solid_angle();
            prop_assert!((0.0..=4.0 * PI).contains(&omega));
            prop_assert_eq!(omega == 0.0, tilt.angle() == 0.0);
        }
        let n0 = sc.field.n0();
        let (w0, w) = (sc.omega0, sc.field.omega());
        let want_l = n0 * w0 - Vector3::z() * w;
        let want_s = n0 * (2.0 * w0) - Vector3::z() * w;
        prop_assert!((orbital.axis() * orbital.frequency - want_l).amax() < 1e-12);
        prop_assert!((frame.spin.axis() * frame.spin.frequency - want_s).amax() < 1e-12);
    }

    #[test]
    fn spin_frame_c(sc in scenario_c()) {
        let frame = derive_frame_c(&sc).unwrap();
        let mu = sc.sign_mu.value();
        let lhs = frame.spin.axis() * (mu * frame.spin.frequency);
        let rhs = sc.field.n0() * (mu * sc.omega2) + Vector3::z() * sc.field.omega();
        prop_assert!((lhs - rhs).amax() < 1e-12);
    }

    #[test]
    fn similarity_a(sc in scenario_a(3)) {
        let h = heff::build_heff_a(&sc);
        let frame = derive_frame_a(&sc).unwrap();
        let (wl, ws) = (frame.omega_l().unwrap(), frame.omega_s());
        let b = &h.basis;
        let core = linalg::identity(b.dim()) * linalg::c(sc.epsilon_nl) + &b.lz * linalg::c(wl) + &b.sz * linalg::c(ws);
        let r = b.rotation(frame.theta_l().unwrap(), frame.theta_s());
        prop_assert!(linalg::max_abs_diff(&h.matrix, &(&r * core * r.adjoint())) < 1e-12);
    }

    #[test]
    fn similarity_spin_sector(sc in scenario_c()) {
        let h = heff::build_heff_c_spin(&sc);
        let frame = derive_frame_c(&sc).unwrap();
        let b = &h.basis;
        let core = &b.sz * linalg::c(-sc.sign_mu.value() * frame.omega_s());
        let r = b.rotation(0.0, frame.theta_s());
        prop_assert!(linalg::max_abs_diff(&h.matrix, &(&r * core * r.adjoint())) < 1e-12);
    }

    #[test]
    fn conjugation_by_w(sc in any_scenario(), t in -30.0..30.0f64) {
        let h = heff::effective_hamiltonian(&sc);
        let w = propagator::w_matrix(&h.basis, sc.field().omega(), t);
        let back = w.adjoint() * phases::matrix_h_of_t(&sc, t) * &w;
        prop_assert!(linalg::max_abs_diff(&back, &phases::matrix_h_of_t(&sc, 0.0)) < 1e-11);
    }

    #[test]
    fn propagator_unitary(sc in any_scenario(), t in 0.0..50.0f64) {
        let p = Propagator::new(&sc).unwrap();
        prop_assert!(linalg::unitarity_deviation(&p.u_full(t)) < 1e-10);
    }

    #[test]
    fn phase_identity_and_expectations(sc in any_scenario(), t in 0.0..10.0f64) {
        let eig = heff::eigensystem(&sc).unwrap();
        let p = Propagator::new(&sc).unwrap();
        let omega = sc.field().omega();
        let frame = sc.frame().unwrap();
        for k in 0..eig.len() {
            let r = phases::cyclic_phase_report(&sc, &eig, k).unwrap();
            prop_assert!(r.identity_residual() < 1e-10);
            prop_assert!(phase_distance(r.delta, r.beta + r.gamma) < 1e-10);

            // <H(t)> is constant along the cyclic solution
            let psi = p.evolve(&eig.state(k), t);
            let e_t = linalg::expectation(&phases::matrix_h_of_t(&sc, t), &psi);
            prop_assert!((e_t - r.energy - omega * r.jz_expect).abs() < 1e-10);

            if let (Scenario::A(_), Some(lab)) = (&sc, eig.label(k)) {
                let b = p.basis();
                let phi = eig.state(k);
                let lz = linalg::expectation(&b.lz, &phi);
                let sz = linalg::expectation(&b.sz, &phi);
                prop_assert!((lz - lab.m as f64 * frame.theta_l().unwrap().cos()).abs() < 1e-12);
                prop_assert!((sz - lab.ms() * frame.theta_s().cos()).abs() < 1e-12);
                prop_assert!(r.closed_form_deviation().unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn principal_value_range(x in -1e4..1e4f64) {
        let p = principal_value(x);
        prop_assert!(p > -PI && p <= PI);
        prop_assert!(phase_distance(p, x) < 1e-9);
    }

    #[test]
    fn rotation_composition(two_j in 0..=8u32, a in -7.0..7.0f64, b in -7.0..7.0f64) {
        let rep = am::build_rep(two_j);
        let lhs = rep.rotation_about_y(a) * rep.rotation_about_y(b);
        prop_assert!(linalg::max_abs_diff(&lhs, &rep.rotation_about_y(a + b)) < 1e-12);
    }
}

/// Generic parameters give a nondegenerate shell; collisions are counted, not failed,
/// as long as at least 95% of sets are clean.
#[test]
fn generic_spectrum_is_nondegenerate() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut generic, mut clean) = (0, 0);
    let mut collisions = Vec::new();
    while generic < 400 {
        let f = RotatingField::new(rng.gen_range(0.2..2.0), rng.gen_range(0.05..PI - 0.05)).unwrap();
        let sc = ScenarioA::new(f, rng.gen_range(0.05..2.5), rng.gen_range(0..=3), rng.gen_range(-1.0..1.0)).unwrap();
        if resonance_orders(&sc, DEFAULT_RESONANCE_TOL).unwrap().is_some() {
            continue;
        }
        generic += 1;
        let mut e = heff::analytic_eigensystem_a(&sc).unwrap().energies;
        e.sort_by(f64::total_cmp);
        match e.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min) {
            gap if gap > 1e-9 => clean += 1,
            gap => collisions.push((sc.l, gap)),
        }
    }
    if !collisions.is_empty() {
        eprintln!("degenerate sets (l, gap): {collisions:?}");
    }
    assert!(clean as f64 >= 0.95 * generic as f64, "{clean} of {generic} sets nondegenerate");
}
