//! Lab-frame Hamiltonians, cyclic-solution phase bookkeeping, precession
//! traces and resonant superpositions.
//!
//! For an eigenstate `phi_i` of `H_eff` the solution returns after one period
//! `T` with total phase `delta = -E T - pi two_s`; the dynamic phase is
//! `beta = -E T - 2 pi <j_z>` and the geometric phase
//! `gamma = delta - beta = -pi two_s + 2 pi <j_z>`, all mod 2 pi.

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::angular_momentum::{self as am, ProductRep};
use crate::error::{Error, Result};
use crate::heff::{self, landau, EigenSystem, LandauNumbers, LandauState, StateLabel};
use crate::linalg::{self, CMatrix, CVector};
use crate::propagator::Propagator;
use crate::scenario::{derive_frame_c, resonance_orders, RotatingField, Scenario, ScenarioA, ScenarioC};

/// Eigenstate residual above which a state is not treated as cyclic.
pub const EIGENSTATE_TOL: f64 = 1e-8;
/// Fidelity deficit below which a superposition counts as cyclic.
pub const CYCLIC_FIDELITY_TOL: f64 = 1e-9;

/// Reduce an angle to `(-pi, pi]`.
pub fn principal_value(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Distance between two angles on the circle, in `[0, pi]`.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    principal_value(a - b).abs()
}

/// `H(t) = C + n(t) . K` with constant `C` and vector operator `K`.
#[derive(Debug, Clone)]
pub struct TimeDependentHamiltonian {
    pub field: RotatingField,
    pub constant: CMatrix,
    pub coupling: [CMatrix; 3],
}

impl TimeDependentHamiltonian {
    pub fn new(sc: &Scenario) -> Self {
        let (two_l, two_s) = sc.two_l_two_s();
        let basis = am::tensor_embed(&am::build_rep(two_l), &am::build_rep(two_s));
        let n = basis.dim();
        let zeeman = |basis: &ProductRep, w0: f64, i: usize| (basis.l_ops()[i] + basis.s_ops()[i].scale(2.0)).scale(w0);
        let (constant, coupling) = match sc {
            Scenario::A(a) => (linalg::identity(n).scale(a.epsilon_nl), [0, 1, 2].map(|i| zeeman(&basis, a.omega0, i))),
            Scenario::B(b) => (
                linalg::identity(n).scale(b.base.epsilon_nl) + basis.l_dot_s().scale(b.xi_nl),
                [0, 1, 2].map(|i| zeeman(&basis, b.base.omega0, i)),
            ),
            Scenario::CSpin(c) => {
                let g = -c.sign_mu.value() * c.omega2;
                (linalg::zeros(n), [0, 1, 2].map(|i| basis.s_ops()[i].scale(g)))
            }
        };
        TimeDependentHamiltonian { field: *sc.field(), constant, coupling }
    }

    pub fn dim(&self) -> usize {
        self.constant.nrows()
    }

    pub fn at(&self, t: f64) -> CMatrix {
        let n = self.field.direction(t);
        let mut h = self.constant.clone();
        for (k, nk) in self.coupling.iter().zip(n.iter()) {
            if *nk != 0.0 {
                h += k.scale(*nk);
            }
        }
        h
    }
}

/// Lab-frame Hamiltonian: A `eps + omega0 (l + 2s).n(t)`; B adds `xi l.s`;
/// C spin sector `-eps(mu) omega2 s.n(t)`.
pub fn matrix_h_of_t(sc: &Scenario, t: f64) -> CMatrix {
    TimeDependentHamiltonian::new(sc).at(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub value: f64,
    /// whether the orbital contribution is exact (false for scenario C,
    /// where it rests on first-order perturbation theory)
    pub orbital_exact: bool,
    pub spin_exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawPhases {
    pub delta: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport {
    pub index: Option<usize>,
    pub label: Option<StateLabel>,
    pub energy: f64,
    pub jz_expect: f64,
    pub delta: f64,
    pub beta: f64,
    pub gamma: f64,
    pub raw: RawPhases,
    pub gamma_closed_form: Option<ClosedForm>,
}

impl PhaseReport {
    fn from_parts(energy: f64, jz_expect: f64, two_s: u32, period: f64) -> Self {
        let delta = -energy * period - PI * two_s as f64;
        let beta = -energy * period - 2.0 * PI * jz_expect;
        let gamma = -PI * two_s as f64 + 2.0 * PI * jz_expect;
        PhaseReport {
            index: None,
            label: None,
            energy,
            jz_expect,
            delta: principal_value(delta),
            beta: principal_value(beta),
            gamma: principal_value(gamma),
            raw: RawPhases { delta, beta, gamma },
            gamma_closed_form: None,
        }
    }

    /// `|delta - beta - gamma|` on the circle.
    pub fn identity_residual(&self) -> f64 {
        phase_distance(self.delta, self.beta + self.gamma)
    }

    pub fn closed_form_deviation(&self) -> Option<f64> {
        self.gamma_closed_form.map(|cf| phase_distance(self.gamma, cf.value))
    }
}

/// Phase decomposition of the cyclic solution seeded by eigenstate `index`.
pub fn cyclic_phase_report(sc: &Scenario, eig: &EigenSystem, index: usize) -> Result<PhaseReport> {
    if index >= eig.len() {
        return Err(Error::param("index", format!("eigenstate {index} out of range ({} states)", eig.len())));
    }
    let period = sc.field().period()?;
    let heff = heff::effective_hamiltonian(sc);
    let phi = eig.state(index);
    if phi.nrows() != heff.dim() {
        return Err(Error::DimensionMismatch { expected: heff.dim(), got: phi.nrows() });
    }
    let energy = eig.energies[index];
    let residual = (&heff.matrix * &phi - phi.scale(energy)).norm();
    if residual > EIGENSTATE_TOL * linalg::max_abs(&heff.matrix).max(1.0) {
        return Err(Error::NotEigenstate { residual });
    }
    let (_, two_s) = sc.two_l_two_s();
    let jz_expect = linalg::expectation(&heff.basis.jz, &phi);
    let mut report = PhaseReport::from_parts(energy, jz_expect, two_s, period);
    report.index = Some(index);
    report.label = eig.label(index);
    report.gamma_closed_form = match (sc, report.label) {
        (Scenario::A(_), Some(lab)) => {
            let frame = sc.frame()?;
            let omega_l = frame.solid_angle_l().expect("scenario A has an orbital tilt");
            Some(ClosedForm {
                value: -(lab.m as f64) * omega_l - lab.ms() * frame.solid_angle_s(),
                orbital_exact: true,
                spin_exact: true,
            })
        }
        (Scenario::B(b), Some(lab)) if b.base.l == 0 => {
            Some(ClosedForm { value: -lab.ms() * sc.frame()?.solid_angle_s(), orbital_exact: true, spin_exact: true })
        }
        (Scenario::CSpin(_), Some(lab)) => {
            Some(ClosedForm { value: -lab.ms() * sc.frame()?.solid_angle_s(), orbital_exact: true, spin_exact: true })
        }
        _ => None,
    };
    Ok(report)
}

/// Phases of the first-order scenario C state `exp(-i th_B l_y - i th_S s_y) u_i`,
/// whose `<j_z> = m cos(theta_b) + m_s cos(theta_s)` and corrected energy
/// includes `-m omega cos(theta_b)`. The orbital term is approximate.
pub fn landau_phase_report(sc: &ScenarioC, qn: LandauNumbers) -> Result<PhaseReport> {
    let energy = heff::corrected_energies_c(sc, qn)?;
    let frame = derive_frame_c(sc)?;
    let period = sc.field.period()?;
    let jz_expect = qn.m as f64 * sc.field.theta_b().cos() + qn.ms() * frame.spin.cos;
    let mut report = PhaseReport::from_parts(energy, jz_expect, sc.two_s, period);
    report.label = Some(StateLabel { m: qn.m, two_ms: qn.two_ms, n_rho: Some(qn.n_rho), n_z: Some(qn.n_z) });
    report.gamma_closed_form = Some(ClosedForm {
        value: -(qn.m as f64) * frame.solid_angle_b - qn.ms() * frame.solid_angle_s(),
        orbital_exact: false,
        spin_exact: true,
    });
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub t: f64,
    pub l: Vector3<f64>,
    pub s: Vector3<f64>,
}

fn vector_expectation(ops: [&CMatrix; 3], v: &CVector) -> Vector3<f64> {
    Vector3::new(linalg::expectation(ops[0], v), linalg::expectation(ops[1], v), linalg::expectation(ops[2], v))
}

/// `<l>(t)` and `<s>(t)` along the solution seeded by eigenstate `index`,
/// measured on the exactly evolved state.
pub fn angular_momentum_trace(
    sc: &Scenario,
    eig: &EigenSystem,
    index: usize,
    times: &[f64],
) -> Result<Vec<TracePoint>> {
    // same preconditions as the phase decomposition
    cyclic_phase_report(sc, eig, index)?;
    let prop = Propagator::new(sc)?;
    let phi = eig.state(index);
    let basis = prop.basis();
    Ok(times
        .iter()
        .map(|&t| {
            let psi = prop.evolve(&phi, t);
            TracePoint { t, l: vector_expectation(basis.l_ops(), &psi), s: vector_expectation(basis.s_ops(), &psi) }
        })
        .collect())
}

/// Scenario C trace: the spin part is evolved exactly in the spin sector; the
/// orbital part is the `t = 0` quadrature moment of the tilted Landau state,
/// carried along by `W(t)` (a rotation about `z` by `omega t`).
pub fn landau_trace(sc: &ScenarioC, qn: LandauNumbers, times: &[f64]) -> Result<Vec<TracePoint>> {
    let spin_sc = Scenario::CSpin(*sc);
    let eig = heff::spin_eigensystem_c(sc)?;
    let index = eig
        .find(&StateLabel::new(0, qn.two_ms))
        .ok_or_else(|| Error::InvalidQuantumNumbers(format!("no spin state with 2 m_s = {}", qn.two_ms)))?;
    let spin = angular_momentum_trace(&spin_sc, &eig, index, times)?;
    let st = LandauState::new(sc, qn)?;
    let l0 = landau::orbital_moment_tilted(&st, sc);
    let omega = sc.field.omega();
    Ok(spin
        .into_iter()
        .map(|p| {
            let (s, c) = (omega * p.t).sin_cos();
            let l = Vector3::new(c * l0.x - s * l0.y, s * l0.x + c * l0.y, l0.z);
            TracePoint { t: p.t, l, s: p.s }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleCheck {
    pub is_cyclic: bool,
    /// `|<psi(0)|psi(T)>|`
    pub fidelity: f64,
    /// `arg <psi(0)|psi(T)>`
    pub phase: f64,
    pub resonance: Option<(u32, u32)>,
    /// `-epsilon_nl T - (N_S + 1) pi`, reduced, when resonant
    pub expected_phase: Option<f64>,
}

impl CycleCheck {
    pub fn phase_error(&self) -> Option<f64> {
        self.expected_phase.map(|e| phase_distance(self.phase, e))
    }
}

/// Evolve `sum_k a_k phi_k` over one period; `coefficients` follow the order of
/// [`heff::analytic_eigensystem_a`].
pub fn superposition_cycle_check(sc: &ScenarioA, coefficients: &[Complex64], tol: f64) -> Result<CycleCheck> {
    let eig = heff::analytic_eigensystem_a(sc)?;
    if coefficients.len() != eig.len() {
        return Err(Error::DimensionMismatch { expected: eig.len(), got: coefficients.len() });
    }
    let a = CVector::from_column_slice(coefficients);
    let norm = a.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized { norm });
    }
    let psi0 = &eig.states * a;
    let period = sc.field.period()?;
    let prop = Propagator::new(&Scenario::A(*sc))?;
    let psi_t = prop.evolve(&psi0, period);
    let overlap = psi0.dotc(&psi_t);
    let resonance = resonance_orders(sc, tol)?;
    let fidelity = overlap.norm();
    Ok(CycleCheck {
        is_cyclic: fidelity >= 1.0 - CYCLIC_FIDELITY_TOL,
        fidelity,
        phase: overlap.arg(),
        resonance,
        expected_phase: resonance.map(|(_, ns)| principal_value(-sc.epsilon_nl * period - (ns as f64 + 1.0) * PI)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heff::analytic_eigensystem_a;
    use crate::linalg::max_abs_diff;
    use crate::scenario::{ScenarioB, Sign};

    fn resonant_field() -> RotatingField {
        RotatingField::new(1.0, (3f64.sqrt() / (2.0 * 2f64.sqrt())).acos()).unwrap()
    }

    fn resonant_a(l: u32) -> ScenarioA {
        ScenarioA::new(resonant_field(), 1.5f64.sqrt(), l, 0.0).unwrap()
    }

    #[test]
    fn principal_value_range() {
        assert!((principal_value(-3.0 * PI) - PI).abs() < 1e-12);
        assert_eq!(principal_value(PI), PI);
        assert!((principal_value(-1.25 * PI) - 0.75 * PI).abs() < 1e-15);
        assert!(phase_distance(PI - 1e-12, -PI + 1e-12) < 1e-11);
    }

    #[test]
    fn h_of_t_examples() {
        let sc = Scenario::B(ScenarioB::new(resonant_a(1), 0.3).unwrap());
        let h0 = matrix_h_of_t(&sc, 0.0);
        let heff = heff::effective_hamiltonian(&sc);
        let want = &heff.matrix + heff.basis.jz.scale(1.0);
        assert!(max_abs_diff(&h0, &want) < 1e-12);
        let t = 0.77;
        assert!(max_abs_diff(&matrix_h_of_t(&sc, t), &matrix_h_of_t(&sc, t + 2.0 * PI)) < 1e-12);

        let axial = Scenario::A(ScenarioA::new(RotatingField::new(1.0, 0.0).unwrap(), 1.0, 2, 0.0).unwrap());
        assert!(max_abs_diff(&matrix_h_of_t(&axial, 0.0), &matrix_h_of_t(&axial, 1.234)) < 1e-15);
    }

    #[test]
    fn resonant_top_state_phases() {
        let sc = resonant_a(1);
        let eig = analytic_eigensystem_a(&sc).unwrap();
        let k = eig.find(&StateLabel::new(1, 1)).unwrap();
        let r = cyclic_phase_report(&Scenario::A(sc), &eig, k).unwrap();
        assert!((r.jz_expect + 0.125).abs() < 1e-12);
        assert!((r.gamma - 2.3561944902).abs() < 1e-10);
        assert!((r.beta - PI / 4.0).abs() < 1e-10);
        assert!(r.identity_residual() < 1e-10);
        assert!(r.closed_form_deviation().unwrap() < 1e-10);
    }

    #[test]
    fn weakfield_l0_gamma() {
        let b = ScenarioB::new(resonant_a(0), 0.5).unwrap();
        let sc = Scenario::B(b);
        let eig = heff::eigensystem(&sc).unwrap();
        let k = eig.find(&StateLabel::new(0, 1)).unwrap();
        let r = cyclic_phase_report(&sc, &eig, k).unwrap();
        assert!((r.gamma + 0.75 * PI).abs() < 1e-10);
        assert!(r.closed_form_deviation().unwrap() < 1e-10);
    }

    #[test]
    fn adiabatic_probe() {
        let f = RotatingField::new(1e-6, PI / 3.0).unwrap();
        let sc = ScenarioA::new(f, 1.0, 1, 0.0).unwrap();
        let eig = analytic_eigensystem_a(&sc).unwrap();
        let k = eig.find(&StateLabel::new(1, 1)).unwrap();
        let r = cyclic_phase_report(&Scenario::A(sc), &eig, k).unwrap();
        let omega_b = PI;
        assert!(phase_distance(r.gamma, -omega_b - 0.5 * omega_b) < 1e-4);
    }

    #[test]
    fn rejects_non_eigenstates() {
        let sc = resonant_a(1);
        let mut eig = analytic_eigensystem_a(&sc).unwrap();
        let mixed = (eig.state(0) + eig.state(1)).scale(std::f64::consts::FRAC_1_SQRT_2);
        eig.states.set_column(0, &mixed);
        let err = cyclic_phase_report(&Scenario::A(sc), &eig, 0).unwrap_err();
        assert!(matches!(err, Error::NotEigenstate { .. }));
    }

    #[test]
    fn precession_trace() {
        let sc = resonant_a(1);
        let s = Scenario::A(sc);
        let eig = analytic_eigensystem_a(&sc).unwrap();
        let k = eig.find(&StateLabel::new(1, 1)).unwrap();
        let tr = angular_momentum_trace(&s, &eig, k, &[0.0, PI, 0.4]).unwrap();
        let want = Vector3::new(15f64.sqrt() / 4.0, 0.0, -0.25);
        assert!((tr[0].l - want).norm() < 1e-12);
        assert!((tr[0].l.x - 0.9682458366).abs() < 1e-10);
        assert!((tr[1].l.x + tr[0].l.x).abs() < 1e-10);
        assert!((tr[1].l.z - tr[0].l.z).abs() < 1e-10);
        let (st, ct) = (0.25f64.acos().sin(), 0.25);
        let w: f64 = 0.4;
        let want_s = Vector3::new(st * w.cos(), st * w.sin(), ct) * 0.5;
        assert!((tr[2].s - want_s).norm() < 1e-12);

        let k0 = eig.find(&StateLabel::new(0, -1)).unwrap();
        for p in angular_momentum_trace(&s, &eig, k0, &[0.0, 1.0, 3.0]).unwrap() {
            assert!(p.l.norm() < 1e-12);
        }
    }

    #[test]
    fn superposition_examples() {
        let sc = resonant_a(1);
        let a = vec![Complex64::new(1.0 / 6f64.sqrt(), 0.0); 6];
        let chk = superposition_cycle_check(&sc, &a, 1e-9).unwrap();
        assert!(chk.is_cyclic);
        assert_eq!(chk.resonance, Some((1, 2)));
        assert!(phase_distance(chk.phase, PI) < 1e-9);
        assert!(chk.phase_error().unwrap() < 1e-9);

        let eig = analytic_eigensystem_a(&sc).unwrap();
        let mut single = vec![Complex64::new(0.0, 0.0); 6];
        single[2] = Complex64::new(1.0, 0.0);
        let chk = superposition_cycle_check(&sc, &single, 1e-9).unwrap();
        let rep = cyclic_phase_report(&Scenario::A(sc), &eig, 2).unwrap();
        assert!(chk.is_cyclic);
        assert!(phase_distance(chk.phase, rep.delta) < 1e-10);

        let f = RotatingField::new(1.0, PI / 2.0).unwrap();
        let off = ScenarioA::new(f, 1.0, 1, 0.0).unwrap();
        let mut two = vec![Complex64::new(0.0, 0.0); 6];
        two[0] = Complex64::new(0.6, 0.0);
        two[3] = Complex64::new(0.0, 0.8);
        let chk = superposition_cycle_check(&off, &two, 1e-6).unwrap();
        assert!(!chk.is_cyclic);
        assert!(chk.fidelity < 1.0 - 1e-6);
        assert!(chk.resonance.is_none());
    }

    #[test]
    fn landau_phase_closed_form() {
        let f = RotatingField::new(0.01, PI / 3.0).unwrap();
        for two_s in 1..=3 {
            let sc = ScenarioC::new(f, two_s, Sign::Plus, Sign::Minus, 1.0, 1.0, 1.0).unwrap();
            for m in -1..=1 {
                let r = landau_phase_report(&sc, LandauNumbers::new(0, 0, m, two_s as i32)).unwrap();
                assert!(r.closed_form_deviation().unwrap() < 1e-10);
                assert!(!r.gamma_closed_form.unwrap().orbital_exact);
            }
        }
    }
}
