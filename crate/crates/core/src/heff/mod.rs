//! Time-independent effective Hamiltonians `H_eff = H(0) - omega j_z` and
//! their eigensystems.
//!
//! Scenarios A and B live on the `(2l+1) x 2` product space of one `(n, l)`
//! shell, where `H_0` acts as the scalar `epsilon_nl`. Scenario C is split:
//! the spin sector is an exact finite matrix, the orbital sector is handled
//! by the Landau formulas in [`landau`].

pub mod landau;

pub use landau::{corrected_energies_c, laguerre, landau_energies, landau_wavefunction, LandauNumbers, LandauState};

use crate::angular_momentum::{self as am, ProductRep};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::scenario::{derive_frame_a, derive_frame_c, Scenario, ScenarioA, ScenarioB, ScenarioC, ScenarioTag};

/// Quantum numbers attached to an analytic eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateLabel {
    pub m: i32,
    pub two_ms: i32,
    pub n_rho: Option<u32>,
    pub n_z: Option<i32>,
}

impl StateLabel {
    pub fn new(m: i32, two_ms: i32) -> Self {
        StateLabel { m, two_ms, n_rho: None, n_z: None }
    }

    pub fn ms(&self) -> f64 {
        self.two_ms as f64 / 2.0
    }
}

impl std::fmt::Display for StateLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if let Some(n_rho) = self.n_rho {
            write!(f, "n_rho={n_rho};")?;
        }
        if let Some(n_z) = self.n_z {
            write!(f, "n_z={n_z};")?;
        }
        let ms = if self.two_ms % 2 == 0 { format!("{}", self.two_ms / 2) } else { format!("{}/2", self.two_ms) };
        write!(f, "m={};ms={}", self.m, ms)
    }
}

#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub matrix: CMatrix,
    pub basis: ProductRep,
    pub tag: ScenarioTag,
}

impl EffectiveHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Ascending energies with orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub energies: Vec<f64>,
    pub states: CMatrix,
    pub labels: Option<Vec<StateLabel>>,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn state(&self, k: usize) -> CVector {
        self.states.column(k).into_owned()
    }

    pub fn label(&self, k: usize) -> Option<StateLabel> {
        self.labels.as_ref().map(|l| l[k])
    }

    pub fn find(&self, label: &StateLabel) -> Option<usize> {
        self.labels.as_ref()?.iter().position(|l| l.m == label.m && l.two_ms == label.two_ms)
    }

    /// Largest `|H v - E v|` over all pairs.
    pub fn max_residual(&self, h: &CMatrix) -> f64 {
        (0..self.len())
            .map(|k| {
                let v = self.state(k);
                (h * &v - v.scale(self.energies[k])).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn orthonormality_deviation(&self) -> f64 {
        linalg::unitarity_deviation(&self.states)
    }
}

fn product_basis(two_l: u32, two_s: u32) -> ProductRep {
    am::tensor_embed(&am::build_rep(two_l), &am::build_rep(two_s))
}

/// `epsilon_nl + omega_L l.n_L + omega_S s.n_S`, assembled from the vectors
/// `omega_L n_L = omega0 n0 - omega z` and `omega_S n_S = 2 omega0 n0 - omega z`.
///
/// The vector form stays valid where a tilt angle is undefined (vanishing
/// effective field), so construction never fails for a valid scenario.
pub fn build_heff_a(sc: &ScenarioA) -> EffectiveHamiltonian {
    let basis = product_basis(2 * sc.l, ScenarioA::TWO_S);
    let matrix = heff_a_matrix(sc, &basis);
    EffectiveHamiltonian { matrix, basis, tag: ScenarioTag::A }
}

fn heff_a_matrix(sc: &ScenarioA, basis: &ProductRep) -> CMatrix {
    linalg::identity(basis.dim()).scale(sc.epsilon_nl)
        + am::dot(basis.l_ops(), &sc.orbital_field())
        + am::dot(basis.s_ops(), &sc.spin_field())
}

/// Eigenstates `exp(-i th_L l_y - i th_S s_y) |m, m_s>` with energies
/// `epsilon_nl + m omega_L + m_s omega_S`, sorted ascending.
pub fn analytic_eigensystem_a(sc: &ScenarioA) -> Result<EigenSystem> {
    let frame = derive_frame_a(sc)?;
    let orbital = frame.orbital.expect("scenario A has an orbital tilt");
    let basis = product_basis(2 * sc.l, ScenarioA::TWO_S);
    let rotation = basis.rotation(orbital.angle(), frame.theta_s());
    let entries = (0..basis.dim()).map(|k| {
        let (two_m, two_ms) = basis.labels_of(k);
        let energy = sc.epsilon_nl + (two_m / 2) as f64 * orbital.frequency + two_ms as f64 / 2.0 * frame.omega_s();
        (energy, StateLabel::new(two_m / 2, two_ms), k)
    });
    Ok(collect_sorted(entries, &rotation))
}

fn collect_sorted(entries: impl Iterator<Item = (f64, StateLabel, usize)>, columns: &CMatrix) -> EigenSystem {
    let mut entries: Vec<_> = entries.collect();
    // stable: ties keep product-basis order
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut states = linalg::zeros(columns.nrows());
    for (dst, (_, _, src)) in entries.iter().enumerate() {
        states.set_column(dst, &columns.column(*src));
    }
    EigenSystem {
        energies: entries.iter().map(|e| e.0).collect(),
        states,
        labels: Some(entries.iter().map(|e| e.1).collect()),
    }
}

/// Scenario A matrix plus `xi_nl l.s`.
pub fn build_heff_b(sc: &ScenarioB) -> EffectiveHamiltonian {
    let basis = product_basis(2 * sc.base.l, ScenarioA::TWO_S);
    let matrix = heff_a_matrix(&sc.base, &basis) + basis.l_dot_s().scale(sc.xi_nl);
    EffectiveHamiltonian { matrix, basis, tag: ScenarioTag::B }
}

/// Exact eigensystem of the weak-field Hamiltonian for an `l = 0` shell,
/// where the spin-orbit term vanishes.
pub fn weakfield_l0_states(sc: &ScenarioB) -> Result<EigenSystem> {
    if sc.base.l != 0 {
        return Err(Error::Unsupported(format!(
            "explicit weak-field eigenstates exist only for l = 0 (got l = {})",
            sc.base.l
        )));
    }
    let frame = derive_frame_a(&sc.base)?;
    let rep = am::build_rep(ScenarioA::TWO_S);
    let rotation = rep.rotation_about_y(frame.theta_s());
    let entries = (0..rep.dim()).map(|k| {
        let two_ms = rep.two_m(k);
        (sc.base.epsilon_nl + two_ms as f64 / 2.0 * frame.omega_s(), StateLabel::new(0, two_ms), k)
    });
    Ok(collect_sorted(entries, &rotation))
}

pub fn eigensolve_hermitian(m: &CMatrix) -> Result<EigenSystem> {
    let (energies, states) = linalg::eigh(m)?;
    Ok(EigenSystem { energies, states, labels: None })
}

/// Spin sector of scenario C: `-eps(mu) omega2 s.n0 - omega s_z`, which equals
/// `-eps(mu) omega_S s.n_S`.
pub fn build_heff_c_spin(sc: &ScenarioC) -> EffectiveHamiltonian {
    let basis = product_basis(0, sc.two_s);
    let matrix = am::dot(basis.s_ops(), &sc.spin_field()).scale(-sc.sign_mu.value());
    EffectiveHamiltonian { matrix, basis, tag: ScenarioTag::CSpin }
}

/// Spin-sector eigenstates `exp(-i th_S s_y) chi_{m_s}` with energies
/// `-eps(mu) m_s omega_S`.
pub fn spin_eigensystem_c(sc: &ScenarioC) -> Result<EigenSystem> {
    let frame = derive_frame_c(sc)?;
    let rep = am::build_rep(sc.two_s);
    let rotation = rep.rotation_about_y(frame.theta_s());
    let entries = (0..rep.dim()).map(|k| {
        let two_ms = rep.two_m(k);
        (-sc.sign_mu.value() * two_ms as f64 / 2.0 * frame.omega_s(), StateLabel::new(0, two_ms), k)
    });
    Ok(collect_sorted(entries, &rotation))
}

pub fn effective_hamiltonian(sc: &Scenario) -> EffectiveHamiltonian {
    match sc {
        Scenario::A(a) => build_heff_a(a),
        Scenario::B(b) => build_heff_b(b),
        Scenario::CSpin(c) => build_heff_c_spin(c),
    }
}

/// The eigensystem the rest of the crate works with: analytic (and labelled)
/// where closed forms exist, numeric otherwise.
pub fn eigensystem(sc: &Scenario) -> Result<EigenSystem> {
    match sc {
        Scenario::A(a) => analytic_eigensystem_a(a),
        Scenario::B(b) if b.base.l == 0 => weakfield_l0_states(b),
        Scenario::B(b) => eigensolve_hermitian(&build_heff_b(b).matrix),
        Scenario::CSpin(c) => spin_eigensystem_c(c),
    }
}
