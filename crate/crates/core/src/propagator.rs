//! Exact time evolution `U(t) = W(t) exp(-i H_eff t)` with
//! `W(t) = exp(-i omega t j_z)`; no time ordering is involved.

use num_complex::Complex64;

use crate::angular_momentum::ProductRep;
use crate::error::Result;
use crate::heff::{self, EffectiveHamiltonian, EigenSystem};
use crate::linalg::{self, CMatrix, CVector};
use crate::scenario::{Scenario, ScenarioTag};

pub use crate::linalg::expm_hermitian;

/// `exp(-i omega t j_z)`; diagonal because `j_z` is diagonal in the product basis.
pub fn w_matrix(basis: &ProductRep, omega: f64, t: f64) -> CMatrix {
    let n = basis.dim();
    let mut w = linalg::zeros(n);
    for k in 0..n {
        w[(k, k)] = Complex64::from_polar(1.0, -omega * t * basis.jz[(k, k)].re);
    }
    w
}

#[derive(Debug, Clone)]
pub struct Propagator {
    pub tag: ScenarioTag,
    pub omega: f64,
    pub heff: EffectiveHamiltonian,
    /// numeric eigensystem of `heff`, used for every `exp(-i H_eff t)`
    eigen: EigenSystem,
}

impl Propagator {
    pub fn new(sc: &Scenario) -> Result<Self> {
        let heff = heff::effective_hamiltonian(sc);
        let eigen = heff::eigensolve_hermitian(&heff.matrix)?;
        Ok(Propagator { tag: sc.tag(), omega: sc.field().omega(), heff, eigen })
    }

    pub fn basis(&self) -> &ProductRep {
        &self.heff.basis
    }

    pub fn dim(&self) -> usize {
        self.heff.dim()
    }

    pub fn w(&self, t: f64) -> CMatrix {
        w_matrix(self.basis(), self.omega, t)
    }

    pub fn u_eff(&self, t: f64) -> CMatrix {
        linalg::expm_from_eigen(&self.eigen.energies, &self.eigen.states, t)
    }

    pub fn u_full(&self, t: f64) -> CMatrix {
        if t == 0.0 {
            return linalg::identity(self.dim());
        }
        self.w(t) * self.u_eff(t)
    }

    pub fn evolve(&self, psi0: &CVector, t: f64) -> CVector {
        self.u_full(t) * psi0
    }
}

pub fn u_full(p: &Propagator, t: f64) -> CMatrix {
    p.u_full(t)
}
