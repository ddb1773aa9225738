//! Matrix representations of angular momentum.
//!
//! Every representation uses the `|j, m>` basis ordered by descending `m`,
//! so row/column `k` carries `m = j - k`. Quantum numbers are stored doubled
//! (`two_j`, `two_m`) so half-integers stay exact.

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector};

/// Tolerance on `|n| = 1` for direction vectors.
pub const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AngularMomentumRep {
    two_j: u32,
    pub jx: CMatrix,
    pub jy: CMatrix,
    pub jz: CMatrix,
}

impl AngularMomentumRep {
    /// Ladder-operator construction of `(jx, jy, jz)` for spin `two_j / 2`.
    pub fn new(two_j: u32) -> Self {
        let dim = two_j as usize + 1;
        let j = two_j as f64 / 2.0;
        let m_of = |k: usize| j - k as f64;

        let mut jz = linalg::zeros(dim);
        // raising operator: <m+1| J+ |m> = sqrt(j(j+1) - m(m+1))
        let mut jp = linalg::zeros(dim);
        for k in 0..dim {
            let m = m_of(k);
            jz[(k, k)] = c(m);
            if k > 0 {
                jp[(k - 1, k)] = c((j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt());
            }
        }
        let jm = jp.adjoint();
        let jx = (&jp + &jm).scale(0.5);
        let jy = (&jp - &jm) * Complex64::new(0.0, -0.5);
        AngularMomentumRep { two_j, jx, jy, jz }
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    /// Doubled magnetic quantum number of basis index `k`.
    pub fn two_m(&self, k: usize) -> i32 {
        self.two_j as i32 - 2 * k as i32
    }

    /// Basis index carrying doubled magnetic quantum number `two_m`.
    pub fn index_of(&self, two_m: i32) -> Option<usize> {
        let tj = self.two_j as i32;
        if two_m.abs() > tj || (tj - two_m) % 2 != 0 {
            return None;
        }
        Some(((tj - two_m) / 2) as usize)
    }

    pub fn basis_vector(&self, k: usize) -> CVector {
        let mut v = CVector::zeros(self.dim());
        v[k] = c(1.0);
        v
    }

    pub fn ops(&self) -> [&CMatrix; 3] {
        [&self.jx, &self.jy, &self.jz]
    }

    /// `exp(-i theta jy)`; its entries are the Wigner small-d functions
    /// `d^j_{m'm}(theta)`, row `m'`, column `m`.
    pub fn rotation_about_y(&self, theta: f64) -> CMatrix {
        if theta == 0.0 {
            return linalg::identity(self.dim());
        }
        let (values, vectors) = linalg::eigh(&self.jy).expect("jy is Hermitian");
        let r = linalg::spectral_map(&values, &vectors, |e| Complex64::from_polar(1.0, -e * theta));
        // jy is purely imaginary here, so exp(-i theta jy) is real orthogonal
        r.map(|z| c(z.re))
    }
}

/// Build the spin-`two_j/2` representation.
pub fn build_rep(two_j: u32) -> AngularMomentumRep {
    AngularMomentumRep::new(two_j)
}

pub fn rotation_about_y(rep: &AngularMomentumRep, theta: f64) -> CMatrix {
    rep.rotation_about_y(theta)
}

/// Orbit (`l`) times spin (`s`) product space, `l` index major.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductRep {
    pub l_rep: AngularMomentumRep,
    pub s_rep: AngularMomentumRep,
    pub lx: CMatrix,
    pub ly: CMatrix,
    pub lz: CMatrix,
    pub sx: CMatrix,
    pub sy: CMatrix,
    pub sz: CMatrix,
    pub jz: CMatrix,
}

impl ProductRep {
    pub fn new(l_rep: AngularMomentumRep, s_rep: AngularMomentumRep) -> Self {
        let il = linalg::identity(l_rep.dim());
        let is = linalg::identity(s_rep.dim());
        let lx = linalg::kron(&l_rep.jx, &is);
        let ly = linalg::kron(&l_rep.jy, &is);
        let lz = linalg::kron(&l_rep.jz, &is);
        let sx = linalg::kron(&il, &s_rep.jx);
        let sy = linalg::kron(&il, &s_rep.jy);
        let sz = linalg::kron(&il, &s_rep.jz);
        let jz = &lz + &sz;
        ProductRep { l_rep, s_rep, lx, ly, lz, sx, sy, sz, jz }
    }

    pub fn dim(&self) -> usize {
        self.l_rep.dim() * self.s_rep.dim()
    }

    pub fn l_ops(&self) -> [&CMatrix; 3] {
        [&self.lx, &self.ly, &self.lz]
    }

    pub fn s_ops(&self) -> [&CMatrix; 3] {
        [&self.sx, &self.sy, &self.sz]
    }

    /// `l . s`
    pub fn l_dot_s(&self) -> CMatrix {
        &self.lx * &self.sx + &self.ly * &self.sy + &self.lz * &self.sz
    }

    /// Product basis index for `(m, m_s)`, given as `(two_m, two_ms)`.
    pub fn index_of(&self, two_m: i32, two_ms: i32) -> Option<usize> {
        let a = self.l_rep.index_of(two_m)?;
        let b = self.s_rep.index_of(two_ms)?;
        Some(a * self.s_rep.dim() + b)
    }

    /// `(two_m, two_ms)` of product basis index `k`.
    pub fn labels_of(&self, k: usize) -> (i32, i32) {
        let ds = self.s_rep.dim();
        (self.l_rep.two_m(k / ds), self.s_rep.two_m(k % ds))
    }

    /// `exp(-i theta_l l_y - i theta_s s_y)`
    pub fn rotation(&self, theta_l: f64, theta_s: f64) -> CMatrix {
        linalg::kron(&self.l_rep.rotation_about_y(theta_l), &self.s_rep.rotation_about_y(theta_s))
    }
}

pub fn tensor_embed(l_rep: &AngularMomentumRep, s_rep: &AngularMomentumRep) -> ProductRep {
    ProductRep::new(l_rep.clone(), s_rep.clone())
}

pub fn check_unit(n: &Vector3<f64>) -> Result<()> {
    let norm = n.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NonUnitDirection { norm });
    }
    Ok(())
}

/// `n_x Jx + n_y Jy + n_z Jz`
pub fn component_along(ops: [&CMatrix; 3], n: &Vector3<f64>) -> Result<CMatrix> {
    check_unit(n)?;
    Ok(dot(ops, n))
}

/// Unchecked linear combination `v . J` for arbitrary (not necessarily unit) `v`.
pub(crate) fn dot(ops: [&CMatrix; 3], v: &Vector3<f64>) -> CMatrix {
    ops[0].scale(v.x) + ops[1].scale(v.y) + ops[2].scale(v.z)
}
