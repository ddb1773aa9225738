//! Orbital sector of the general charged particle: Landau levels of
//! `H^z = p^2/2 + rho^2 omega1^2/2 - eps(q) omega1 l_z - eps(mu) omega_S s_z`
//! (mass and `hbar` set to 1), with the `z` motion in a periodic box of length `d`.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::scenario::{derive_frame_c, ScenarioC};

/// Radial cutoff in units of `1/alpha`.
pub const RHO_MAX_ALPHA: f64 = 12.0;
pub const RADIAL_NODES: usize = 400;
const PHI_NODES: usize = 64;
const Z_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LandauNumbers {
    pub n_rho: u32,
    pub n_z: i32,
    pub m: i32,
    pub two_ms: i32,
}

impl LandauNumbers {
    pub fn new(n_rho: u32, n_z: i32, m: i32, two_ms: i32) -> Self {
        LandauNumbers { n_rho, n_z, m, two_ms }
    }

    pub fn ms(&self) -> f64 {
        self.two_ms as f64 / 2.0
    }

    pub fn validate(&self, two_s: u32) -> Result<()> {
        let ts = two_s as i32;
        if self.two_ms.abs() > ts || (ts - self.two_ms) % 2 != 0 {
            return Err(Error::InvalidQuantumNumbers(format!(
                "m_s = {}/2 is not one of s, s-1, ..., -s for s = {}/2",
                self.two_ms, two_s
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandauState {
    pub numbers: LandauNumbers,
    pub alpha: f64,
}

impl LandauState {
    pub fn new(sc: &ScenarioC, numbers: LandauNumbers) -> Result<Self> {
        numbers.validate(sc.two_s)?;
        Ok(LandauState { numbers, alpha: sc.alpha() })
    }

    /// `N = alpha sqrt(2 n_rho! / Gamma(n_rho + |m| + 1))`
    pub fn normalization(&self) -> f64 {
        let n = self.numbers.n_rho as u64;
        let am = self.numbers.m.unsigned_abs() as u64;
        // n! / (n + |m|)!
        let ratio: f64 = (n + 1..=n + am).map(|k| 1.0 / k as f64).product();
        self.alpha * (2.0 * ratio).sqrt()
    }

    /// Radial factor `R(rho)` and its derivative `dR/drho`.
    pub fn radial(&self, rho: f64) -> (f64, f64) {
        let n = self.numbers.n_rho;
        let am = self.numbers.m.unsigned_abs();
        let a = am as f64;
        let x = self.alpha * rho;
        let y = x * x;
        let gauss = (-0.5 * y).exp();
        let lag = laguerre(n, a, y);
        let dlag = if n == 0 { 0.0 } else { -laguerre(n - 1, a + 1.0, y) };
        let norm = self.normalization();
        let xm = x.powi(am as i32);
        let value = norm * gauss * xm * lag;
        // d/dx [e^{-x^2/2} x^|m| L(x^2)]
        let xm1 = if am == 0 { 0.0 } else { a * x.powi(am as i32 - 1) };
        let dx = gauss * ((-x * xm + xm1) * lag + xm * 2.0 * x * dlag);
        (value, norm * dx * self.alpha)
    }
}

/// Generalized Laguerre polynomial `L_n^a(x)` by the three-term recurrence.
pub fn laguerre(n: u32, a: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + a - x) * cur - (k + a) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Unperturbed Landau energy:
/// `(2 n_rho + |m| + 1) omega1 + 2 n_z^2 pi^2 / d^2 - eps(q) m omega1 - eps(mu) m_s omega_S`.
pub fn landau_energies(sc: &ScenarioC, qn: LandauNumbers) -> Result<f64> {
    qn.validate(sc.two_s)?;
    let omega_s = derive_frame_c(sc)?.omega_s();
    let m = qn.m as f64;
    let nz = qn.n_z as f64;
    Ok((2.0 * qn.n_rho as f64 + m.abs() + 1.0) * sc.omega1 + 2.0 * nz * nz * PI * PI / (sc.box_d * sc.box_d)
        - sc.sign_q.value() * m * sc.omega1
        - sc.sign_mu.value() * qn.ms() * omega_s)
}

/// First-order corrected energy: adds `<-omega l_z> = -m omega cos(theta_b)`.
pub fn corrected_energies_c(sc: &ScenarioC, qn: LandauNumbers) -> Result<f64> {
    let e0 = landau_energies(sc, qn)?;
    Ok(e0 - qn.m as f64 * sc.field.omega() * sc.field.theta_b().cos())
}

/// `u(rho, phi, z)` without the spin factor.
pub fn landau_wavefunction(st: &LandauState, sc: &ScenarioC, rho: f64, phi: f64, z: f64) -> Complex64 {
    let (r, _) = st.radial(rho);
    angular_z_factor(st, sc, phi, z) * r
}

fn angular_z_factor(st: &LandauState, sc: &ScenarioC, phi: f64, z: f64) -> Complex64 {
    let d = sc.box_d;
    let phase = st.numbers.m as f64 * phi + 2.0 * PI * st.numbers.n_z as f64 * z / d;
    Complex64::from_polar(1.0 / (2.0 * PI * d).sqrt(), phase)
}

/// `<a|b>` over all space and spin. The angular, `z` and spin integrals are
/// orthogonality relations and are applied exactly; the radial integral uses
/// Gauss–Legendre on `[0, 12/alpha]`.
pub fn landau_overlap(a: &LandauState, b: &LandauState) -> f64 {
    let (na, nb) = (a.numbers, b.numbers);
    if na.m != nb.m || na.n_z != nb.n_z || na.two_ms != nb.two_ms {
        return 0.0;
    }
    let alpha = a.alpha.min(b.alpha);
    let (nodes, weights) = gauss_legendre(RADIAL_NODES, 0.0, RHO_MAX_ALPHA / alpha);
    nodes.iter().zip(&weights).map(|(&rho, &w)| w * rho * a.radial(rho).0 * b.radial(rho).0).sum()
}

/// `<u| l |u>` by full cylindrical quadrature: Gauss–Legendre in `rho` and
/// `z`, trapezoid in `phi`, with `l = r x (-i grad)` applied analytically.
pub fn orbital_moment(st: &LandauState, sc: &ScenarioC) -> Vector3<f64> {
    let d = sc.box_d;
    let m = st.numbers.m as f64;
    let k = 2.0 * PI * st.numbers.n_z as f64 / d;
    let (rhos, wr) = gauss_legendre(RADIAL_NODES, 0.0, RHO_MAX_ALPHA / st.alpha);
    let (zs, wz) = gauss_legendre(Z_NODES, 0.0, d);
    let dphi = 2.0 * PI / PHI_NODES as f64;
    let i = Complex64::new(0.0, 1.0);
    let mut acc = Vector3::<Complex64>::zeros();
    for (&rho, &w_rho) in rhos.iter().zip(&wr) {
        let (r, dr) = st.radial(rho);
        for p in 0..PHI_NODES {
            let phi = p as f64 * dphi;
            let (sp, cp) = phi.sin_cos();
            let (x, y) = (rho * cp, rho * sp);
            for (&z, &w_z) in zs.iter().zip(&wz) {
                let u = angular_z_factor(st, sc, phi, z);
                // gradient of R(rho) e^{i m phi} e^{i k z}
                let d_rho = u * dr;
                let d_phi_over_rho = u * (i * m * r / rho);
                let gx = d_rho * cp - d_phi_over_rho * sp;
                let gy = d_rho * sp + d_phi_over_rho * cp;
                let gz = u * (i * k * r);
                let lu = Vector3::new(y * gz - z * gy, z * gx - x * gz, x * gy - y * gx) * (-i);
                let weight = w_rho * rho * dphi * w_z;
                acc += lu * ((u * r).conj() * weight);
            }
        }
    }
    acc.map(|z| z.re)
}

/// `<l>` at `t = 0` in the first-order eigenstate `exp(-i theta_b l_y) u`:
/// the quadrature moment of `u` rotated about `y` by `theta_b`.
pub fn orbital_moment_tilted(st: &LandauState, sc: &ScenarioC) -> Vector3<f64> {
    let (s, c) = sc.field.theta_b().sin_cos();
    let rot = Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c);
    rot * orbital_moment(st, sc)
}

/// Relative residual `|H^z u - E0 u| / |u|` with every derivative of the
/// cylindrical Laplacian and of `l_z` replaced by central differences of
/// spacing `h` (`rho`, `z`) and `alpha h` (`phi`).
///
/// `u` is separable with unit-modulus `phi` and `z` factors, so the residual
/// is sampled along a single `(phi, z)` ray on the radial grid `rho_k = k h`.
pub fn landau_fd_residual(st: &LandauState, sc: &ScenarioC, h: f64) -> Result<f64> {
    let e0 = landau_energies(sc, st.numbers)?;
    let omega_s = derive_frame_c(sc)?.omega_s();
    let (phi0, z0) = (0.3, 0.25 * sc.box_d);
    let hphi = st.alpha * h;
    let i = Complex64::new(0.0, 1.0);
    let u = |rho: f64, phi: f64, z: f64| landau_wavefunction(st, sc, rho, phi, z);
    let spin_energy = -sc.sign_mu.value() * st.numbers.ms() * omega_s;

    let steps = (RHO_MAX_ALPHA / st.alpha / h).ceil() as usize;
    let (mut res2, mut norm2) = (0.0, 0.0);
    for kk in 1..=steps {
        let rho = kk as f64 * h;
        let c0 = u(rho, phi0, z0);
        let (rp, rm) = (u(rho + h, phi0, z0), u(rho - h, phi0, z0));
        let (pp, pm) = (u(rho, phi0 + hphi, z0), u(rho, phi0 - hphi, z0));
        let (zp, zm) = (u(rho, phi0, z0 + h), u(rho, phi0, z0 - h));
        let lap = (rp - c0 * 2.0 + rm) / (h * h)
            + (rp - rm) / (2.0 * h * rho)
            + (pp - c0 * 2.0 + pm) / (rho * rho * hphi * hphi)
            + (zp - c0 * 2.0 + zm) / (h * h);
        let lz = (pp - pm) * (-i) / (2.0 * hphi);
        let hu = lap * -0.5 + c0 * (0.5 * sc.omega1 * sc.omega1 * rho * rho) - lz * (sc.sign_q.value() * sc.omega1)
            + c0 * spin_energy;
        res2 += (hu - c0 * e0).norm_sqr() * rho;
        norm2 += c0.norm_sqr() * rho;
    }
    Ok((res2 / norm2).sqrt())
}
