//! Physical configurations and the rotating-frame quantities derived from them.
//!
//! All couplings are frequencies with `hbar = 1`:
//! - `omega0 = mu_B B` (alkaline electron, scenarios A and B)
//! - `omega1 = |q| B / 2Mc`, `omega2 = |mu| B / s` (general particle, scenario C)
//!
//! The field direction precesses about `z` at angle `theta_b` and rate `omega`.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Default tolerance for detecting integer frequency ratios.
pub const DEFAULT_RESONANCE_TOL: f64 = 1e-9;

/// Relative size below which an effective frequency counts as zero.
const DEGENERATE_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatingField {
    omega: f64,
    theta_b: f64,
}

impl RotatingField {
    /// `omega = 0` is accepted as the static-field limit; anything needing
    /// the period rejects it later.
    pub fn new(omega: f64, theta_b: f64) -> Result<Self> {
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::param("omega", format!("must be finite and >= 0, got {omega}")));
        }
        if !(0.0..=PI).contains(&theta_b) {
            return Err(Error::param("theta_b", format!("must lie in [0, pi], got {theta_b}")));
        }
        Ok(RotatingField { omega, theta_b })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn theta_b(&self) -> f64 {
        self.theta_b
    }

    pub fn period(&self) -> Result<f64> {
        if self.omega > 0.0 {
            Ok(2.0 * PI / self.omega)
        } else {
            Err(Error::param("omega", "period undefined for a static field (omega = 0)"))
        }
    }

    /// `n(t) = (sin th cos wt, sin th sin wt, cos th)`
    pub fn direction(&self, t: f64) -> Vector3<f64> {
        let (st, ct) = self.theta_b.sin_cos();
        let (sw, cw) = (self.omega * t).sin_cos();
        Vector3::new(st * cw, st * sw, ct)
    }

    /// `n_0 = n(0)`
    pub fn n0(&self) -> Vector3<f64> {
        self.direction(0.0)
    }

    /// Solid angle of the cone swept by the field, `2 pi (1 - cos theta_b)`.
    pub fn solid_angle(&self) -> f64 {
        solid_angle_from_cos(self.theta_b.cos())
    }
}

pub fn field_direction(field: &RotatingField, t: f64) -> Vector3<f64> {
    field.direction(t)
}

/// Strong-field alkaline electron (spin 1/2, no spin-orbit term).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioA {
    pub field: RotatingField,
    pub omega0: f64,
    pub l: u32,
    pub epsilon_nl: f64,
}

impl ScenarioA {
    pub const TWO_S: u32 = 1;

    pub fn new(field: RotatingField, omega0: f64, l: u32, epsilon_nl: f64) -> Result<Self> {
        if !(omega0.is_finite() && omega0 >= 0.0) {
            return Err(Error::param("omega0", format!("must be finite and >= 0, got {omega0}")));
        }
        if !epsilon_nl.is_finite() {
            return Err(Error::param("epsilon_nl", "must be finite"));
        }
        Ok(ScenarioA { field, omega0, l, epsilon_nl })
    }

    /// `omega_L n_L = omega0 n0 - omega z`
    pub fn orbital_field(&self) -> Vector3<f64> {
        self.field.n0() * self.omega0 - Vector3::z() * self.field.omega()
    }

    /// `omega_S n_S = 2 omega0 n0 - omega z`
    pub fn spin_field(&self) -> Vector3<f64> {
        self.field.n0() * (2.0 * self.omega0) - Vector3::z() * self.field.omega()
    }
}

/// Weak-field alkaline electron: scenario A plus a shell-constant spin-orbit term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioB {
    pub base: ScenarioA,
    pub xi_nl: f64,
}

impl ScenarioB {
    pub fn new(base: ScenarioA, xi_nl: f64) -> Result<Self> {
        if !xi_nl.is_finite() {
            return Err(Error::param("xi_nl", "must be finite"));
        }
        Ok(ScenarioB { base, xi_nl })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_int(v: i64) -> Option<Self> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }
}

/// General charged particle with spin `two_s / 2`, no central potential.
/// Mass and `hbar` are 1 in internal units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioC {
    pub field: RotatingField,
    pub two_s: u32,
    pub sign_q: Sign,
    pub sign_mu: Sign,
    pub omega1: f64,
    pub omega2: f64,
    pub box_d: f64,
}

impl ScenarioC {
    pub fn new(
        field: RotatingField,
        two_s: u32,
        sign_q: Sign,
        sign_mu: Sign,
        omega1: f64,
        omega2: f64,
        box_d: f64,
    ) -> Result<Self> {
        if two_s == 0 {
            return Err(Error::param("two_s", "spin must be positive"));
        }
        for (name, v) in [("omega1", omega1), ("omega2", omega2), ("box_d", box_d)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(ScenarioC { field, two_s, sign_q, sign_mu, omega1, omega2, box_d })
    }

    pub fn s(&self) -> f64 {
        self.two_s as f64 / 2.0
    }

    /// Inverse magnetic length `sqrt(M omega1 / hbar)`.
    pub fn alpha(&self) -> f64 {
        self.omega1.sqrt()
    }

    /// `omega_S n_S = omega2 n0 + eps(mu) omega z`; the spin part of the
    /// effective Hamiltonian is `-eps(mu) omega_S s . n_S`.
    pub fn spin_field(&self) -> Vector3<f64> {
        self.field.n0() * self.omega2 + Vector3::z() * (self.sign_mu.value() * self.field.omega())
    }
}

/// An effective precession axis in the xz-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tilt {
    pub frequency: f64,
    pub sin: f64,
    pub cos: f64,
}

impl Tilt {
    /// Tilt of `v` away from `+z`; `v` must lie in the xz-plane with `v_x >= 0`.
    fn from_field(v: &Vector3<f64>, scale: f64, species: &'static str) -> Result<Self> {
        let frequency = v.norm();
        if frequency <= DEGENERATE_REL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::DegenerateFrame { species });
        }
        Ok(Tilt { frequency, sin: v.x / frequency, cos: v.z / frequency })
    }

    pub fn angle(&self) -> f64 {
        self.sin.atan2(self.cos)
    }

    pub fn axis(&self) -> Vector3<f64> {
        Vector3::new(self.sin, 0.0, self.cos)
    }

    pub fn solid_angle(&self) -> f64 {
        solid_angle_from_cos(self.cos)
    }
}

fn solid_angle_from_cos(cos: f64) -> f64 {
    2.0 * PI * (1.0 - cos)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedFrame {
    /// Orbital precession axis; absent for scenario C, whose orbital tilt is
    /// `theta_b` at first order.
    pub orbital: Option<Tilt>,
    pub spin: Tilt,
    /// `2 pi (1 - cos theta_b)`
    pub solid_angle_b: f64,
}

impl DerivedFrame {
    pub fn omega_l(&self) -> Option<f64> {
        self.orbital.map(|t| t.frequency)
    }

    pub fn omega_s(&self) -> f64 {
        self.spin.frequency
    }

    pub fn theta_l(&self) -> Option<f64> {
        self.orbital.map(|t| t.angle())
    }

    pub fn theta_s(&self) -> f64 {
        self.spin.angle()
    }

    pub fn solid_angle_l(&self) -> Option<f64> {
        self.orbital.map(|t| t.solid_angle())
    }

    pub fn solid_angle_s(&self) -> f64 {
        self.spin.solid_angle()
    }
}

pub fn derive_frame_a(sc: &ScenarioA) -> Result<DerivedFrame> {
    let scale = sc.omega0.max(sc.field.omega());
    let orbital = Tilt::from_field(&sc.orbital_field(), scale, "orbital (omega_L)")?;
    let spin = Tilt::from_field(&sc.spin_field(), scale, "spin (omega_S)")?;
    Ok(DerivedFrame { orbital: Some(orbital), spin, solid_angle_b: sc.field.solid_angle() })
}

pub fn derive_frame_c(sc: &ScenarioC) -> Result<DerivedFrame> {
    let scale = sc.omega2.max(sc.field.omega());
    let spin = Tilt::from_field(&sc.spin_field(), scale, "spin (omega_S)")?;
    Ok(DerivedFrame { orbital: None, spin, solid_angle_b: sc.field.solid_angle() })
}

/// A scenario whose state space is a finite matrix space: the full
/// orbit-times-spin shell for A and B, the spin sector alone for C.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    A(ScenarioA),
    B(ScenarioB),
    CSpin(ScenarioC),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioTag {
    A,
    B,
    CSpin,
}

impl Scenario {
    pub fn tag(&self) -> ScenarioTag {
        match self {
            Scenario::A(_) => ScenarioTag::A,
            Scenario::B(_) => ScenarioTag::B,
            Scenario::CSpin(_) => ScenarioTag::CSpin,
        }
    }

    pub fn field(&self) -> &RotatingField {
        match self {
            Scenario::A(sc) => &sc.field,
            Scenario::B(sc) => &sc.base.field,
            Scenario::CSpin(sc) => &sc.field,
        }
    }

    /// `(two_l, two_s)` of the matrix space.
    pub fn two_l_two_s(&self) -> (u32, u32) {
        match self {
            Scenario::A(sc) => (2 * sc.l, ScenarioA::TWO_S),
            Scenario::B(sc) => (2 * sc.base.l, ScenarioA::TWO_S),
            Scenario::CSpin(sc) => (0, sc.two_s),
        }
    }

    pub fn frame(&self) -> Result<DerivedFrame> {
        match self {
            Scenario::A(sc) => derive_frame_a(sc),
            Scenario::B(sc) => derive_frame_a(&sc.base),
            Scenario::CSpin(sc) => derive_frame_c(sc),
        }
    }
}

/// `(N_L, N_S)` when `omega_L / omega` and `omega_S / omega` are both within
/// `tol` of positive integers.
pub fn resonance_orders(sc: &ScenarioA, tol: f64) -> Result<Option<(u32, u32)>> {
    if !(tol > 0.0 && tol < 0.5) {
        return Err(Error::param("tol", format!("must lie in (0, 0.5), got {tol}")));
    }
    let frame = derive_frame_a(sc)?;
    let omega = sc.field.omega();
    if omega == 0.0 {
        return Ok(None);
    }
    let order = |freq: f64| {
        let ratio = freq / omega;
        let n = ratio.round();
        (n >= 1.0 && (ratio - n).abs() <= tol).then_some(n as u32)
    };
    let omega_l = frame.omega_l().expect("scenario A has an orbital tilt");
    Ok(order(omega_l).zip(order(frame.omega_s())))
}
