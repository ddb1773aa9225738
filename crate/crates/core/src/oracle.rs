//! Brute-force verification: classical fourth-order Runge–Kutta on
//! `d psi/dt = -i H(t) psi` with the lab-frame `H(t)`, Simpson quadrature of
//! the dynamic phase, and distances to the exact propagator.
//!
//! Nothing here uses `W(t)`, `H_eff` or any closed form; the only shared
//! input is the lab-frame Hamiltonian.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::heff::EigenSystem;
use crate::linalg::{self, CMatrix, CVector};
use crate::phases::{principal_value, TimeDependentHamiltonian};
use crate::propagator::Propagator;
use crate::quadrature::{simpson, simpson_weight};
use crate::scenario::{Scenario, ScenarioTag};

pub const MIN_STEPS: usize = 100;
/// Stability guard on `|H| h`.
pub const MAX_NORM_STEP: f64 = 0.1;

const MINUS_I: Complex64 = Complex64 { re: 0.0, im: -1.0 };

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CVector>,
    pub tag: ScenarioTag,
    pub step: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &CVector {
        self.states.last().expect("trajectory has at least two samples")
    }

    /// `max_t | |psi(t)| - 1 |`
    pub fn norm_drift(&self) -> f64 {
        self.states.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// `H(t)` is unitarily equivalent to `H(0)` for every `t`, so `|H(0)|` bounds
/// the step everywhere.
fn checked_step(hgen: &TimeDependentHamiltonian, t_end: f64, steps: usize) -> Result<f64> {
    if steps < MIN_STEPS {
        return Err(Error::TooFewSteps { steps, min: MIN_STEPS });
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::param("t_end", format!("must be finite and >= 0, got {t_end}")));
    }
    let h = t_end / steps as f64;
    let norm_h = linalg::hermitian_norm(&hgen.at(0.0))? * h;
    if norm_h > MAX_NORM_STEP {
        return Err(Error::StepTooLarge { norm_h });
    }
    Ok(h)
}

/// Fixed-step RK4 on `dY/dt = -i H(t) Y`. `observe(k, t_k, Y_k, H(t_k))` is
/// called on every grid point including both ends.
fn rk4<F>(hgen: &TimeDependentHamiltonian, y0: CMatrix, h: f64, steps: usize, mut observe: F) -> CMatrix
where
    F: FnMut(usize, f64, &CMatrix, &CMatrix),
{
    let mut y = y0;
    let half = Complex64::new(0.5 * h, 0.0);
    let full = Complex64::new(h, 0.0);
    let sixth = Complex64::new(h / 6.0, 0.0);
    for k in 0..steps {
        let t = k as f64 * h;
        let h0 = hgen.at(t);
        observe(k, t, &y, &h0);
        let hm = hgen.at(t + 0.5 * h);
        let h1 = hgen.at((k + 1) as f64 * h);
        let k1 = (&h0 * &y) * MINUS_I;
        let k2 = (&hm * (&y + &k1 * half)) * MINUS_I;
        let k3 = (&hm * (&y + &k2 * half)) * MINUS_I;
        let k4 = (&h1 * (&y + &k3 * full)) * MINUS_I;
        y += (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * sixth;
    }
    let t_end = steps as f64 * h;
    observe(steps, t_end, &y, &hgen.at(t_end));
    y
}

fn check_state(psi0: &CVector, dim: usize) -> Result<()> {
    if psi0.nrows() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: psi0.nrows() });
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

/// Integrate the lab-frame equation from `psi0` over `[0, t_end]`, recording
/// every step.
pub fn integrate_tdse(sc: &Scenario, psi0: &CVector, t_end: f64, steps: usize) -> Result<Trajectory> {
    let hgen = TimeDependentHamiltonian::new(sc);
    check_state(psi0, hgen.dim())?;
    let h = checked_step(&hgen, t_end, steps)?;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let y0 = CMatrix::from_column_slice(psi0.nrows(), 1, psi0.as_slice());
    rk4(&hgen, y0, h, steps, |_, t, y, _| {
        times.push(t);
        states.push(y.column(0).into_owned());
    });
    Ok(Trajectory { times, states, tag: sc.tag(), step: h })
}

/// Raw `-int_0^T <psi|H(t)|psi> dt` by composite Simpson over the trajectory,
/// which must span exactly one period with an even number of steps.
pub fn dynamic_phase_integral(tr: &Trajectory, sc: &Scenario) -> Result<f64> {
    if sc.tag() != tr.tag {
        return Err(Error::Quadrature("trajectory belongs to a different scenario".into()));
    }
    let period = sc.field().period()?;
    let span = tr.times.last().copied().unwrap_or(0.0) - tr.times.first().copied().unwrap_or(0.0);
    if tr.times.first() != Some(&0.0) || (span - period).abs() > 1e-9 * period {
        return Err(Error::Quadrature(format!("trajectory must cover [0, T] with T = {period}, covers {span}")));
    }
    let intervals = tr.times.len() - 1;
    if !intervals.is_multiple_of(2) {
        return Err(Error::Quadrature(format!(
            "Simpson needs an even number of steps, got {intervals}; integrate with {} steps",
            intervals + 1
        )));
    }
    let hgen = TimeDependentHamiltonian::new(sc);
    let samples: Vec<f64> =
        tr.times.iter().zip(&tr.states).map(|(&t, psi)| -linalg::expectation(&hgen.at(t), psi)).collect();
    simpson(&samples, tr.step).ok_or_else(|| Error::Quadrature("not enough samples".into()))
}

/// Dynamic phase over one period, reduced to `(-pi, pi]`.
pub fn dynamic_phase_quadrature(tr: &Trajectory, sc: &Scenario) -> Result<f64> {
    dynamic_phase_integral(tr, sc).map(principal_value)
}

/// Propagator from integrating every basis column.
pub fn oracle_propagator(sc: &Scenario, t: f64, steps: usize) -> Result<CMatrix> {
    let hgen = TimeDependentHamiltonian::new(sc);
    let h = checked_step(&hgen, t, steps)?;
    Ok(rk4(&hgen, linalg::identity(hgen.dim()), h, steps, |_, _, _, _| {}))
}

/// Operator-norm distance between the exact and the integrated propagator at `t`.
pub fn propagator_mismatch(sc: &Scenario, t: f64, steps: usize) -> Result<f64> {
    let oracle = oracle_propagator(sc, t, steps)?;
    let exact = Propagator::new(sc)?.u_full(t);
    Ok(linalg::spectral_norm(&(exact - oracle)))
}

/// Phases of one cyclic solution measured on the integrated trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OraclePhases {
    /// `arg <psi(0)|psi(T)>`
    pub total: f64,
    /// raw Simpson value of `-int <H> dt`
    pub dynamic: f64,
    /// `total - dynamic`, reduced
    pub gamma: f64,
    /// `|<psi(0)|psi(T)>|`
    pub fidelity: f64,
    pub norm_drift: f64,
    /// largest deviation of the `<H(t)>` samples from their mean
    pub energy_spread: f64,
}

/// Integrate every eigenvector of `eig` over one period at once and measure
/// total, dynamic and geometric phases for each.
pub fn oracle_cyclic_phases(sc: &Scenario, eig: &EigenSystem, steps: usize) -> Result<Vec<OraclePhases>> {
    if !steps.is_multiple_of(2) {
        return Err(Error::Quadrature(format!("Simpson needs an even number of steps, got {steps}")));
    }
    let period = sc.field().period()?;
    let hgen = TimeDependentHamiltonian::new(sc);
    if eig.states.nrows() != hgen.dim() {
        return Err(Error::DimensionMismatch { expected: hgen.dim(), got: eig.states.nrows() });
    }
    let h = checked_step(&hgen, period, steps)?;
    let n = eig.len();
    let mut dynamic = vec![0.0; n];
    let mut drift = vec![0.0_f64; n];
    let mut e_min = vec![f64::INFINITY; n];
    let mut e_max = vec![f64::NEG_INFINITY; n];
    let y0 = eig.states.clone();
    let y_end = rk4(&hgen, y0.clone(), h, steps, |k, _, y, hm| {
        let w = simpson_weight(k, steps, h);
        let hy = hm * y;
        for j in 0..n {
            let col = y.column(j);
            let e = col.dotc(&hy.column(j)).re;
            dynamic[j] -= w * e;
            e_min[j] = e_min[j].min(e);
            e_max[j] = e_max[j].max(e);
            drift[j] = drift[j].max((col.norm() - 1.0).abs());
        }
    });
    Ok((0..n)
        .map(|j| {
            let overlap = y0.column(j).dotc(&y_end.column(j));
            let total = overlap.arg();
            OraclePhases {
                total,
                dynamic: dynamic[j],
                gamma: principal_value(total - dynamic[j]),
                fidelity: overlap.norm(),
                norm_drift: drift[j],
                energy_spread: 0.5 * (e_max[j] - e_min[j]),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceStudy {
    pub coarse_steps: usize,
    pub coarse_error: f64,
    pub fine_error: f64,
    /// `log2(coarse_error / fine_error)`
    pub order: f64,
}

/// Final-state error against the exact propagator at `steps` and `2 steps`.
pub fn convergence_order(sc: &Scenario, psi0: &CVector, t_end: f64, steps: usize) -> Result<ConvergenceStudy> {
    let exact = Propagator::new(sc)?.evolve(psi0, t_end);
    let err = |n: usize| -> Result<f64> { Ok((integrate_tdse(sc, psi0, t_end, n)?.final_state() - &exact).norm()) };
    let coarse_error = err(steps)?;
    let fine_error = err(2 * steps)?;
    Ok(ConvergenceStudy { coarse_steps: steps, coarse_error, fine_error, order: (coarse_error / fine_error).log2() })
}

/// Coarsest even step count whose `|H| h` stays near `target` (and within the
/// stability guard); used to place convergence studies in the asymptotic regime.
pub fn steps_for_norm_step(sc: &Scenario, t_end: f64, target: f64) -> Result<usize> {
    let norm = linalg::hermitian_norm(&TimeDependentHamiltonian::new(sc).at(0.0))?;
    let n = ((norm * t_end / target.min(MAX_NORM_STEP)).ceil() as usize).max(MIN_STEPS);
    Ok(n + n % 2)
}
