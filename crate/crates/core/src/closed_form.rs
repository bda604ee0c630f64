//! Phase-amplitude solution of the transitionless oscillator.
//!
//! For schedules with `ω̇(t0) = 0` the amplitude `ρ = 1/√ω` solves the
//! Ermakov equation `ρ̈ + Ω̃²ρ = W²/ρ³` with `W = 1`, the phase obeys
//! `θ̇ = ω`, and
//!
//! ```text
//! μ = sin θ / √(ω(t0) ω(t)),    ν = √(ω(t0)/ω(t)) cos θ.
//! ```

use crate::cpo::CpoState;
use crate::error::{Error, Result};
use crate::quadrature;
use crate::schedule::{EffectiveFrequencies, FrequencySchedule};

pub const DEFAULT_QUAD_TOL: f64 = 1e-12;

/// Largest `|ω̇(t0)|` accepted as a quiet start.
pub const START_SLOPE_TOL: f64 = 1e-10;

/// Relative step for numerical derivatives of the amplitude.
pub const AMPLITUDE_FD_STEP: f64 = 1e-5;

/// Relative step for numerical derivatives of the phase.
pub const PHASE_FD_STEP: f64 = 1e-2;

fn require_quiet_start(s: &FrequencySchedule) -> Result<()> {
    let slope = s.derivatives_extended(s.t0()).omega_dot;
    if slope.abs() > START_SLOPE_TOL {
        return Err(Error::PreconditionViolation(format!(
            "closed forms need d(omega)/dt = 0 at t0, found {slope:e}"
        )));
    }
    Ok(())
}

/// Phase `θ`, amplitude `ρ` and the frequency `f` recovered from the phase,
/// bound to one schedule.
#[derive(Debug, Clone, Copy)]
pub struct PhaseAmplitude<'a> {
    schedule: &'a FrequencySchedule,
    quad_tol: f64,
}

impl<'a> PhaseAmplitude<'a> {
    pub fn new(schedule: &'a FrequencySchedule) -> Result<Self> {
        Self::with_tolerance(schedule, DEFAULT_QUAD_TOL)
    }

    pub fn with_tolerance(schedule: &'a FrequencySchedule, quad_tol: f64) -> Result<Self> {
        require_quiet_start(schedule)?;
        if !(quad_tol > 0.0) {
            return Err(Error::InvalidArgument(format!("quad_tol {quad_tol} must be positive")));
        }
        Ok(Self { schedule, quad_tol })
    }

    pub fn schedule(&self) -> &FrequencySchedule {
        self.schedule
    }

    /// `∫ ω dt'` over `[a, b]` on the continued schedule.
    fn omega_integral(&self, a: f64, b: f64) -> Result<f64> {
        let s = self.schedule;
        quadrature::integrate(|x| s.derivatives_extended(x).omega, a, b, self.quad_tol)
    }

    pub fn theta(&self, t: f64) -> Result<f64> {
        let t = self.schedule.check_time(t)?;
        self.omega_integral(self.schedule.t0(), t)
    }

    pub fn rho(&self, t: f64) -> Result<f64> {
        Ok(1.0 / self.schedule.omega(t)?.sqrt())
    }

    /// `ρ̇ = −ω̇ / (2 ω^{3/2})`.
    pub fn rho_dot(&self, t: f64) -> Result<f64> {
        let d = self.schedule.derivatives(t)?;
        Ok(-0.5 * d.omega_dot / d.omega.powf(1.5))
    }

    /// `θ̇, θ̈, θ⃛` from fourth-order central differences of the phase.
    pub fn phase_derivatives(&self, t: f64) -> Result<[f64; 3]> {
        let t = self.schedule.check_time(t)?;
        let h = PHASE_FD_STEP * self.schedule.duration();
        // increments θ(t + kh) − θ(t)
        let mut d = [0.0; 7];
        for (slot, k) in d.iter_mut().zip(-3i32..=3) {
            *slot = self.omega_integral(t, t + k as f64 * h)?;
        }
        let at = |k: i32| d[(k + 3) as usize];
        let first = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
        let second = (-at(2) + 16.0 * at(1) + 16.0 * at(-1) - at(-2)) / (12.0 * h * h);
        let third = (-at(3) + 8.0 * at(2) - 13.0 * at(1) + 13.0 * at(-1) - 8.0 * at(-2)
            + at(-3))
            / (8.0 * h * h * h);
        Ok([first, second, third])
    }

    /// `f² = θ̇² − (3/4)(θ̈/θ̇)² + (1/2)θ⃛/θ̇`, which coincides with `Ω̃²`.
    pub fn f_sq(&self, t: f64) -> Result<f64> {
        let [d1, d2, d3] = self.phase_derivatives(t)?;
        Ok(d1 * d1 - 0.75 * (d2 / d1).powi(2) + 0.5 * d3 / d1)
    }

    /// Closed-form `(μ, μ̇, ν, ν̇)`.
    pub fn state(&self, t: f64) -> Result<CpoState> {
        let d = self.schedule.derivatives(t)?;
        let w0 = self.schedule.derivatives_extended(self.schedule.t0()).omega;
        let theta = self.theta(t)?;
        let (sin, cos) = theta.sin_cos();
        let rate = 0.5 * d.omega_dot / d.omega;
        let mu = sin / (w0 * d.omega).sqrt();
        let nu = (w0 / d.omega).sqrt() * cos;
        Ok(CpoState {
            mu,
            mu_dot: (d.omega / w0).sqrt() * cos - rate * mu,
            nu,
            nu_dot: -(w0 * d.omega).sqrt() * sin - rate * nu,
        })
    }
}

/// `θ(t) = ∫_{t0}^{t} ω dt'`.
pub fn phase(s: &FrequencySchedule, t: f64, quad_tol: f64) -> Result<f64> {
    PhaseAmplitude::with_tolerance(s, quad_tol)?.theta(t)
}

/// `μ(t) = sin θ / √(ω(t0) ω(t))`.
pub fn mu_closed(s: &FrequencySchedule, t: f64) -> Result<f64> {
    Ok(PhaseAmplitude::new(s)?.state(t)?.mu)
}

/// `ν(t) = √(ω(t0)/ω(t)) cos θ`.
pub fn nu_closed(s: &FrequencySchedule, t: f64) -> Result<f64> {
    Ok(PhaseAmplitude::new(s)?.state(t)?.nu)
}

/// `t ↦ 1/√ω(t)` on the continued schedule, usable slightly outside the
/// schedule range by finite-difference stencils.
pub fn adiabatic_amplitude(s: &FrequencySchedule) -> impl Fn(f64) -> f64 + '_ {
    move |t| 1.0 / s.derivatives_extended(t).omega.sqrt()
}

/// `t ↦ (ρ, ρ̇)` for `ρ = 1/√ω`.
pub fn adiabatic_amplitude_with_rate(s: &FrequencySchedule) -> impl Fn(f64) -> (f64, f64) + '_ {
    move |t| {
        let d = s.derivatives_extended(t);
        (1.0 / d.omega.sqrt(), -0.5 * d.omega_dot / d.omega.powf(1.5))
    }
}

/// `ρ̈ + Ω̃²ρ − 1/ρ³` with `ρ̈` from a central difference of step
/// `1e-5 (tf − t0)`.
pub fn ermakov_residual<F: Fn(f64) -> f64>(s: &FrequencySchedule, rho: F, t: f64) -> f64 {
    let h = AMPLITUDE_FD_STEP * s.duration();
    let r = rho(t);
    let rho_ddot = (rho(t + h) - 2.0 * r + rho(t - h)) / (h * h);
    let e = EffectiveFrequencies::from_derivatives(s.derivatives_extended(t));
    rho_ddot + e.tilde_omega_sq * r - 1.0 / (r * r * r)
}

/// Rebuilds `(μ, ν)` from an amplitude via
/// `μ = ρ sin θ / √Ω₀`, `ν = √Ω₀ ρ cos θ`, `θ = ∫_{t0}^{t} W/ρ² dt'`.
pub fn phase_amplitude_reconstruct<F: Fn(f64) -> f64>(
    rho: F,
    wronskian: f64,
    omega_t0: f64,
    t0: f64,
    t: f64,
    quad_tol: f64,
) -> Result<(f64, f64)> {
    let mut bad: Option<(f64, f64)> = None;
    let mut check = |x: f64| {
        let r = rho(x);
        if !(r > 0.0) && bad.is_none() {
            bad = Some((x, r));
        }
        r
    };
    let rho_t = check(t);
    check(t0);
    let theta = quadrature::integrate(
        |x| {
            let r = check(x);
            wronskian / (r * r)
        },
        t0,
        t,
        quad_tol,
    );
    if let Some((x, r)) = bad {
        return Err(Error::NonPositiveAmplitude { t: x, rho: r });
    }
    let (sin, cos) = theta?.sin_cos();
    let root = omega_t0.sqrt();
    Ok((rho_t * sin / root, root * rho_t * cos))
}
