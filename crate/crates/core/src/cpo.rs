//! Classical parametric oscillator pairs `μ`, `ν` under the transitionless
//! frequency `Ω̃²` or the bare frequency `ω²`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, DenseSolution, Tolerance};
use crate::output::{write_header, write_row};
use crate::schedule::{EffectiveFrequencies, FrequencySchedule};

pub const MIN_REL_TOL: f64 = 1e-13;
pub const MAX_REL_TOL: f64 = 1e-3;

/// Allowed Wronskian drift in units of the requested relative tolerance.
pub const DRIFT_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OscillatorVariant {
    /// `μ̈ + Ω̃²μ = 0`, induced by the transitionless Hamiltonian.
    #[serde(rename = "tt")]
    Transitionless,
    /// `μ̈ + ω²μ = 0`, the ordinary parametric oscillator.
    Adiabatic,
}

impl OscillatorVariant {
    /// Restoring coefficient multiplying the coordinate in the equation of
    /// motion. May be negative for the transitionless variant.
    pub fn coefficient(self, e: &EffectiveFrequencies) -> f64 {
        match self {
            Self::Transitionless => e.tilde_omega_sq,
            Self::Adiabatic => e.omega * e.omega,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Transitionless => "tt",
            Self::Adiabatic => "adiabatic",
        }
    }
}

impl std::str::FromStr for OscillatorVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tt" | "transitionless" => Ok(Self::Transitionless),
            "adiabatic" | "ad" => Ok(Self::Adiabatic),
            other => Err(Error::InvalidArgument(format!("unknown variant '{other}'"))),
        }
    }
}

/// `(μ, μ̇, ν, ν̇)` at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpoState {
    pub mu: f64,
    pub mu_dot: f64,
    pub nu: f64,
    pub nu_dot: f64,
}

impl CpoState {
    pub const INITIAL: CpoState = CpoState {
        mu: 0.0,
        mu_dot: 1.0,
        nu: 1.0,
        nu_dot: 0.0,
    };

    pub fn wronskian(&self) -> f64 {
        self.mu_dot * self.nu - self.mu * self.nu_dot
    }

    fn from_array(y: [f64; 4]) -> Self {
        Self {
            mu: y[0],
            mu_dot: y[1],
            nu: y[2],
            nu_dot: y[3],
        }
    }

    fn to_array(self) -> [f64; 4] {
        [self.mu, self.mu_dot, self.nu, self.nu_dot]
    }
}

/// Sampled solution pair plus the continuous extension used for evaluation
/// between samples.
#[derive(Debug, Clone)]
pub struct CpoTrajectory {
    pub variant: OscillatorVariant,
    pub rel_tol: f64,
    pub times: Vec<f64>,
    pub mu: Vec<f64>,
    pub mu_dot: Vec<f64>,
    pub nu: Vec<f64>,
    pub nu_dot: Vec<f64>,
    pub wronskian_max_drift: f64,
    dense: DenseSolution<4>,
}

impl CpoTrajectory {
    /// Time at which the initial conditions `μ = 0, μ̇ = 1, ν = 1, ν̇ = 0` hold.
    pub fn t_start(&self) -> f64 {
        self.dense.t_start()
    }

    pub fn t_end(&self) -> f64 {
        self.dense.t_end()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn sample(&self, i: usize) -> CpoState {
        CpoState {
            mu: self.mu[i],
            mu_dot: self.mu_dot[i],
            nu: self.nu[i],
            nu_dot: self.nu_dot[i],
        }
    }

    pub fn state_at(&self, t: f64) -> Result<CpoState> {
        let (a, b) = (self.t_start(), self.t_end());
        let slack = 1e-12 * (b - a);
        if !(t >= a - slack && t <= b + slack) {
            return Err(Error::OutOfRange { t, t0: a, tf: b });
        }
        Ok(CpoState::from_array(self.dense.eval(t.clamp(a, b))))
    }

    pub fn require(&self, expected: OscillatorVariant) -> Result<()> {
        if self.variant != expected {
            return Err(Error::VariantMismatch {
                expected,
                found: self.variant,
            });
        }
        Ok(())
    }

    /// Columns `t, mu, mu_dot, nu, nu_dot, wronskian`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write_header(&mut w, &["t", "mu", "mu_dot", "nu", "nu_dot", "wronskian"])?;
        for i in 0..self.len() {
            let s = self.sample(i);
            write_row(
                &mut w,
                &[self.times[i], s.mu, s.mu_dot, s.nu, s.nu_dot, s.wronskian()],
            )?;
        }
        Ok(())
    }
}

/// `μ̇ν − μν̇` interpolated at `t`.
pub fn wronskian(traj: &CpoTrajectory, t: f64) -> Result<f64> {
    Ok(traj.state_at(t)?.wronskian())
}

/// Integrates both solutions over the whole schedule.
pub fn integrate(
    s: &FrequencySchedule,
    variant: OscillatorVariant,
    rel_tol: f64,
    n_output: usize,
) -> Result<CpoTrajectory> {
    integrate_span(s, variant, s.t0(), s.tf(), rel_tol, n_output)
}

/// Integrates both solutions with initial conditions imposed at `t_start`
/// and samples `n_output` equally spaced times on `[t_start, t_end]`.
pub fn integrate_span(
    s: &FrequencySchedule,
    variant: OscillatorVariant,
    t_start: f64,
    t_end: f64,
    rel_tol: f64,
    n_output: usize,
) -> Result<CpoTrajectory> {
    if !(MIN_REL_TOL..=MAX_REL_TOL).contains(&rel_tol) {
        return Err(Error::InvalidArgument(format!(
            "rel_tol {rel_tol:e} outside [{MIN_REL_TOL:e}, {MAX_REL_TOL:e}]"
        )));
    }
    if n_output < 2 {
        return Err(Error::InvalidArgument("n_output must be at least 2".into()));
    }
    let t_start = s.check_time(t_start)?;
    let t_end = s.check_time(t_end)?;
    if t_end <= t_start {
        return Err(Error::InvalidInterval {
            t0: t_start,
            tf: t_end,
        });
    }

    let rhs = |t: f64, y: &[f64; 4]| {
        let e = EffectiveFrequencies::from_derivatives(s.derivatives_extended(t));
        let k = variant.coefficient(&e);
        [y[1], -k * y[0], y[3], -k * y[2]]
    };
    let tol = Tolerance {
        rel_tol,
        abs_tol: rel_tol,
    };
    let dense = ode::integrate(rhs, t_start, CpoState::INITIAL.to_array(), t_end, tol)?;

    let span = t_end - t_start;
    let mut traj = CpoTrajectory {
        variant,
        rel_tol,
        times: Vec::with_capacity(n_output),
        mu: Vec::with_capacity(n_output),
        mu_dot: Vec::with_capacity(n_output),
        nu: Vec::with_capacity(n_output),
        nu_dot: Vec::with_capacity(n_output),
        wronskian_max_drift: 0.0,
        dense,
    };
    let mut drift: f64 = 0.0;
    for i in 0..n_output {
        let t = if i + 1 == n_output {
            t_end
        } else {
            t_start + span * i as f64 / (n_output - 1) as f64
        };
        let state = CpoState::from_array(traj.dense.eval(t));
        drift = drift.max((state.wronskian() - 1.0).abs());
        traj.times.push(t);
        traj.mu.push(state.mu);
        traj.mu_dot.push(state.mu_dot);
        traj.nu.push(state.nu);
        traj.nu_dot.push(state.nu_dot);
    }
    traj.wronskian_max_drift = drift;

    let bound = DRIFT_FACTOR * rel_tol;
    if !(drift < bound) {
        return Err(Error::WronskianBlowup { drift, bound });
    }
    Ok(traj)
}
