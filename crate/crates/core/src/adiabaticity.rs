//! Classical energies, adiabatic and Ermakov–Lewis invariants, and the
//! adiabaticity parameters `Q^TT` and Husimi's `Q*`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cpo::{CpoState, CpoTrajectory, OscillatorVariant};
use crate::error::{Error, Result};
use crate::output::{write_header, write_row_flag};
use crate::schedule::{EffectiveFrequencies, FrequencySchedule};

/// Energies of the `μ` and `ν` oscillators and the matching actions
/// (energy divided by the frequency entering the quadratic form).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyPair {
    pub e_mu: f64,
    pub e_nu: f64,
    pub j_mu: f64,
    pub j_nu: f64,
}

impl EnergyPair {
    pub const UNDEFINED: EnergyPair = EnergyPair {
        e_mu: f64::NAN,
        e_nu: f64::NAN,
        j_mu: f64::NAN,
        j_nu: f64::NAN,
    };

    fn from_state(st: &CpoState, freq: f64) -> Self {
        let e_mu = 0.5 * (st.mu_dot * st.mu_dot + freq * freq * st.mu * st.mu);
        let e_nu = 0.5 * (st.nu_dot * st.nu_dot + freq * freq * st.nu * st.nu);
        Self {
            e_mu,
            e_nu,
            j_mu: e_mu / freq,
            j_nu: e_nu / freq,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Mu,
    Nu,
}

fn big_omega_at(s: &FrequencySchedule, t: f64) -> Result<(EffectiveFrequencies, f64)> {
    let e = s.effective_frequencies(t)?;
    match e.big_omega() {
        Some(w) => Ok((e, w)),
        None => Err(Error::UndefinedSpectrum {
            t,
            big_omega_sq: e.big_omega_sq,
        }),
    }
}

/// `(μ̇² + c²μ²)/2` and `(ν̇² + c²ν²)/2` with `c = Ω` for the transitionless
/// variant and `c = ω` for the adiabatic one.
pub fn energies(traj: &CpoTrajectory, s: &FrequencySchedule, t: f64) -> Result<EnergyPair> {
    let st = traj.state_at(t)?;
    let freq = match traj.variant {
        OscillatorVariant::Transitionless => big_omega_at(s, t)?.1,
        OscillatorVariant::Adiabatic => s.omega(t)?,
    };
    Ok(EnergyPair::from_state(&st, freq))
}

/// `Q^TT` from the trajectory, including the term proportional to `ω̇/ω`
/// that vanishes for a quiet start.
pub fn q_tt_general(traj: &CpoTrajectory, s: &FrequencySchedule, t: f64) -> Result<f64> {
    traj.require(OscillatorVariant::Transitionless)?;
    let w0 = big_omega_at(s, traj.t_start())?.1;
    let (e, w) = big_omega_at(s, t)?;
    let st = traj.state_at(t)?;
    Ok(q_general_from_state(&st, &e, w, w0))
}

/// General `Q^TT` formula applied to an arbitrary state at `t`, with
/// `Ω₀ = big_omega_t0`. No check that the state solves the right equation.
pub fn q_tt_from_state(st: &CpoState, s: &FrequencySchedule, t: f64, big_omega_t0: f64) -> Result<f64> {
    let (e, w) = big_omega_at(s, t)?;
    Ok(q_general_from_state(st, &e, w, big_omega_t0))
}

fn q_general_from_state(st: &CpoState, e: &EffectiveFrequencies, w: f64, w0: f64) -> f64 {
    let pair = EnergyPair::from_state(st, w);
    let rate = e.omega_dot / e.omega;
    let cross = w0 * w0 * st.mu_dot * st.mu
        + st.nu_dot * st.nu
        + 0.5 * rate * (w0 * w0 * st.mu * st.mu + st.nu * st.nu);
    w0 * pair.j_mu + pair.j_nu / w0 + rate * cross / (w * w0)
}

/// `Q^TT = ω/Ω`, valid when `ω̇(t0) = 0`.
pub fn q_tt_simple(s: &FrequencySchedule, t: f64) -> Result<f64> {
    let (e, w) = big_omega_at(s, t)?;
    Ok(e.omega / w)
}

/// `Q^TT = (ρ̇² + Ω²ρ² + 1/ρ²)/(2Ω)` with `ρ = 1/√ω`.
pub fn q_tt_rho_form(s: &FrequencySchedule, t: f64) -> Result<f64> {
    let (e, w) = big_omega_at(s, t)?;
    let rho_sq = 1.0 / e.omega;
    let rho_dot = -0.5 * e.omega_dot / e.omega.powf(1.5);
    Ok((rho_dot * rho_dot + w * w * rho_sq + 1.0 / rho_sq) / (2.0 * w))
}

/// Husimi's `Q* = ω(t0) E^μ/ω + E^ν/(ω(t0) ω)` from an adiabatic-variant
/// trajectory.
pub fn q_husimi(traj: &CpoTrajectory, s: &FrequencySchedule, t: f64) -> Result<f64> {
    traj.require(OscillatorVariant::Adiabatic)?;
    let w0 = s.omega(traj.t_start())?;
    let pair = energies(traj, s, t)?;
    Ok(w0 * pair.j_mu + pair.j_nu / w0)
}

/// Ermakov–Lewis invariant for one branch from a bare state, with unit
/// Wronskian. `rho` is `(ρ, ρ̇)` at the same instant.
pub fn ermakov_lewis_from_state(st: &CpoState, rho: (f64, f64), omega_t0: f64, branch: Branch) -> f64 {
    let (r, r_dot) = rho;
    match branch {
        Branch::Mu => {
            let a = r_dot * st.mu - r * st.mu_dot;
            0.5 * omega_t0 * (a * a + (st.mu / r).powi(2))
        }
        Branch::Nu => {
            let a = r_dot * st.nu - r * st.nu_dot;
            (a * a + (st.nu / r).powi(2)) / (2.0 * omega_t0)
        }
    }
}

/// Ermakov–Lewis invariant along a trajectory; equals 1/2 when `rho` is the
/// amplitude belonging to the trajectory's schedule.
pub fn ermakov_lewis_invariant<F>(
    traj: &CpoTrajectory,
    s: &FrequencySchedule,
    rho: F,
    branch: Branch,
    t: f64,
) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let st = traj.state_at(t)?;
    let w0 = s.omega(traj.t_start())?;
    Ok(ermakov_lewis_from_state(&st, rho(t), w0, branch))
}

/// Wronskian rebuilt from the energy of one branch; both forms equal 1 for
/// a quiet start.
pub fn wronskian_from_energy(traj: &CpoTrajectory, s: &FrequencySchedule, branch: Branch, t: f64) -> Result<f64> {
    let st = traj.state_at(t)?;
    let e = s.effective_frequencies(t)?;
    let w0 = s.omega(traj.t_start())?;
    let half_rate = 0.5 * e.omega_dot / e.omega;
    let (x, v, scale) = match branch {
        Branch::Mu => (st.mu, st.mu_dot, 2.0 * w0 / e.omega),
        Branch::Nu => (st.nu, st.nu_dot, 2.0 / (e.omega * w0)),
    };
    let energy = 0.5 * (v * v + e.big_omega_sq * x * x);
    Ok(scale * (energy + (v + x * half_rate) * x * half_rate))
}

/// Sampled adiabaticity parameter with energies; entries inside
/// `Ω² ≤ 0` intervals are NaN and flagged undefined.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdiabaticityCurve {
    pub times: Vec<f64>,
    pub q: Vec<f64>,
    pub energies: Vec<EnergyPair>,
    pub variant: OscillatorVariant,
    pub defined_mask: Vec<bool>,
}

impl AdiabaticityCurve {
    /// `Q^TT` (general form) for transitionless trajectories, `Q*` for
    /// adiabatic ones, at each of `times`.
    pub fn sample(traj: &CpoTrajectory, s: &FrequencySchedule, times: &[f64]) -> Result<Self> {
        let mut curve = Self {
            times: times.to_vec(),
            q: Vec::with_capacity(times.len()),
            energies: Vec::with_capacity(times.len()),
            variant: traj.variant,
            defined_mask: Vec::with_capacity(times.len()),
        };
        for &t in times {
            let q = match traj.variant {
                OscillatorVariant::Transitionless => q_tt_general(traj, s, t),
                OscillatorVariant::Adiabatic => q_husimi(traj, s, t),
            };
            match q {
                Ok(q) => {
                    curve.q.push(q);
                    curve.energies.push(energies(traj, s, t)?);
                    curve.defined_mask.push(true);
                }
                Err(Error::UndefinedSpectrum { .. }) => {
                    curve.q.push(f64::NAN);
                    curve.energies.push(EnergyPair::UNDEFINED);
                    curve.defined_mask.push(false);
                }
                Err(e) => return Err(e),
            }
        }
        Ok(curve)
    }

    /// Uses the trajectory's own sample times.
    pub fn from_trajectory(traj: &CpoTrajectory, s: &FrequencySchedule) -> Result<Self> {
        Self::sample(traj, s, &traj.times)
    }

    /// Columns `t, q, e_mu, e_nu, j_mu, j_nu, defined`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write_header(&mut w, &["t", "q", "e_mu", "e_nu", "j_mu", "j_nu", "defined"])?;
        for i in 0..self.times.len() {
            let e = &self.energies[i];
            write_row_flag(
                &mut w,
                &[self.times[i], self.q[i], e.e_mu, e.e_nu, e.j_mu, e.j_nu],
                self.defined_mask[i],
            )?;
        }
        Ok(())
    }
}
