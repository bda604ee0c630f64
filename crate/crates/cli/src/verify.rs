//! Self-consistency checks on one schedule, each with a bound scaled to the
//! requested tolerance.

use qpo_core::adiabaticity::{
    energies, ermakov_lewis_invariant, q_tt_from_state, q_tt_general, q_tt_rho_form, q_tt_simple,
    wronskian_from_energy, Branch,
};
use qpo_core::closed_form::{adiabatic_amplitude, adiabatic_amplitude_with_rate, ermakov_residual, PhaseAmplitude};
use qpo_core::cpo::{integrate, CpoTrajectory, DRIFT_FACTOR};
use qpo_core::oracle::{oracle_probabilities, PositionGrid, SINGULAR_MU};
use qpo_core::transition::{
    chi_pm, generating_function, mean_quantum_number, probability_table, q_parameter_at, QParameter, MAX_N,
};
use qpo_core::{Error, FrequencySchedule, OscillatorVariant};
use serde::Serialize;

use crate::config::RunConfig;

const TT: OscillatorVariant = OscillatorVariant::Transitionless;
const AD: OscillatorVariant = OscillatorVariant::Adiabatic;

/// Sample times probed by the costlier checks.
const PROBES: usize = 41;
const ORACLE_LEVEL: usize = 3;
const ORACLE_RESOLVED: f64 = 1e-6;
/// Above this Q the tail beyond the largest table level is no longer negligible.
const TAIL_Q: f64 = 4.0;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub bound: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub rel_tol: f64,
    pub inject_mismatch: bool,
    pub passed: bool,
    pub checks: Vec<Check>,
}

struct Checks {
    rel_tol: f64,
    list: Vec<Check>,
}

impl Checks {
    /// Bound is `max(floor, factor · rel_tol)`.
    fn push(&mut self, name: &'static str, residual: f64, floor: f64, factor: f64) {
        let bound = floor.max(factor * self.rel_tol);
        self.list.push(Check {
            name,
            residual,
            bound,
            pass: residual <= bound,
            note: None,
        });
    }

    fn skip(&mut self, name: &'static str, why: &str) {
        self.list.push(Check {
            name,
            residual: 0.0,
            bound: 0.0,
            pass: true,
            note: Some(format!("skipped: {why}")),
        });
    }
}

fn defined(r: qpo_core::Result<f64>) -> qpo_core::Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::UndefinedSpectrum { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn probe_times(s: &FrequencySchedule) -> Vec<f64> {
    (0..PROBES)
        .map(|i| s.t0() + s.duration() * i as f64 / (PROBES - 1) as f64)
        .collect()
}

pub fn run(cfg: &RunConfig, inject_mismatch: bool) -> anyhow::Result<Report> {
    let s = &cfg.schedule;
    let tt = integrate(s, TT, cfg.rel_tol, cfg.n_output)?;
    let ad = integrate(s, AD, cfg.rel_tol, cfg.n_output)?;
    let mut c = Checks {
        rel_tol: cfg.rel_tol,
        list: Vec::new(),
    };
    let probes = probe_times(s);

    c.push("wronskian_tt", tt.wronskian_max_drift, 1e-8, DRIFT_FACTOR);
    c.push("wronskian_adiabatic", ad.wronskian_max_drift, 1e-8, DRIFT_FACTOR);

    let pa = PhaseAmplitude::new(s)?;
    let mut worst: f64 = 0.0;
    for &t in &probes {
        let (closed, ode) = (pa.state(t)?, tt.state_at(t)?);
        let scale = 1.0 + ode.mu.abs().max(ode.nu.abs());
        worst = worst.max(((closed.mu - ode.mu).abs().max((closed.nu - ode.nu).abs())) / scale);
    }
    c.push("closed_form_vs_ode", worst, 1e-7, 10.0);

    final_energies(&mut c, &tt, s)?;
    q_forms(&mut c, &tt, &ad, s, &probes, inject_mismatch)?;
    invariants(&mut c, &tt, s, &probes)?;
    chi_moduli(&mut c, &tt, s, &probes)?;
    oracle(&mut c, &tt, s, &probes)?;
    tables(&mut c, s, cfg.n_max)?;

    let mut mismatched = 0usize;
    let intervals = s.spectrum_validity_intervals(cfg.n_output.max(2001));
    for &t in &tt.times {
        let inside = intervals.iter().any(|&(a, b)| t > a && t < b);
        let undefined = defined(q_tt_simple(s, t))?.is_none();
        // samples right at an interval edge may fall either way
        let near_edge = intervals
            .iter()
            .any(|&(a, b)| (t - a).abs().min((t - b).abs()) < 1e-3 * s.duration());
        if inside != undefined && !near_edge {
            mismatched += 1;
        }
    }
    c.push("undefined_intervals", mismatched as f64, 0.0, 0.0);

    let passed = c.list.iter().all(|k| k.pass);
    Ok(Report {
        rel_tol: cfg.rel_tol,
        inject_mismatch,
        passed,
        checks: c.list,
    })
}

fn final_energies(c: &mut Checks, tt: &CpoTrajectory, s: &FrequencySchedule) -> anyhow::Result<()> {
    let (t0, tf) = (s.t0(), s.tf());
    let end = s.derivatives(tf)?;
    if end.omega_dot.abs() > 1e-10 {
        c.skip("final_energies", "schedule does not end at rest");
        return Ok(());
    }
    let w0 = s.omega(t0)?;
    let e = energies(tt, s, tf)?;
    let residual = (e.e_mu - end.omega / (2.0 * w0))
        .abs()
        .max((e.e_nu - w0 * end.omega / 2.0).abs());
    c.push("final_energies", residual, 1e-6, 10.0);
    Ok(())
}

fn q_forms(
    c: &mut Checks,
    tt: &CpoTrajectory,
    ad: &CpoTrajectory,
    s: &FrequencySchedule,
    probes: &[f64],
    inject_mismatch: bool,
) -> anyhow::Result<()> {
    let w0 = s.omega(s.t0())?;
    let general = |t: f64| -> qpo_core::Result<f64> {
        if inject_mismatch {
            q_tt_from_state(&ad.state_at(t)?, s, t, w0)
        } else {
            q_tt_general(tt, s, t)
        }
    };
    let mut worst: f64 = 0.0;
    for &t in probes {
        let Some(simple) = defined(q_tt_simple(s, t))? else {
            continue;
        };
        let g = general(t)?;
        let rho = q_tt_rho_form(s, t)?;
        worst = worst.max((g - simple).abs() / simple).max((rho - simple).abs() / simple);
    }
    c.push("q_forms_agree", worst, 1e-7, 10.0);

    let mut worst: f64 = 0.0;
    for t in [s.t0(), s.tf()] {
        if let Some(g) = defined(general(t))? {
            worst = worst.max((g - 1.0).abs());
        }
    }
    c.push("q_endpoints", worst, 1e-6, 10.0);
    Ok(())
}

fn invariants(c: &mut Checks, tt: &CpoTrajectory, s: &FrequencySchedule, probes: &[f64]) -> anyhow::Result<()> {
    let rho = adiabatic_amplitude_with_rate(s);
    let mut inv: f64 = 0.0;
    let mut wr: f64 = 0.0;
    for &t in probes {
        for branch in [Branch::Mu, Branch::Nu] {
            inv = inv.max((ermakov_lewis_invariant(tt, s, &rho, branch, t)? - 0.5).abs());
            wr = wr.max((wronskian_from_energy(tt, s, branch, t)? - 1.0).abs());
        }
    }
    c.push("ermakov_lewis_invariant", inv, 1e-7, 10.0);
    c.push("wronskian_energy_forms", wr, 1e-7, 10.0);

    let amp = adiabatic_amplitude(s);
    let mut worst: f64 = 0.0;
    for &t in &probes[1..probes.len() - 1] {
        let e = s.effective_frequencies(t)?;
        let scale = e.tilde_omega_sq.abs() + e.omega.powf(1.5);
        worst = worst.max(ermakov_residual(s, &amp, t).abs() / scale);
    }
    // finite-difference roundoff, independent of the integrator tolerance
    c.push("ermakov_equation", worst, 1e-4, 0.0);
    Ok(())
}

fn chi_moduli(c: &mut Checks, tt: &CpoTrajectory, s: &FrequencySchedule, probes: &[f64]) -> anyhow::Result<()> {
    let w0 = s.omega(s.t0())?;
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for &t in probes {
        let Some(q) = defined(q_tt_simple(s, t))? else {
            continue;
        };
        if q - 1.0 < 1e-2 {
            continue;
        }
        let (plus, minus) = chi_pm(tt, s, t)?;
        let w = s.effective_frequencies(t)?.big_omega().expect("defined above");
        let want_plus = 2.0 * w0 * w * (q - 1.0);
        let want_minus = 2.0 * w0 * w * (q + 1.0);
        worst = worst
            .max((plus.norm_sqr() - want_plus).abs() / want_plus)
            .max((minus.norm_sqr() - want_minus).abs() / want_minus);
        used += 1;
    }
    if used == 0 {
        c.skip("chi_moduli", "Q stays within 1e-2 of 1");
    } else {
        c.push("chi_moduli", worst, 1e-6, 100.0);
    }
    Ok(())
}

fn oracle(c: &mut Checks, tt: &CpoTrajectory, s: &FrequencySchedule, probes: &[f64]) -> anyhow::Result<()> {
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for &t in probes.iter().skip(1).step_by(PROBES / 4) {
        let Some(q) = defined(q_tt_simple(s, t))? else {
            continue;
        };
        if tt.state_at(t)?.mu.abs() < 1e3 * SINGULAR_MU {
            continue;
        }
        let grid = PositionGrid::for_times(s, s.t0(), t)?;
        let r = oracle_probabilities(tt, s, t, ORACLE_LEVEL, grid)?;
        // an unresolved grid says nothing about the closed form
        if r.est_error > ORACLE_RESOLVED {
            continue;
        }
        let table = probability_table(QParameter::new(q)?, ORACLE_LEVEL)?;
        for m in 0..=ORACLE_LEVEL {
            for n in 0..=ORACLE_LEVEL {
                worst = worst.max((r.probs[m][n] - table.get(m, n)).abs());
            }
        }
        used += 1;
    }
    if used == 0 {
        c.skip("oracle_vs_closed_form", "no probe time resolved by the default grid");
    } else {
        c.push("oracle_vs_closed_form", worst, 1e-6, 10.0);
    }
    Ok(())
}

fn tables(c: &mut Checks, s: &FrequencySchedule, n_max: usize) -> anyhow::Result<()> {
    let identity = probability_table(QParameter::new(1.0)?, n_max)?;
    let mut worst: f64 = 0.0;
    for m in 0..=n_max {
        for n in 0..=n_max {
            let want = if m == n { 1.0 } else { 0.0 };
            worst = worst.max((identity.get(m, n) - want).abs());
        }
    }
    c.push("table_identity_at_unity", worst, 1e-10, 0.0);

    let mid = 0.5 * (s.t0() + s.tf());
    let q = q_parameter_at(s, mid)?;
    let q = if q.defined { q } else { QParameter::new(1.5)? };
    let table = probability_table(q, n_max)?;

    let mut broken = 0usize;
    for m in 0..=n_max {
        for n in 0..=n_max {
            let p = table.get(m, n);
            if p != table.get(n, m) || ((m + n) % 2 == 1 && p != 0.0) {
                broken += 1;
            }
        }
    }
    c.push("table_symmetry_and_parity", broken as f64, 0.0, 0.0);

    let full = probability_table(q, MAX_N)?;
    if q.q > TAIL_Q {
        c.skip("column_sums", "Q too large for the truncated table");
    } else {
        let worst = (0..=2).map(|n| (full.column_sum(n) - 1.0).abs()).fold(0.0, f64::max);
        c.push("column_sums", worst, 1e-8, 0.0);
    }

    let mut worst: f64 = 0.0;
    for (u, v) in [(0.0, 0.0), (0.3, 0.3), (-0.4, 0.2), (0.5, -0.5), (0.1, 0.45), (-0.25, -0.35)] {
        let series: f64 = (0..=n_max)
            .flat_map(|m| (0..=n_max).map(move |n| (m, n)))
            .map(|(m, n)| table.get(m, n) * f64::powi(u, n as i32) * f64::powi(v, m as i32))
            .sum();
        let closed = generating_function(q, u, v)?;
        worst = worst.max((series - closed).abs() / closed);
    }
    c.push("generating_function", worst, 1e-8, 0.0);

    if q.q > TAIL_Q {
        c.skip("mean_quantum_number", "Q too large for the truncated table");
    } else {
        let mut worst: f64 = 0.0;
        for n in 0..=2 {
            worst = worst.max((full.mean_m[n] - mean_quantum_number(q, n)?).abs());
        }
        c.push("mean_quantum_number", worst, 1e-6, 0.0);
    }
    Ok(())
}
