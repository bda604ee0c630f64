use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use qpo_core::adiabaticity::{energies, q_husimi, q_tt_general, EnergyPair};
use qpo_core::cpo::{integrate, CpoTrajectory};
use qpo_core::output::{write_header, write_row, write_row_flag};
use qpo_core::transition::{probability_table, probability_table_at, QParameter};
use qpo_core::{make_cubic_schedule, Error, FrequencySchedule, OscillatorVariant};

use crate::config::{write_sidecar, ConfigError, RunConfig};

const TT: OscillatorVariant = OscillatorVariant::Transitionless;
const AD: OscillatorVariant = OscillatorVariant::Adiabatic;

/// Durations of the bundled figure data.
pub const FIGURE_DURATIONS: [f64; 3] = [0.2, 0.5, 2.0];

type Residuals = BTreeMap<String, f64>;

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Energies, or NaN where the spectrum is undefined.
fn energies_or_nan(traj: &CpoTrajectory, s: &FrequencySchedule, t: f64) -> qpo_core::Result<EnergyPair> {
    match energies(traj, s, t) {
        Err(Error::UndefinedSpectrum { .. }) => Ok(EnergyPair::UNDEFINED),
        r => r,
    }
}

fn or_nan(r: qpo_core::Result<f64>) -> qpo_core::Result<f64> {
    match r {
        Err(Error::UndefinedSpectrum { .. }) => Ok(f64::NAN),
        r => r,
    }
}

pub fn trajectory(cfg: &RunConfig) -> anyhow::Result<()> {
    let s = &cfg.schedule;
    let traj = integrate(s, cfg.variant, cfg.rel_tol, cfg.n_output)?;
    let mut w = create(&cfg.output_path)?;
    write_header(&mut w, &["t", "mu", "mu_dot", "nu", "nu_dot", "wronskian", "e_mu", "e_nu"])?;
    let mut last = EnergyPair::UNDEFINED;
    for (i, &t) in traj.times.iter().enumerate() {
        let st = traj.sample(i);
        last = energies_or_nan(&traj, s, t)?;
        write_row(&mut w, &[t, st.mu, st.mu_dot, st.nu, st.nu_dot, st.wronskian(), last.e_mu, last.e_nu])?;
    }
    w.flush()?;

    let mut res = Residuals::new();
    res.insert("wronskian_max_drift".into(), traj.wronskian_max_drift);
    res.insert("e_mu_final".into(), last.e_mu);
    res.insert("e_nu_final".into(), last.e_nu);
    write_sidecar(cfg, &res)
}

pub fn qfactor(cfg: &RunConfig) -> anyhow::Result<()> {
    let s = &cfg.schedule;
    let tt = integrate(s, TT, cfg.rel_tol, cfg.n_output)?;
    let ad = integrate(s, AD, cfg.rel_tol, cfg.n_output)?;
    let mut w = create(&cfg.output_path)?;
    write_header(
        &mut w,
        &[
            "t",
            "q_tt",
            "q_star",
            "e_mu_over_Omega",
            "e_nu_over_Omega",
            "E_mu_over_omega",
            "E_nu_over_omega",
            "defined",
        ],
    )?;
    let mut undefined = 0usize;
    let mut q_star_max: f64 = 1.0;
    let mut q_tt_ends = Vec::new();
    for &t in &tt.times {
        let q_tt = or_nan(q_tt_general(&tt, s, t))?;
        let q_star = q_husimi(&ad, s, t)?;
        let e_tt = energies_or_nan(&tt, s, t)?;
        let e_ad = energies(&ad, s, t)?;
        let defined = !q_tt.is_nan();
        if !defined {
            undefined += 1;
        }
        q_star_max = q_star_max.max(q_star);
        if t == s.t0() || t == s.tf() {
            q_tt_ends.push(q_tt);
        }
        write_row_flag(&mut w, &[t, q_tt, q_star, e_tt.j_mu, e_tt.j_nu, e_ad.j_mu, e_ad.j_nu], defined)?;
    }
    w.flush()?;

    let mut res = Residuals::new();
    let end_dev = q_tt_ends.iter().map(|q| (q - 1.0).abs()).fold(0.0, f64::max);
    res.insert("q_tt_endpoint_deviation".into(), end_dev);
    res.insert("q_star_max".into(), q_star_max);
    res.insert("undefined_samples".into(), undefined as f64);
    res.insert("wronskian_max_drift_tt".into(), tt.wronskian_max_drift);
    res.insert("wronskian_max_drift_adiabatic".into(), ad.wronskian_max_drift);
    write_sidecar(cfg, &res)
}

/// `(P^{0,0}, P^{1,1})` for a Q value, NaN where undefined.
fn low_levels(q: f64) -> anyhow::Result<(f64, f64)> {
    if q.is_nan() {
        return Ok((f64::NAN, f64::NAN));
    }
    let table = probability_table(QParameter::new(q)?, 1)?;
    Ok((table.get(0, 0), table.get(1, 1)))
}

pub fn probabilities(cfg: &RunConfig, table_at: Option<f64>) -> anyhow::Result<()> {
    let s = &cfg.schedule;
    if let Some(t) = table_at {
        s.check_time(t).map_err(|e| ConfigError(e.into()))?;
    }
    let tt = integrate(s, TT, cfg.rel_tol, cfg.n_output)?;
    let ad = integrate(s, AD, cfg.rel_tol, cfg.n_output)?;
    let mut w = create(&cfg.output_path)?;
    write_header(&mut w, &["t", "p00_tt", "p11_tt", "p00_ad", "p11_ad", "defined"])?;
    let mut p00_ad_min: f64 = 1.0;
    let mut undefined = 0usize;
    for &t in &tt.times {
        let (p00_tt, p11_tt) = low_levels(or_nan(q_tt_general(&tt, s, t))?)?;
        let (p00_ad, p11_ad) = low_levels(q_husimi(&ad, s, t)?)?;
        let defined = !p00_tt.is_nan();
        if !defined {
            undefined += 1;
        }
        p00_ad_min = p00_ad_min.min(p00_ad);
        write_row_flag(&mut w, &[t, p00_tt, p11_tt, p00_ad, p11_ad], defined)?;
    }
    w.flush()?;

    let mut res = Residuals::new();
    res.insert("p00_adiabatic_min".into(), p00_ad_min);
    res.insert("undefined_samples".into(), undefined as f64);

    if let Some(t) = table_at {
        let table = probability_table_at(s, t, cfg.n_max)?;
        let stem = cfg.output_path.display().to_string();
        let csv = format!("{stem}.table.csv");
        let mut tw = create(Path::new(&csv))?;
        table.write_csv(&mut tw)?;
        tw.flush()?;
        let json = format!("{stem}.table.json");
        let mut text = table.to_json()?;
        text.push('\n');
        fs::write(&json, text).with_context(|| format!("writing {json}"))?;
        res.insert("table_t".into(), t);
        res.insert("table_q".into(), table.q.q);
    }
    write_sidecar(cfg, &res)
}

/// Trajectory, Q factor and probability data for each bundled duration,
/// written into the output directory.
pub fn figures(cfg: &RunConfig) -> anyhow::Result<()> {
    if !cfg.is_cubic_default() {
        return Err(ConfigError(anyhow::anyhow!("figures uses the cubic schedule only")).into());
    }
    let dir = &cfg.output_path;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let (t0, w0, wf) = match cfg.schedule.to_document() {
        qpo_core::schedule::ScheduleDocument::Cubic { t0, omega0, omegaf, .. } => (t0, omega0, omegaf),
        _ => unreachable!("cubic source builds a cubic schedule"),
    };
    for d in FIGURE_DURATIONS {
        let s = make_cubic_schedule(t0, t0 + d, w0, wf)?;
        let name = |k: u8| dir.join(format!("fig{k}_tf{d}.csv"));
        let mut traj_cfg = cfg.with_schedule(s.clone(), name(1));
        traj_cfg.variant = TT;
        trajectory(&traj_cfg)?;
        qfactor(&cfg.with_schedule(s.clone(), name(2)))?;
        probabilities(&cfg.with_schedule(s, name(3)), None)?;
    }
    Ok(())
}
