//! Acceptance battery: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use qpo_core::adiabaticity::{self, energies, q_tt_general, q_tt_rho_form, q_tt_simple, Branch};
use qpo_core::closed_form::{adiabatic_amplitude_with_rate, PhaseAmplitude};
use qpo_core::cpo::{integrate, wronskian};
use qpo_core::oracle::{oracle_probabilities, PositionGrid};
use qpo_core::transition::{
    chi_pm, generating_function, mean_quantum_number, probability_table, probability_table_at,
    QParameter,
};
use qpo_core::{make_cubic_schedule, FrequencySchedule, OscillatorVariant, Result};
use rand::{Rng, SeedableRng};

const TT: OscillatorVariant = OscillatorVariant::Transitionless;
const AD: OscillatorVariant = OscillatorVariant::Adiabatic;
const DURATIONS: [f64; 3] = [0.2, 0.5, 2.0];

fn ramp(tf: f64) -> FrequencySchedule {
    make_cubic_schedule(0.0, tf, 2.0, 4.0).expect("valid schedule")
}

/// Outcome of one criterion: pass flag plus the measured figures.
struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn check(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn endpoint_energies() -> Result<Verdict> {
    let mut worst_final: f64 = 0.0;
    let mut worst_start: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    for tf in DURATIONS {
        let clock = Instant::now();
        let s = ramp(tf);
        let traj = integrate(&s, TT, 1e-10, 1001)?;
        let end = energies(&traj, &s, tf)?;
        let start = energies(&traj, &s, 0.0)?;
        slowest = slowest.max(clock.elapsed().as_secs_f64());
        worst_final = worst_final.max((end.e_mu - 1.0).abs()).max((end.e_nu - 4.0).abs());
        worst_start = worst_start.max((start.e_mu - 0.5).abs()).max((start.e_nu - 2.0).abs());
    }
    Ok(Verdict::check(
        worst_final < 1e-6 && worst_start < 1e-12 && slowest < 1.0,
        format!("final err {worst_final:.2e}, initial err {worst_start:.2e}, slowest {slowest:.3} s"),
    ))
}

fn endpoint_unity() -> Result<Verdict> {
    let mut worst_q: f64 = 0.0;
    let mut worst_j: f64 = 0.0;
    for tf in DURATIONS {
        let s = ramp(tf);
        let traj = integrate(&s, TT, 1e-10, 1001)?;
        for t in [0.0, tf] {
            worst_q = worst_q.max((q_tt_general(&traj, &s, t)? - 1.0).abs());
            let e = energies(&traj, &s, t)?;
            worst_j = worst_j.max((e.j_mu - 0.25).abs()).max((e.j_nu - 1.0).abs());
        }
    }
    Ok(Verdict::check(
        worst_q < 1e-6 && worst_j < 1e-6,
        format!("max |Q - 1| {worst_q:.2e}, max action err {worst_j:.2e}"),
    ))
}

fn q_forms_agree() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for tf in DURATIONS {
        let s = ramp(tf);
        let traj = integrate(&s, TT, 1e-10, 1001)?;
        for i in 1..=100 {
            let t = tf * i as f64 / 101.0;
            if s.effective_frequencies(t)?.big_omega().is_none() {
                continue;
            }
            let a = q_tt_general(&traj, &s, t)?;
            let b = q_tt_simple(&s, t)?;
            let c = q_tt_rho_form(&s, t)?;
            worst = worst.max((a - b).abs()).max((a - c).abs()).max((b - c).abs());
            compared += 1;
        }
    }
    Ok(Verdict::check(
        worst < 1e-7,
        format!("max pairwise diff {worst:.2e} over {compared} times"),
    ))
}

fn closed_form_matches_ode() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    for tf in DURATIONS {
        let s = ramp(tf);
        let traj = integrate(&s, TT, 1e-10, 1000)?;
        let pa = PhaseAmplitude::new(&s)?;
        for (i, &t) in traj.times.iter().enumerate() {
            let c = pa.state(t)?;
            worst = worst.max((c.mu - traj.mu[i]).abs()).max((c.nu - traj.nu[i]).abs());
        }
    }
    Ok(Verdict::check(worst < 1e-7, format!("max deviation {worst:.2e}")))
}

fn wronskian_and_invariant() -> Result<Verdict> {
    let mut worst_w: f64 = 0.0;
    let mut worst_i: f64 = 0.0;
    for tf in DURATIONS {
        let s = ramp(tf);
        for variant in [TT, AD] {
            let traj = integrate(&s, variant, 1e-10, 1001)?;
            for &t in &traj.times {
                worst_w = worst_w.max((wronskian(&traj, t)? - 1.0).abs());
                if variant == TT {
                    for b in [Branch::Mu, Branch::Nu] {
                        let inv = adiabaticity::ermakov_lewis_invariant(
                            &traj,
                            &s,
                            adiabatic_amplitude_with_rate(&s),
                            b,
                            t,
                        )?;
                        worst_i = worst_i.max((inv - 0.5).abs());
                    }
                }
            }
        }
    }
    Ok(Verdict::check(
        worst_w < 1e-8 && worst_i < 1e-7,
        format!("max |W - 1| {worst_w:.2e}, max |I - 1/2| {worst_i:.2e}"),
    ))
}

fn oracle_agreement() -> Result<Verdict> {
    let clock = Instant::now();
    let s = ramp(0.5);
    let traj = integrate(&s, TT, 1e-11, 3)?;
    let mut times = Vec::new();
    for i in 1..20 {
        let t = 0.5 * i as f64 / 20.0;
        if traj.state_at(t)?.mu.abs() > 0.05 && s.effective_frequencies(t)?.big_omega().is_some() {
            times.push(t);
        }
    }
    // spread five probe times over the admissible ones
    let picks: Vec<f64> = (0..5).map(|j| times[j * (times.len() - 1) / 4]).collect();
    let mut worst: f64 = 0.0;
    for &t in &picks {
        let table = probability_table_at(&s, t, 4)?;
        let grid = PositionGrid::for_times(&s, 0.0, t)?;
        let oracle = oracle_probabilities(&traj, &s, t, 4, grid)?;
        for m in 0..=4 {
            for n in 0..=4 {
                worst = worst.max((table.get(m, n) - oracle.probs[m][n]).abs());
            }
        }
    }
    let elapsed = clock.elapsed().as_secs_f64();
    Ok(Verdict::check(
        worst < 1e-4 && elapsed < 30.0,
        format!("max entry diff {worst:.2e} at t = {picks:?}, {elapsed:.2} s"),
    ))
}

fn probability_structure() -> Result<Verdict> {
    let identity = probability_table(QParameter::new(1.0)?, 80)?;
    let mut id_err: f64 = 0.0;
    for m in 0..=80 {
        for n in 0..=80 {
            let want = if m == n { 1.0 } else { 0.0 };
            id_err = id_err.max((identity.get(m, n) - want).abs());
        }
    }
    let mut sums = Vec::new();
    let mut parity_ok = true;
    let mut symmetric = true;
    for q in [1.0, 1.5, 2.0, 3.0] {
        let table = probability_table(QParameter::new(q)?, 80)?;
        let worst = (0..=10)
            .map(|n| (table.column_sum(n) - 1.0).abs())
            .fold(0.0, f64::max);
        sums.push((q, worst));
        for m in 0..=80 {
            for n in 0..=80 {
                if (m + n) % 2 == 1 && table.get(m, n) != 0.0 {
                    parity_ok = false;
                }
                if table.get(m, n) != table.get(n, m) {
                    symmetric = false;
                }
            }
        }
    }
    let sums_ok = sums.iter().all(|&(_, e)| e <= 1e-8);
    let listed: Vec<String> = sums.iter().map(|(q, e)| format!("Q={q}: {e:.1e}")).collect();
    Ok(Verdict::check(
        id_err < 1e-10 && sums_ok && parity_ok && symmetric,
        format!(
            "identity err {id_err:.1e}; column-sum err (n <= 10) {}; parity {parity_ok}, symmetry {symmetric}",
            listed.join(", ")
        ),
    ))
}

fn generating_identities() -> Result<Verdict> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(16);
    let mut worst_gf: f64 = 0.0;
    let qs = [1.0, 1.5, 2.0, 5.0];
    for i in 0..20 {
        let q = QParameter::new(qs[i % qs.len()])?;
        let (u, v): (f64, f64) = (rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7));
        let table = probability_table(q, 128)?;
        let mut series = 0.0;
        for n in (0..=128).rev() {
            for m in (0..=128).rev() {
                series += u.powi(n as i32) * v.powi(m as i32) * table.get(m, n);
            }
        }
        worst_gf = worst_gf.max((series - generating_function(q, u, v)?).abs());
    }

    let mut worst_moment: f64 = 0.0;
    let mut worst_mean: f64 = 0.0;
    for qv in [1.0, 1.5, 2.0] {
        let q = QParameter::new(qv)?;
        let table = probability_table(q, 128)?;
        for u in [0.0f64, 0.2, 0.5] {
            let series: f64 = (0..=128).map(|n| u.powi(n as i32) * table.mean_m[n]).sum();
            let closed = (qv * (1.0 + u) - (1.0 - u)) / (2.0 * (1.0 - u) * (1.0 - u));
            worst_moment = worst_moment.max((series - closed).abs());
        }
        let table = probability_table(q, 80)?;
        for n in 0..=5 {
            worst_mean = worst_mean.max((table.mean_m[n] - mean_quantum_number(q, n)?).abs());
        }
    }
    Ok(Verdict::check(
        worst_gf < 1e-8 && worst_moment < 1e-7 && worst_mean < 1e-6,
        format!(
            "generating fn err {worst_gf:.1e}, first moment err {worst_moment:.1e}, mean err {worst_mean:.1e}"
        ),
    ))
}

fn imaginary_regime() -> Result<Verdict> {
    let s = ramp(0.2);
    let intervals = s.spectrum_validity_intervals(2001);
    if intervals.len() != 1 {
        return Ok(Verdict::check(false, format!("found {} intervals", intervals.len())));
    }
    let (a, b) = intervals[0];
    let omega_sq = |t: f64| s.effective_frequencies(t).map(|e| e.big_omega_sq);
    let delta = 1e-9 * s.duration();
    let refined = omega_sq(a - delta)? > 0.0
        && omega_sq(a + delta)? <= 0.0
        && omega_sq(b - delta)? <= 0.0
        && omega_sq(b + delta)? > 0.0;

    let traj = integrate(&s, TT, 1e-10, 1001)?;
    let curve = adiabaticity::AdiabaticityCurve::from_trajectory(&traj, &s)?;
    let mut consistent = true;
    let mut inside = 0;
    for (i, &t) in curve.times.iter().enumerate() {
        let table = probability_table_at(&s, t, 2)?;
        let expect_defined = !(t > a && t < b);
        if t == a || t == b {
            continue;
        }
        let q_finite = curve.q[i].is_finite();
        let p_finite = table.get(0, 0).is_finite() && table.get(1, 1).is_finite();
        if curve.defined_mask[i] != expect_defined
            || table.q.defined != expect_defined
            || q_finite != expect_defined
            || p_finite != expect_defined
        {
            consistent = false;
        }
        if !expect_defined {
            inside += 1;
        }
    }
    let before = curve.q[..].iter().take_while(|q| q.is_finite()).count();
    let after = curve.q.iter().rev().take_while(|q| q.is_finite()).count();
    Ok(Verdict::check(
        refined && consistent && inside > 0 && before > 0 && after > 0,
        format!(
            "interval [{a:.10}, {b:.10}], {inside} undefined samples, {before} finite before, {after} finite after"
        ),
    ))
}

fn chi_modulus() -> Result<Verdict> {
    let s = ramp(0.5);
    let traj = integrate(&s, TT, 1e-12, 3)?;
    let w0 = 2.0;
    let mut rng = rand::rngs::StdRng::seed_from_u64(30);
    let mut worst: f64 = 0.0;
    let mut taken = 0;
    while taken < 30 {
        let t = rng.gen_range(0.05..0.45);
        let Some(w) = s.effective_frequencies(t)?.big_omega() else {
            continue;
        };
        let q = q_tt_general(&traj, &s, t)?;
        let (plus, minus) = chi_pm(&traj, &s, t)?;
        let want_plus = 2.0 * w * w0 * (q - 1.0);
        let want_minus = 2.0 * w * w0 * (q + 1.0);
        worst = worst
            .max((plus.norm_sqr() - want_plus).abs() / want_plus)
            .max((minus.norm_sqr() - want_minus).abs() / want_minus);
        taken += 1;
    }
    Ok(Verdict::check(worst < 1e-8, format!("max relative err {worst:.2e}")))
}

type Criterion = fn() -> Result<Verdict>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("endpoint energies", endpoint_energies),
        ("Q endpoint unity and actions", endpoint_unity),
        ("three Q forms agree", q_forms_agree),
        ("closed form vs ODE", closed_form_matches_ode),
        ("Wronskian and Ermakov-Lewis invariant", wronskian_and_invariant),
        ("oracle vs closed-form probabilities", oracle_agreement),
        ("probability table structure", probability_structure),
        ("generating-function identities", generating_identities),
        ("imaginary-frequency interval handling", imaginary_regime),
        ("chi modulus identity", chi_modulus),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let verdict = run().unwrap_or_else(|e| Verdict::check(false, format!("error: {e}")));
        let tag = if verdict.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag}  {name}: {}", i + 1, verdict.detail);
        if !verdict.pass {
            failures += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
