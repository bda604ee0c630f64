//! Transition probabilities between instantaneous eigenstates: generating
//! function, closed-form table and the `χ±` amplitudes.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cpo::{CpoTrajectory, OscillatorVariant};
use crate::error::{Error, Result};
use crate::output::{fmt_f64, write_header};
use crate::schedule::FrequencySchedule;

/// Largest supported table index.
pub const MAX_N: usize = 128;

/// Values this far below 1 are treated as rounding and clamped to 1.
pub const Q_SLACK: f64 = 1e-9;

/// Adiabaticity parameter fed to the probability formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QParameter {
    pub q: f64,
    pub defined: bool,
}

impl QParameter {
    pub fn new(q: f64) -> Result<Self> {
        if !q.is_finite() || q < 1.0 - Q_SLACK {
            return Err(Error::InvalidArgument(format!("Q = {q} must be finite and at least 1")));
        }
        Ok(Self {
            q: q.max(1.0),
            defined: true,
        })
    }

    pub fn undefined() -> Self {
        Self {
            q: f64::NAN,
            defined: false,
        }
    }

    pub fn value(&self) -> Result<f64> {
        if self.defined {
            Ok(self.q)
        } else {
            Err(Error::UndefinedQ)
        }
    }
}

/// Lower parameter of the terminating hypergeometric series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfInteger {
    Half,
    ThreeHalves,
}

impl HalfInteger {
    fn value(self) -> f64 {
        match self {
            Self::Half => 0.5,
            Self::ThreeHalves => 1.5,
        }
    }
}

/// `Σ_{m,n} P^{m,n} uⁿ vᵐ` in closed form.
pub fn generating_function(q: QParameter, u: f64, v: f64) -> Result<f64> {
    let q = q.value()?;
    if !(u.abs() <= 1.0 && v.abs() <= 1.0) {
        return Err(Error::InvalidArgument(format!("|u|, |v| must not exceed 1 (u = {u}, v = {v})")));
    }
    let radicand =
        q * (1.0 - u * u) * (1.0 - v * v) + (1.0 + u * u) * (1.0 + v * v) - 4.0 * u * v;
    if !(radicand > 0.0) {
        return Err(Error::RadicandNonPositive { radicand });
    }
    Ok((2.0 / radicand).sqrt())
}

/// `⟨m⟩ = Q(n + 1/2) − 1/2` for initial level `n`.
pub fn mean_quantum_number(q: QParameter, n: usize) -> Result<f64> {
    Ok(q.value()? * (n as f64 + 0.5) - 0.5)
}

/// `((Q−1)/(Q+1))^{k+l} · ₂F₁(−k, −l; c; 2/(1−Q))²` evaluated as a
/// polynomial in `Q − 1`, so `Q = 1` needs no special case.
///
/// With `x = Q − 1` the bracket is `G²/(Q+1)^{k+l}` where
/// `G = Σ_s (−1)^s a_s 2^s x^{(k+l)/2 − s}`. Terms are generated from the
/// highest `s` downwards, which never divides by `x`.
pub fn hyp2f1_terminating(k: usize, l: usize, c: HalfInteger, q: QParameter) -> Result<f64> {
    let q = q.value()?;
    Ok(regrouped_square(k, l, c.value(), q))
}

fn regrouped_square(k: usize, l: usize, c: f64, q: f64) -> f64 {
    let x = q - 1.0;
    let y = x / (q + 1.0);
    let two_z = 2.0 / (q + 1.0);
    let h = 0.5 * (k + l) as f64;
    let top = k.min(l);

    // log of a_top (2/(Q+1))^top
    let mut log_top = top as f64 * two_z.ln();
    for s in 0..top {
        let (ks, ls) = ((k - s) as f64, (l - s) as f64);
        log_top += (ks * ls / ((c + s as f64) * (s + 1) as f64)).ln();
    }
    let power = h - top as f64;
    if power > 0.0 {
        if y == 0.0 {
            return 0.0;
        }
        log_top += power * y.ln();
    }

    // terms relative to the top one, rescaled if they grow large
    let mut scale = log_top;
    let mut term = 1.0;
    let mut sum = if top.is_multiple_of(2) { 1.0 } else { -1.0 };
    for s in (0..top).rev() {
        let (ks, ls) = ((k - s) as f64, (l - s) as f64);
        term *= (c + s as f64) * (s + 1) as f64 * x / (2.0 * ks * ls);
        let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * term;
        if term > 1e150 {
            term *= 1e-150;
            sum *= 1e-150;
            scale += 150.0 * std::f64::consts::LN_10;
        }
    }
    if sum == 0.0 {
        return 0.0;
    }
    (2.0 * (sum.abs().ln() + scale)).exp()
}

/// `∏_{j=1}^{k} (2j−1)/(2j)` for even states, `∏ (2j+1)/(2j)` for odd ones.
fn double_factorial_ratio(k: usize, odd: bool) -> f64 {
    let shift = if odd { 1.0 } else { -1.0 };
    (1..=k).fold(1.0, |acc, j| acc * (2.0 * j as f64 + shift) / (2.0 * j as f64))
}

/// Single entry `P^{m,n}` for a defined `Q`.
pub fn transition_probability(q: QParameter, m: usize, n: usize) -> Result<f64> {
    let q = q.value()?;
    Ok(entry(q, m, n))
}

fn entry(q: f64, m: usize, n: usize) -> f64 {
    if (m + n) % 2 == 1 {
        return 0.0;
    }
    let (m, n) = (m.min(n), m.max(n));
    let odd = m % 2 == 1;
    let (k, l) = (m / 2, n / 2);
    let ratio = 2.0 / (q + 1.0);
    let (c, base) = if odd {
        (1.5, ratio * ratio.sqrt())
    } else {
        (0.5, ratio.sqrt())
    };
    double_factorial_ratio(k, odd) * double_factorial_ratio(l, odd) * base * regrouped_square(k, l, c, q)
}

/// Square table `probs[m][n] = P^{m,n}` for `m, n ≤ n_max`, with the
/// truncated mean `Σ_m m P^{m,n}` per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionTable {
    pub q: QParameter,
    pub n_max: usize,
    pub probs: Vec<Vec<f64>>,
    pub mean_m: Vec<f64>,
}

#[derive(Serialize)]
struct TableDocument<'a> {
    q: Option<f64>,
    n_max: usize,
    probs: Option<&'a [Vec<f64>]>,
    defined: bool,
}

impl TransitionTable {
    /// Placeholder for times where `Q` cannot be defined; all entries NaN.
    pub fn undefined(n_max: usize) -> Self {
        Self {
            q: QParameter::undefined(),
            n_max,
            probs: vec![vec![f64::NAN; n_max + 1]; n_max + 1],
            mean_m: vec![f64::NAN; n_max + 1],
        }
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.probs[m][n]
    }

    pub fn column_sum(&self, n: usize) -> f64 {
        self.probs.iter().map(|row| row[n]).sum()
    }

    /// Rows `m`, columns `n`, with a leading `m` column.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut names = vec!["m".to_string()];
        names.extend((0..=self.n_max).map(|n| format!("n{n}")));
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        write_header(&mut w, &refs)?;
        for (m, row) in self.probs.iter().enumerate() {
            let fields: Vec<String> = row.iter().map(|&p| fmt_f64(p)).collect();
            writeln!(w, "{m},{}", fields.join(","))?;
        }
        Ok(())
    }

    /// `{q, n_max, probs, defined}`; `q` and `probs` are null when undefined.
    pub fn to_json(&self) -> Result<String> {
        let doc = TableDocument {
            q: self.q.defined.then_some(self.q.q),
            n_max: self.n_max,
            probs: self.q.defined.then_some(self.probs.as_slice()),
            defined: self.q.defined,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

pub fn probability_table(q: QParameter, n_max: usize) -> Result<TransitionTable> {
    let qv = q.value()?;
    if n_max > MAX_N {
        return Err(Error::Overflow { n_max, limit: MAX_N });
    }
    let size = n_max + 1;
    let mut probs = vec![vec![0.0; size]; size];
    for m in 0..size {
        for n in (m..size).step_by(2) {
            let p = entry(qv, m, n);
            probs[m][n] = p;
            probs[n][m] = p;
        }
    }
    let mean_m = (0..size)
        .map(|n| (0..size).map(|m| m as f64 * probs[m][n]).sum())
        .collect();
    Ok(TransitionTable {
        q,
        n_max,
        probs,
        mean_m,
    })
}

/// `Q^TT = ω/Ω` at `t` for a quiet-start schedule; undefined where
/// `Ω² ≤ 0`.
pub fn q_parameter_at(s: &FrequencySchedule, t: f64) -> Result<QParameter> {
    match crate::adiabaticity::q_tt_simple(s, t) {
        Ok(q) => QParameter::new(q),
        Err(Error::UndefinedSpectrum { .. }) => Ok(QParameter::undefined()),
        Err(e) => Err(e),
    }
}

/// Table at time `t` of a quiet-start schedule, or an all-NaN table where
/// the spectrum is undefined.
pub fn probability_table_at(s: &FrequencySchedule, t: f64, n_max: usize) -> Result<TransitionTable> {
    let q = q_parameter_at(s, t)?;
    if q.defined {
        probability_table(q, n_max)
    } else if n_max > MAX_N {
        Err(Error::Overflow { n_max, limit: MAX_N })
    } else {
        Ok(TransitionTable::undefined(n_max))
    }
}

/// `χ± = Ω₀(Ωμ − iμ̇) ± i(Ων − iν̇)` from a transitionless trajectory.
pub fn chi_pm(traj: &CpoTrajectory, s: &FrequencySchedule, t: f64) -> Result<(Complex64, Complex64)> {
    traj.require(OscillatorVariant::Transitionless)?;
    let big_omega = |t: f64| -> Result<f64> {
        let e = s.effective_frequencies(t)?;
        e.big_omega().ok_or(Error::UndefinedSpectrum {
            t,
            big_omega_sq: e.big_omega_sq,
        })
    };
    let w0 = big_omega(traj.t_start())?;
    let w = big_omega(t)?;
    let st = traj.state_at(t)?;
    let i = Complex64::i();
    let mu_part = w0 * Complex64::new(w * st.mu, -st.mu_dot);
    let nu_part = i * Complex64::new(w * st.nu, -st.nu_dot);
    Ok((mu_part + nu_part, mu_part - nu_part))
}
