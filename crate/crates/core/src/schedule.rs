//! Frequency protocols `ω(t)` with analytic first and second derivatives,
//! and the effective frequencies derived from them.
//!
//! Units are `M = ħ = 1` throughout the crate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack (in units of `tf - t0`) accepted when checking that a
/// time lies inside the schedule range.
const RANGE_SLACK: f64 = 1e-12;

/// `ω`, `ω̇` and `ω̈` at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub omega: f64,
    pub omega_dot: f64,
    pub omega_ddot: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleKind {
    Constant { omega0: f64 },
    Cubic { omega0: f64, omegaf: f64 },
    Tabulated(ClampedSpline),
}

/// Frequency schedule on `[t0, tf]`. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleDocument", into = "ScheduleDocument")]
pub struct FrequencySchedule {
    t0: f64,
    tf: f64,
    kind: ScheduleKind,
}

/// Serialized form of a schedule.
///
/// ```json
/// {"kind": "cubic", "t0": 0.0, "tf": 0.5, "omega0": 2.0, "omegaf": 4.0}
/// {"kind": "constant", "t0": 0.0, "tf": 1.0, "omega0": 3.0}
/// {"kind": "tabulated", "t0": 0.0, "tf": 1.0, "samples": [[0.0, 2.0], [1.0, 3.0]]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScheduleDocument {
    Constant {
        t0: f64,
        tf: f64,
        omega0: f64,
    },
    Cubic {
        t0: f64,
        tf: f64,
        omega0: f64,
        omegaf: f64,
    },
    Tabulated {
        t0: f64,
        tf: f64,
        samples: Vec<[f64; 2]>,
    },
}

impl TryFrom<ScheduleDocument> for FrequencySchedule {
    type Error = Error;

    fn try_from(doc: ScheduleDocument) -> Result<Self> {
        match doc {
            ScheduleDocument::Constant { t0, tf, omega0 } => Self::constant(t0, tf, omega0),
            ScheduleDocument::Cubic {
                t0,
                tf,
                omega0,
                omegaf,
            } => make_cubic_schedule(t0, tf, omega0, omegaf),
            ScheduleDocument::Tabulated { t0, tf, samples } => {
                let s = Self::tabulated(&samples)?;
                if s.t0 != t0 || s.tf != tf {
                    return Err(Error::InvalidSamples(format!(
                        "samples span [{}, {}] but the document declares [{t0}, {tf}]",
                        s.t0, s.tf
                    )));
                }
                Ok(s)
            }
        }
    }
}

impl From<FrequencySchedule> for ScheduleDocument {
    fn from(s: FrequencySchedule) -> Self {
        let (t0, tf) = (s.t0, s.tf);
        match s.kind {
            ScheduleKind::Constant { omega0 } => ScheduleDocument::Constant { t0, tf, omega0 },
            ScheduleKind::Cubic { omega0, omegaf } => ScheduleDocument::Cubic {
                t0,
                tf,
                omega0,
                omegaf,
            },
            ScheduleKind::Tabulated(spline) => ScheduleDocument::Tabulated {
                t0,
                tf,
                samples: spline
                    .knots
                    .iter()
                    .zip(&spline.values)
                    .map(|(&t, &w)| [t, w])
                    .collect(),
            },
        }
    }
}

fn check_interval(t0: f64, tf: f64) -> Result<()> {
    if !(t0.is_finite() && tf.is_finite()) || tf <= t0 {
        return Err(Error::InvalidInterval { t0, tf });
    }
    Ok(())
}

fn check_frequency(value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::InvalidFrequency { value });
    }
    Ok(())
}

/// Cubic ramp from `omega0` at `t0` to `omegaf` at `tf` with vanishing slope
/// at both ends:
///
/// `ω(t) = ω0 + (ωf − ω0) {1 + 2 (tf − t)/(tf − t0)} ((t − t0)/(tf − t0))²`
pub fn make_cubic_schedule(t0: f64, tf: f64, omega0: f64, omegaf: f64) -> Result<FrequencySchedule> {
    check_interval(t0, tf)?;
    check_frequency(omega0)?;
    check_frequency(omegaf)?;
    Ok(FrequencySchedule {
        t0,
        tf,
        kind: ScheduleKind::Cubic { omega0, omegaf },
    })
}

impl FrequencySchedule {
    pub fn constant(t0: f64, tf: f64, omega0: f64) -> Result<Self> {
        check_interval(t0, tf)?;
        check_frequency(omega0)?;
        Ok(Self {
            t0,
            tf,
            kind: ScheduleKind::Constant { omega0 },
        })
    }

    /// Clamped cubic spline through `(t, ω)` samples with zero end slopes.
    /// Knot times must be strictly increasing; the schedule spans the first
    /// to the last knot.
    pub fn tabulated(samples: &[[f64; 2]]) -> Result<Self> {
        let spline = ClampedSpline::new(samples)?;
        let t0 = spline.knots[0];
        let tf = *spline.knots.last().unwrap();
        check_interval(t0, tf)?;
        // positivity on a grid ten times denser than the knots
        let n_dense = 10 * spline.knots.len();
        for i in 0..=n_dense {
            let t = t0 + (tf - t0) * i as f64 / n_dense as f64;
            let w = spline.eval(t).omega;
            if !(w > 0.0) {
                return Err(Error::InvalidSamples(format!(
                    "interpolated frequency {w} at t = {t} is not positive"
                )));
            }
        }
        Ok(Self {
            t0,
            tf,
            kind: ScheduleKind::Tabulated(spline),
        })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tf(&self) -> f64 {
        self.tf
    }

    pub fn duration(&self) -> f64 {
        self.tf - self.t0
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    pub fn to_document(&self) -> ScheduleDocument {
        self.clone().into()
    }

    /// Validates `t` against `[t0, tf]`, snapping values within a tiny
    /// relative slack onto the endpoints.
    pub fn check_time(&self, t: f64) -> Result<f64> {
        let slack = RANGE_SLACK * self.duration();
        if !(t >= self.t0 - slack && t <= self.tf + slack) {
            return Err(Error::OutOfRange {
                t,
                t0: self.t0,
                tf: self.tf,
            });
        }
        Ok(t.clamp(self.t0, self.tf))
    }

    pub fn derivatives(&self, t: f64) -> Result<Derivatives> {
        let t = self.check_time(t)?;
        Ok(self.derivatives_extended(t))
    }

    pub fn omega(&self, t: f64) -> Result<f64> {
        Ok(self.derivatives(t)?.omega)
    }

    /// Evaluates the analytic continuation of the schedule without range
    /// checks. Finite-difference stencils near the endpoints rely on this.
    pub fn derivatives_extended(&self, t: f64) -> Derivatives {
        match &self.kind {
            ScheduleKind::Constant { omega0 } => Derivatives {
                omega: *omega0,
                omega_dot: 0.0,
                omega_ddot: 0.0,
            },
            ScheduleKind::Cubic { omega0, omegaf } => {
                let span = self.tf - self.t0;
                let s = (t - self.t0) / span;
                let delta = omegaf - omega0;
                Derivatives {
                    omega: omega0 + delta * s * s * (3.0 - 2.0 * s),
                    omega_dot: 6.0 * delta * s * (1.0 - s) / span,
                    omega_ddot: 6.0 * delta * (1.0 - 2.0 * s) / (span * span),
                }
            }
            ScheduleKind::Tabulated(spline) => spline.eval(t),
        }
    }

    pub fn effective_frequencies(&self, t: f64) -> Result<EffectiveFrequencies> {
        Ok(EffectiveFrequencies::from_derivatives(self.derivatives(t)?))
    }

    /// Maximal sub-intervals of `[t0, tf]` on which `Ω² ≤ 0`, detected on a
    /// uniform scan of `n_samples` points with endpoints refined by
    /// bisection to `1e-10 (tf - t0)`.
    ///
    /// Regions narrower than the scan spacing can be missed.
    pub fn spectrum_validity_intervals(&self, n_samples: usize) -> Vec<(f64, f64)> {
        let n = n_samples.max(2);
        let span = self.duration();
        let time = |i: usize| self.t0 + span * i as f64 / (n - 1) as f64;
        let tol = 1e-10 * span;
        let omega_sq = |t: f64| {
            EffectiveFrequencies::from_derivatives(self.derivatives_extended(t)).big_omega_sq
        };
        // bisect between a point with Ω² > 0 and one with Ω² ≤ 0
        let refine = |mut pos: f64, mut neg: f64| {
            while (pos - neg).abs() > tol {
                let mid = 0.5 * (pos + neg);
                if omega_sq(mid) > 0.0 {
                    pos = mid;
                } else {
                    neg = mid;
                }
            }
            neg
        };

        let mut intervals = Vec::new();
        let mut start: Option<f64> = None;
        for i in 0..n {
            let t = time(i);
            let bad = omega_sq(t) <= 0.0;
            match (bad, start) {
                (true, None) => {
                    start = Some(if i == 0 { t } else { refine(time(i - 1), t) });
                }
                (false, Some(a)) => {
                    intervals.push((a, refine(t, time(i - 1))));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(a) = start {
            intervals.push((a, self.tf));
        }
        intervals
    }
}

/// Frequencies entering the transitionless Hamiltonian and the classical
/// oscillator it induces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveFrequencies {
    pub omega: f64,
    pub omega_dot: f64,
    pub omega_ddot: f64,
    /// `Ω² = ω² − (ω̇/ω)²/4`, signed.
    pub big_omega_sq: f64,
    /// `Ω̃² = ω² − (3/4)(ω̇/ω)² + (1/2)(ω̈/ω)`, signed.
    pub tilde_omega_sq: f64,
    /// `ζ = 1 + ω̇/(2iΩω)`; `None` where `Ω² ≤ 0`.
    pub zeta: Option<Complex64>,
}

impl EffectiveFrequencies {
    pub fn from_derivatives(d: Derivatives) -> Self {
        let Derivatives {
            omega,
            omega_dot,
            omega_ddot,
        } = d;
        let rate = omega_dot / omega;
        let big_omega_sq = omega * omega - 0.25 * rate * rate;
        let tilde_omega_sq = omega * omega - 0.75 * rate * rate + 0.5 * omega_ddot / omega;
        let zeta = (big_omega_sq > 0.0).then(|| {
            // 1/(2i) = -i/2
            Complex64::new(1.0, -0.5 * rate / big_omega_sq.sqrt())
        });
        Self {
            omega,
            omega_dot,
            omega_ddot,
            big_omega_sq,
            tilde_omega_sq,
            zeta,
        }
    }

    pub fn is_defined(&self) -> bool {
        self.big_omega_sq > 0.0
    }

    /// `Ω`, or `None` inside a continuous-spectrum region.
    pub fn big_omega(&self) -> Option<f64> {
        self.is_defined().then(|| self.big_omega_sq.sqrt())
    }
}

/// Cubic spline with first derivative clamped to zero at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct ClampedSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl ClampedSpline {
    pub fn new(samples: &[[f64; 2]]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidSamples("at least two samples required".into()));
        }
        let knots: Vec<f64> = samples.iter().map(|p| p[0]).collect();
        let values: Vec<f64> = samples.iter().map(|p| p[1]).collect();
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSamples("non-finite sample".into()));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSamples(
                "knot times must be strictly increasing".into(),
            ));
        }
        if let Some(&w) = values.iter().find(|&&w| w <= 0.0) {
            return Err(Error::InvalidFrequency { value: w });
        }

        let n = knots.len();
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = (0..n - 1).map(|i| (values[i + 1] - values[i]) / h[i]).collect();

        // tridiagonal system for the second derivatives
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        diag[0] = 2.0 * h[0];
        sup[0] = h[0];
        rhs[0] = 6.0 * slope[0];
        for i in 1..n - 1 {
            sub[i] = h[i - 1];
            diag[i] = 2.0 * (h[i - 1] + h[i]);
            sup[i] = h[i];
            rhs[i] = 6.0 * (slope[i] - slope[i - 1]);
        }
        sub[n - 1] = h[n - 2];
        diag[n - 1] = 2.0 * h[n - 2];
        rhs[n - 1] = -6.0 * slope[n - 2];

        // Thomas algorithm
        for i in 1..n {
            let m = sub[i] / diag[i - 1];
            diag[i] -= m * sup[i - 1];
            rhs[i] -= m * rhs[i - 1];
        }
        let mut second = vec![0.0; n];
        second[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            second[i] = (rhs[i] - sup[i] * second[i + 1]) / diag[i];
        }

        Ok(Self {
            knots,
            values,
            second,
        })
    }

    fn eval(&self, t: f64) -> Derivatives {
        let last = self.knots.len() - 2;
        let i = match self.knots.partition_point(|&k| k <= t) {
            0 => 0,
            p => (p - 1).min(last),
        };
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - t) / h;
        let b = 1.0 - a;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        Derivatives {
            omega: a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0,
            omega_dot: (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0
                + (3.0 * b * b - 1.0) / 6.0 * h * m1,
            omega_ddot: a * m0 + b * m1,
        }
    }
}
