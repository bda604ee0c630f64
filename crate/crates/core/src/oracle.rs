//! Brute-force transition probabilities from the Gaussian propagator and
//! the instantaneous eigenfunctions on a uniform position grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cpo::{CpoTrajectory, OscillatorVariant};
use crate::error::{Error, Result};
use crate::schedule::{EffectiveFrequencies, FrequencySchedule};

/// Highest eigenfunction index supported by [`eigenfunction`].
pub const MAX_LEVEL: usize = 12;

/// Highest level in an oracle table.
pub const MAX_ORACLE_LEVEL: usize = 6;

/// `|μ|` at or below this makes the kernel unusable.
pub const SINGULAR_MU: f64 = 1e-6;

pub const DEFAULT_POINTS: usize = 1201;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionGrid {
    pub half_width: f64,
    pub n_points: usize,
    pub spacing: f64,
}

impl PositionGrid {
    /// Symmetric grid on `[−half_width, half_width]`; `n_points` must be odd
    /// so that 0 is a node.
    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidArgument(format!("half_width {half_width} must be positive")));
        }
        if n_points < 3 || n_points.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("n_points {n_points} must be odd and at least 3")));
        }
        Ok(Self {
            half_width,
            n_points,
            spacing: 2.0 * half_width / (n_points - 1) as f64,
        })
    }

    /// `10/√min(Ω(t_start), Ω(t))` wide with [`DEFAULT_POINTS`] nodes.
    pub fn for_times(s: &FrequencySchedule, t_start: f64, t: f64) -> Result<Self> {
        let w = spectrum(s, t_start)?.1.min(spectrum(s, t)?.1);
        Self::new(10.0 / w.sqrt(), DEFAULT_POINTS)
    }

    pub fn nodes(&self) -> Vec<f64> {
        let mid = (self.n_points / 2) as f64;
        (0..self.n_points)
            .map(|i| (i as f64 - mid) * self.spacing)
            .collect()
    }

    /// Roughly half the nodes over the same extent; every other node when
    /// `(n_points − 1)/2` is even.
    pub fn coarsened(&self) -> Result<Self> {
        let half = self.n_points / 2 + 1;
        Self::new(self.half_width, if half.is_multiple_of(2) { half + 1 } else { half }.max(3))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleResult {
    pub probs: Vec<Vec<f64>>,
    pub grid: PositionGrid,
    /// Largest change in any entry against the coarsened grid.
    pub est_error: f64,
}

fn spectrum(s: &FrequencySchedule, t: f64) -> Result<(EffectiveFrequencies, f64)> {
    let e = s.effective_frequencies(t)?;
    match e.big_omega() {
        Some(w) => Ok((e, w)),
        None => Err(Error::UndefinedSpectrum {
            t,
            big_omega_sq: e.big_omega_sq,
        }),
    }
}

/// `(Ω/π)^{1/4} H_n(√Ω x) exp(−ζΩx²/2) / √(2ⁿ n!)`.
pub fn eigenfunction(n: usize, big_omega: f64, zeta: Complex64, x: f64) -> Result<Complex64> {
    if !(big_omega > 0.0 && big_omega.is_finite()) {
        return Err(Error::InvalidFrequency { value: big_omega });
    }
    if n > MAX_LEVEL {
        return Err(Error::InvalidArgument(format!("level {n} exceeds {MAX_LEVEL}")));
    }
    let y = big_omega.sqrt() * x;
    let (mut h_prev, mut h) = (0.0, 1.0);
    for k in 0..n {
        let next = 2.0 * y * h - 2.0 * k as f64 * h_prev;
        h_prev = h;
        h = next;
    }
    let norm = (1..=n).fold(1.0, |acc, k| acc * 2.0 * k as f64).sqrt();
    let gauss = (-0.5 * zeta * big_omega * x * x).exp();
    Ok((big_omega / std::f64::consts::PI).powf(0.25) * h / norm * gauss)
}

/// Levels `0..=n_max` on `xs`, via the normalized three-term recurrence.
fn eigenfunction_table(n_max: usize, big_omega: f64, zeta: Complex64, xs: &[f64]) -> Vec<Vec<Complex64>> {
    let peak = (big_omega / std::f64::consts::PI).powf(0.25);
    let root = big_omega.sqrt();
    let mut table = vec![vec![Complex64::new(0.0, 0.0); xs.len()]; n_max + 1];
    for (j, &x) in xs.iter().enumerate() {
        let y = root * x;
        let mut prev = Complex64::new(0.0, 0.0);
        let mut cur = peak * (-0.5 * zeta * big_omega * x * x).exp();
        table[0][j] = cur;
        for n in 0..n_max {
            let k = n as f64;
            let next = (2.0 / (k + 1.0)).sqrt() * y * cur - (k / (k + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
            table[n + 1][j] = cur;
        }
    }
    table
}

/// Quadratic-phase factors of the propagator:
/// `K(x|x0) = pre · exp(i a x²) · exp(−i x x0/μ) · exp(i b x0²)`.
#[derive(Debug, Clone, Copy)]
struct Kernel {
    pre: Complex64,
    a: f64,
    b: f64,
    inv_mu: f64,
}

impl Kernel {
    fn at(traj: &CpoTrajectory, s: &FrequencySchedule, t: f64) -> Result<Self> {
        traj.require(OscillatorVariant::Transitionless)?;
        let st = traj.state_at(t)?;
        if st.mu.abs() <= SINGULAR_MU {
            return Err(Error::SingularKernel { t, mu: st.mu });
        }
        let d = s.derivatives(t)?;
        let d0 = s.derivatives(traj.t_start())?;
        let two_pi_i_mu = Complex64::new(0.0, 2.0 * std::f64::consts::PI * st.mu);
        Ok(Self {
            pre: two_pi_i_mu.inv().sqrt(),
            a: 0.5 * (st.mu_dot / st.mu + 0.5 * d.omega_dot / d.omega),
            b: 0.5 * (st.nu / st.mu - 0.5 * d0.omega_dot / d0.omega),
            inv_mu: 1.0 / st.mu,
        })
    }

    fn eval(&self, x: f64, x0: f64) -> Complex64 {
        let phase = self.a * x * x - x * x0 * self.inv_mu + self.b * x0 * x0;
        self.pre * Complex64::from_polar(1.0, phase)
    }
}

/// Propagator `U(x|x0)` from the trajectory's start time to `t`.
pub fn propagator_kernel(traj: &CpoTrajectory, s: &FrequencySchedule, t: f64, x: f64, x0: f64) -> Result<Complex64> {
    Ok(Kernel::at(traj, s, t)?.eval(x, x0))
}

/// Applies the propagator from the trajectory start to `t` to a wave
/// function sampled on `grid`, returning samples on the same grid.
pub fn propagate(
    traj: &CpoTrajectory,
    s: &FrequencySchedule,
    t: f64,
    grid: &PositionGrid,
    psi0: &[Complex64],
) -> Result<Vec<Complex64>> {
    let k = Kernel::at(traj, s, t)?;
    let xs = grid.nodes();
    let dx = grid.spacing;
    Ok(xs
        .iter()
        .map(|&x| xs.iter().zip(psi0).map(|(&x0, &p)| k.eval(x, x0) * p).sum::<Complex64>() * dx)
        .collect())
}

fn probabilities_on(
    k: &Kernel,
    grid: &PositionGrid,
    n_max: usize,
    start: (f64, Complex64),
    end: (f64, Complex64),
) -> Vec<Vec<f64>> {
    let xs = grid.nodes();
    let dx = grid.spacing;
    let initial = eigenfunction_table(n_max, start.0, start.1, &xs);
    let fin = eigenfunction_table(n_max, end.0, end.1, &xs);
    let chirp0: Vec<Complex64> = xs.iter().map(|&x| Complex64::from_polar(1.0, k.b * x * x)).collect();
    let chirp: Vec<Complex64> = xs.iter().map(|&x| Complex64::from_polar(1.0, k.a * x * x)).collect();
    let cross: Vec<Vec<Complex64>> = xs
        .iter()
        .map(|&x| xs.iter().map(|&x0| Complex64::from_polar(1.0, -x * x0 * k.inv_mu)).collect())
        .collect();

    // evolved[n][j] = ∫ K(x_j|x0) φ_n(x0) dx0
    let evolved: Vec<Vec<Complex64>> = initial
        .iter()
        .map(|phi| {
            let g: Vec<Complex64> = phi.iter().zip(&chirp0).map(|(p, c)| p * c).collect();
            cross
                .iter()
                .zip(&chirp)
                .map(|(row, c)| k.pre * c * row.iter().zip(&g).map(|(r, v)| r * v).sum::<Complex64>() * dx)
                .collect()
        })
        .collect();

    (0..=n_max)
        .map(|m| {
            (0..=n_max)
                .map(|n| {
                    let amp: Complex64 = fin[m]
                        .iter()
                        .zip(&evolved[n])
                        .map(|(f, e)| f.conj() * e)
                        .sum::<Complex64>()
                        * dx;
                    amp.norm_sqr()
                })
                .collect()
        })
        .collect()
}

/// `P^{m,n}` for `m, n ≤ n_max` by trapezoidal double quadrature.
pub fn oracle_probabilities(
    traj: &CpoTrajectory,
    s: &FrequencySchedule,
    t: f64,
    n_max: usize,
    grid: PositionGrid,
) -> Result<OracleResult> {
    if n_max > MAX_ORACLE_LEVEL {
        return Err(Error::InvalidArgument(format!(
            "oracle level {n_max} exceeds {MAX_ORACLE_LEVEL}"
        )));
    }
    let (e0, w0) = spectrum(s, traj.t_start())?;
    let (e, w) = spectrum(s, t)?;
    let k = Kernel::at(traj, s, t)?;
    let start = (w0, e0.zeta.expect("defined spectrum has zeta"));
    let end = (w, e.zeta.expect("defined spectrum has zeta"));
    let probs = probabilities_on(&k, &grid, n_max, start, end);
    let coarse = probabilities_on(&k, &grid.coarsened()?, n_max, start, end);
    let est_error = probs
        .iter()
        .flatten()
        .zip(coarse.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(OracleResult {
        probs,
        grid,
        est_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpo::integrate;
    use crate::schedule::make_cubic_schedule;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn eigenfunction_examples() {
        let one = Complex64::new(1.0, 0.0);
        let g = eigenfunction(0, 1.0, one, 0.0).unwrap();
        assert_abs_diff_eq!(g.re, PI.powf(-0.25), epsilon = 1e-15);
        let e2 = eigenfunction(2, 1.0, one, 1.0).unwrap();
        let want = 2.0 / 8f64.sqrt() * PI.powf(-0.25) * (-0.5f64).exp();
        assert_abs_diff_eq!(e2.re, want, epsilon = 1e-15);
        assert!(eigenfunction(13, 1.0, one, 0.0).is_err());
        assert!(eigenfunction(0, -1.0, one, 0.0).is_err());
    }

    #[test]
    fn recurrence_table_matches_direct_evaluation() {
        let zeta = Complex64::new(1.0, -0.3);
        let xs = [-1.3, 0.0, 0.4, 2.2];
        let table = eigenfunction_table(8, 2.0, zeta, &xs);
        for n in 0..=8 {
            for (j, &x) in xs.iter().enumerate() {
                let d = eigenfunction(n, 2.0, zeta, x).unwrap();
                assert!((table[n][j] - d).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn grid_validation() {
        assert!(PositionGrid::new(5.0, 100).is_err());
        assert!(PositionGrid::new(-1.0, 101).is_err());
        let g = PositionGrid::new(5.0, 101).unwrap();
        assert_eq!(g.nodes()[50], 0.0);
        assert_eq!(g.coarsened().unwrap().n_points, 51);
    }

    #[test]
    fn singular_kernel_at_start() {
        let s = make_cubic_schedule(0.0, 0.5, 2.0, 4.0).unwrap();
        let traj = integrate(&s, OscillatorVariant::Transitionless, 1e-10, 3).unwrap();
        assert!(matches!(
            propagator_kernel(&traj, &s, 0.0, 0.1, 0.2),
            Err(Error::SingularKernel { .. })
        ));
    }

    #[test]
    fn quarter_period_kernel() {
        // ω = 1 over a quarter period: μ = 1, μ̇ = 0, ν = 0
        let s = FrequencySchedule::constant(0.0, PI / 2.0, 1.0).unwrap();
        let traj = integrate(&s, OscillatorVariant::Transitionless, 1e-12, 3).unwrap();
        let (x, x0) = (0.7, -0.4);
        let k = propagator_kernel(&traj, &s, PI / 2.0, x, x0).unwrap();
        let want = Complex64::new(0.0, 2.0 * PI).inv().sqrt() * Complex64::from_polar(1.0, -x * x0);
        assert!((k - want).norm() < 1e-10);
    }

    #[test]
    fn final_time_is_transitionless() {
        let s = make_cubic_schedule(0.0, 0.5, 2.0, 4.0).unwrap();
        let traj = integrate(&s, OscillatorVariant::Transitionless, 1e-11, 3).unwrap();
        let grid = PositionGrid::for_times(&s, 0.0, 0.5).unwrap();
        let r = oracle_probabilities(&traj, &s, 0.5, 4, grid).unwrap();
        for m in 0..=4 {
            for n in 0..=4 {
                let want = if m == n { 1.0 } else { 0.0 };
                assert!((r.probs[m][n] - want).abs() < 1e-3);
            }
        }
        assert!(r.probs[1][0] < 1e-6);
        assert!(r.est_error < 1e-3);
    }
}
