//! Dormand–Prince 5(4) integrator with the fourth-order continuous
//! extension, for small fixed-size systems.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const MAX_STEPS: usize = 5_000_000;

/// Tolerances for the embedded error estimate; the per-component scale is
/// `abs_tol + rel_tol * max(|y_old|, |y_new|)`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

/// One accepted step with its interpolation coefficients.
#[derive(Debug, Clone)]
struct Segment<const N: usize> {
    t: f64,
    h: f64,
    coeff: [[f64; N]; 5],
}

impl<const N: usize> Segment<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t) / self.h;
        let s1 = 1.0 - s;
        let c = &self.coeff;
        std::array::from_fn(|i| {
            c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i])))
        })
    }
}

/// Continuous solution over `[t_start, t_end]`.
#[derive(Debug, Clone)]
pub struct DenseSolution<const N: usize> {
    t_start: f64,
    t_end: f64,
    y_start: [f64; N],
    segments: Vec<Segment<N>>,
}

impl<const N: usize> DenseSolution<N> {
    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.segments.len()
    }

    /// Interpolated state; `t` is clamped to the solution range.
    pub fn eval(&self, t: f64) -> [f64; N] {
        if t <= self.t_start || self.segments.is_empty() {
            return self.y_start;
        }
        let i = self
            .segments
            .partition_point(|seg| seg.t + seg.h < t)
            .min(self.segments.len() - 1);
        let seg = &self.segments[i];
        seg.eval(t.min(seg.t + seg.h))
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(a, k)| a * k[i]).sum::<f64>())
}

fn error_norm<const N: usize>(err: &[f64; N], y: &[f64; N], y_new: &[f64; N], tol: Tolerance) -> f64 {
    let sum: f64 = (0..N)
        .map(|i| {
            let sc = tol.abs_tol + tol.rel_tol * y[i].abs().max(y_new[i].abs());
            (err[i] / sc).powi(2)
        })
        .sum();
    (sum / N as f64).sqrt()
}

fn initial_step<const N: usize, F>(f: &mut F, t: f64, y: &[f64; N], k1: &[f64; N], tol: Tolerance, span: f64) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let scale = |i: usize| tol.abs_tol + tol.rel_tol * y[i].abs();
    let norm = |v: &[f64; N]| {
        ((0..N).map(|i| (v[i] / scale(i)).powi(2)).sum::<f64>() / N as f64).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(k1);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span);
    let y1 = axpy(y, h0, &[(1.0, k1)]);
    let k2 = f(t + h0, &y1);
    let diff: [f64; N] = std::array::from_fn(|i| k2[i] - k1[i]);
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrates `y' = f(t, y)` from `t_start` to `t_end > t_start`.
pub fn integrate<const N: usize, F>(
    mut f: F,
    t_start: f64,
    y_start: [f64; N],
    t_end: f64,
    tol: Tolerance,
) -> Result<DenseSolution<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let span = t_end - t_start;
    if !(span > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "integration span [{t_start}, {t_end}] is empty"
        )));
    }
    let mut t = t_start;
    let mut y = y_start;
    let mut k1 = f(t, &y);
    let mut h = initial_step(&mut f, t, &y, &k1, tol, span);
    let mut fac_old: f64 = 1e-4;
    let mut rejected_last = false;
    let mut segments = Vec::new();

    for _ in 0..MAX_STEPS {
        if t >= t_end {
            return Ok(DenseSolution {
                t_start,
                t_end,
                y_start,
                segments,
            });
        }
        let last = t + 1.01 * h >= t_end;
        if last {
            h = t_end - t;
        }
        if h < 1e-14 * t.abs().max(span) {
            return Err(Error::StepSizeUnderflow { t, h });
        }

        let y2 = axpy(&y, h, &[(A21, &k1)]);
        let k2 = f(t + C2 * h, &y2);
        let y3 = axpy(&y, h, &[(A31, &k1), (A32, &k2)]);
        let k3 = f(t + C3 * h, &y3);
        let y4 = axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        let k4 = f(t + C4 * h, &y4);
        let y5 = axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        let k5 = f(t + C5 * h, &y5);
        let y6 = axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let t_new = if last { t_end } else { t + h };
        let k6 = f(t_new, &y6);
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t_new, &y_new);

        let err: [f64; N] = std::array::from_fn(|i| {
            h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        });
        let e = error_norm(&err, &y, &y_new, tol);
        if !e.is_finite() {
            h *= 0.1;
            rejected_last = true;
            continue;
        }

        // PI step-size control
        let fac11 = e.powf(0.2 - 0.75 * BETA);
        let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(0.2, 10.0);
        let mut h_new = h / fac;

        if e <= 1.0 {
            fac_old = e.max(1e-4);
            let diff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let c3: [f64; N] = std::array::from_fn(|i| h * k1[i] - diff[i]);
            let coeff = [
                y,
                diff,
                c3,
                std::array::from_fn(|i| diff[i] - h * k7[i] - c3[i]),
                std::array::from_fn(|i| {
                    h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                }),
            ];
            segments.push(Segment { t, h, coeff });
            k1 = k7;
            y = y_new;
            t = t_new;
            if rejected_last {
                h_new = h_new.min(h);
            }
            rejected_last = false;
        } else {
            h_new = h / (fac11 / SAFETY).min(10.0);
            rejected_last = true;
        }
        h = h_new;
    }
    Err(Error::StepSizeUnderflow { t, h })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol(rel_tol: f64) -> Tolerance {
        Tolerance {
            rel_tol,
            abs_tol: rel_tol,
        }
    }

    #[test]
    fn exponential_decay() {
        let sol = integrate(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 5.0, tol(1e-10)).unwrap();
        for i in 0..=50 {
            let t = 0.1 * i as f64;
            assert!((sol.eval(t)[0] - (-t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let w = 3.0;
        let sol = integrate(
            |_, y: &[f64; 2]| [y[1], -w * w * y[0]],
            0.0,
            [0.0, 1.0],
            10.0,
            tol(1e-11),
        )
        .unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..=997 {
            let t = 10.0 * i as f64 / 997.0;
            let y = sol.eval(t);
            worst = worst
                .max((y[0] - (w * t).sin() / w).abs())
                .max((y[1] - (w * t).cos()).abs());
        }
        assert!(worst < 1e-9, "worst = {worst:e}");
        assert_eq!(sol.eval(10.0)[0], sol.eval(11.0)[0]);
    }

    #[test]
    fn tighter_tolerance_takes_more_steps() {
        let rhs = |t: f64, y: &[f64; 2]| [y[1], -(1.0 + t * t) * y[0]];
        let coarse = integrate(rhs, 0.0, [1.0, 0.0], 4.0, tol(1e-6)).unwrap();
        let fine = integrate(rhs, 0.0, [1.0, 0.0], 4.0, tol(1e-12)).unwrap();
        assert!(fine.n_steps() > coarse.n_steps());
        assert!((coarse.eval(4.0)[0] - fine.eval(4.0)[0]).abs() < 1e-5);
    }

    #[test]
    fn empty_span_is_rejected() {
        assert!(integrate(|_, y: &[f64; 1]| [y[0]], 1.0, [1.0], 1.0, tol(1e-8)).is_err());
    }

    #[test]
    fn blowup_reports_underflow() {
        // y' = y², y(0) = 1 explodes at t = 1
        let r = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], 2.0, tol(1e-8));
        assert!(matches!(r, Err(Error::StepSizeUnderflow { .. })));
    }
}
