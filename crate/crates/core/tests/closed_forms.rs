//! Formula-level checks against exact rational arithmetic and an
//! independent amplitude recurrence.

use num_rational::Ratio;
use qpo_core::transition::{
    generating_function, hyp2f1_terminating, probability_table, HalfInteger, QParameter,
};
use qpo_core::make_cubic_schedule;

type Q128 = Ratio<i128>;

fn r(n: i128, d: i128) -> Q128 {
    Ratio::new(n, d)
}

#[test]
fn cubic_midpoint_in_exact_arithmetic() {
    // ω0 + Δ(3s² − 2s³), Δ = 2, s = 1/2
    let s = r(1, 2);
    let exact = r(2, 1) + r(2, 1) * (r(3, 1) * s * s - r(2, 1) * s * s * s);
    assert_eq!(exact, r(3, 1));
    // 6Δ s(1−s)/T with T = 1/2
    let rate = r(6, 1) * r(2, 1) * s * (r(1, 1) - s) / r(1, 2);
    assert_eq!(rate, r(6, 1));

    let sched = make_cubic_schedule(0.0, 0.5, 2.0, 4.0).unwrap();
    let d = sched.derivatives(0.25).unwrap();
    assert_eq!(d.omega, 3.0);
    assert!((d.omega_dot - 6.0).abs() < 1e-14);
    assert!(d.omega_ddot.abs() < 1e-12);
}

/// `((q−1)/(q+1))^{k+l} F(−k, −l; c; 2/(1−q))²` summed term by term.
fn exact_bracket(k: i128, l: i128, c: Q128, q: Q128) -> Q128 {
    let one = r(1, 1);
    let z = r(2, 1) / (one - q);
    let mut term = one;
    let mut sum = one;
    for s in 0..k.min(l) {
        let s_r = r(s, 1);
        term = term * (r(-k, 1) + s_r) * (r(-l, 1) + s_r) / ((c + s_r) * (s_r + one)) * z;
        sum += term;
    }
    let mut ratio = one;
    for _ in 0..(k + l) {
        ratio = ratio * (q - one) / (q + one);
    }
    ratio * sum * sum
}

fn to_f64(x: Q128) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

#[test]
fn regrouped_bracket_matches_rational_evaluation() {
    // hand value: F(−1, −2; 3/2; −1) = −1/3, so the bracket is (1/2)³/9
    assert_eq!(exact_bracket(1, 2, r(3, 2), r(3, 1)), r(1, 72));
    let got = hyp2f1_terminating(1, 2, HalfInteger::ThreeHalves, QParameter::new(3.0).unwrap()).unwrap();
    assert!((got - 1.0 / 72.0).abs() < 1e-16);

    for (qn, qd) in [(3, 1), (2, 1), (5, 3), (7, 2)] {
        let q = r(qn, qd);
        let qp = QParameter::new(to_f64(q)).unwrap();
        for k in 0..6 {
            for l in 0..6 {
                for (c, tag) in [(r(1, 2), HalfInteger::Half), (r(3, 2), HalfInteger::ThreeHalves)] {
                    let want = to_f64(exact_bracket(k, l, c, q));
                    let got = hyp2f1_terminating(k as usize, l as usize, tag, qp).unwrap();
                    assert!(
                        (got - want).abs() <= 1e-13 * want.abs().max(1e-3),
                        "k={k} l={l} q={qn}/{qd}: {got} vs {want}"
                    );
                }
            }
        }
    }
}

#[test]
fn bracket_limit_at_unit_q_is_continuous() {
    for (k, l) in [(1, 1), (2, 2), (3, 1), (4, 4)] {
        let at = |q: f64| hyp2f1_terminating(k, l, HalfInteger::Half, QParameter::new(q).unwrap()).unwrap();
        let (a, b, c) = (at(1.0), at(1.0 + 1e-9), at(1.0 + 1e-6));
        assert!((a - b).abs() < 1e-6 * a.max(1.0), "({k}, {l})");
        assert!((b - c).abs() < 1e-4 * a.max(1.0), "({k}, {l})");
    }
}

/// Amplitudes `d[m][n]` from the two-term recurrences of the squeezing
/// matrix elements; `P = √(2/(Q+1)) d²`.
fn recurrence_table(q: f64, size: usize) -> Vec<Vec<f64>> {
    let a = ((q - 1.0) / (q + 1.0)).sqrt();
    let b = 2.0 * 2f64.sqrt() / (q + 1.0).sqrt();
    let mut d = vec![vec![0.0; size]; size];
    d[0][0] = 1.0;
    for m in 1..size - 1 {
        d[m + 1][0] = -a * (m as f64).sqrt() * d[m - 1][0] / ((m + 1) as f64).sqrt();
    }
    for n in 0..size - 1 {
        for m in 0..size {
            let from_n = if n >= 1 { a * (n as f64).sqrt() * d[m][n - 1] } else { 0.0 };
            let from_m = if m >= 1 { 0.5 * b * (m as f64).sqrt() * d[m - 1][n] } else { 0.0 };
            d[m][n + 1] = (from_n + from_m) / ((n + 1) as f64).sqrt();
        }
    }
    let scale = (2.0 / (q + 1.0)).sqrt();
    d.iter()
        .map(|row| row.iter().map(|x| scale * x * x).collect())
        .collect()
}

#[test]
fn closed_forms_match_amplitude_recurrence() {
    for q in [1.0, 1.2, 2.0, 3.0, 6.0] {
        let table = probability_table(QParameter::new(q).unwrap(), 40).unwrap();
        let other = recurrence_table(q, 41);
        for m in 0..=40 {
            for n in 0..=40 {
                let (a, b) = (table.get(m, n), other[m][n]);
                assert!((a - b).abs() < 1e-10, "Q={q} ({m}, {n}): {a} vs {b}");
            }
        }
    }
}

#[test]
fn generating_function_reproduces_table_coefficients() {
    // coefficient extraction by a double series with geometric weights
    for q in [1.0, 1.5, 2.0, 5.0] {
        let qp = QParameter::new(q).unwrap();
        let table = probability_table(qp, 128).unwrap();
        for &(u, v) in &[(0.1, 0.2), (-0.5, 0.3), (0.7, -0.7), (0.0, 0.6), (0.45, 0.45)] {
            let mut series = 0.0;
            for n in (0..=128).rev() {
                for m in (0..=128).rev() {
                    series += f64::powi(u, n) * f64::powi(v, m as i32) * table.get(m, n as usize);
                }
            }
            let closed = generating_function(qp, u, v).unwrap();
            assert!((series - closed).abs() < 1e-8, "Q={q} u={u} v={v}");
        }
    }
}

#[test]
fn mean_from_table_at_schedule_q() {
    use qpo_core::transition::{mean_quantum_number, probability_table_at};
    let s = make_cubic_schedule(0.0, 0.5, 2.0, 4.0).unwrap();
    for t in [0.1, 0.25, 0.4] {
        let table = probability_table_at(&s, t, 80).unwrap();
        let want = mean_quantum_number(table.q, 2).unwrap();
        assert!((table.mean_m[2] - want).abs() < 1e-6);
    }
}
