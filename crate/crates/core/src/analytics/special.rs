//! Distribution tails built on `statrs` special functions.

use statrs::function::{beta, erf};

/// Regularized incomplete beta `I_x(a, b)`.
pub fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        beta::beta_reg(a, b, x)
    }
}

/// `P(F > f)` for an F distribution with `(d1, d2)` degrees of freedom.
pub fn f_upper_tail(f: f64, d1: f64, d2: f64) -> f64 {
    if f.is_nan() {
        return f64::NAN;
    }
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    inc_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))
}

/// Two-sided Student t tail `P(|T| > |t|)`.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    inc_beta(df / 2.0, 0.5, df / (df + t * t))
}

/// Two-sided standard normal tail `P(|Z| > |z|)`.
pub fn normal_two_sided(z: f64) -> f64 {
    erf::erfc(z.abs() / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: u32, k: u32) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    // I_x(a, b) for integer a, b equals a binomial tail.
    fn inc_beta_binomial(a: u32, b: u32, x: f64) -> f64 {
        let n = a + b - 1;
        (a..=n)
            .map(|j| binom(n, j) * x.powi(j as i32) * (1.0 - x).powi((n - j) as i32))
            .sum()
    }

    // Maclaurin series of erf, accurate for moderate |x|.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            term *= -x * x / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        sum * 2.0 / std::f64::consts::PI.sqrt()
    }

    #[test]
    fn inc_beta_matches_binomial_identity() {
        for a in 1..8 {
            for b in 1..8 {
                for i in 1..20 {
                    let x = i as f64 / 20.0;
                    let got = inc_beta(a as f64, b as f64, x);
                    let want = inc_beta_binomial(a, b, x);
                    assert!((got - want).abs() < 1e-10, "a={a} b={b} x={x}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn normal_tail_matches_series() {
        for i in 0..=30 {
            let z = i as f64 * 0.1;
            let want = 1.0 - erf_series(z / std::f64::consts::SQRT_2);
            assert!((normal_two_sided(z) - want).abs() < 1e-10, "z={z}");
            assert_eq!(normal_two_sided(-z), normal_two_sided(z));
        }
    }

    #[test]
    fn f_tail_equals_t_tail_for_one_numerator_df() {
        // F(1, d) = T(d)^2, and for df 2 the t tail is 1 - t / sqrt(2 + t^2).
        let p = f_upper_tail(8.0, 1.0, 2.0);
        assert!((p - (1.0 - 8f64.sqrt() / 10f64.sqrt())).abs() < 1e-12);
        for d in [2.0, 5.0, 30.0] {
            for t in [0.3, 1.0, 2.5] {
                assert!((f_upper_tail(t * t, 1.0, d) - t_two_sided(t, d)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn f_tail_edges() {
        assert_eq!(f_upper_tail(0.0, 3.0, 10.0), 1.0);
        assert_eq!(f_upper_tail(f64::INFINITY, 3.0, 10.0), 0.0);
    }
}
