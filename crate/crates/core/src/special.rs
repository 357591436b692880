//! Special functions backing the Student-t tail probabilities.

pub use statrs::function::beta::beta_reg as regularized_incomplete_beta;
pub use statrs::function::gamma::ln_gamma;

/// Two-sided tail probability `P(|T| >= |t|)` for Student's t with `df`
/// degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_nan() || df.is_nan() || df <= 0.0 {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    regularized_incomplete_beta(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

/// Student-t CDF.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    let tail = 0.5 * student_t_two_sided(t, df);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-14);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5) - PI.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(10.5) - 13.940_625_219_403_763).abs() < 1e-12);
    }

    #[test]
    fn beta_symmetry_and_closed_forms() {
        // I_x(1, 1) = x; I_x(a, b) = 1 - I_{1-x}(b, a)
        assert!((regularized_incomplete_beta(1.0, 1.0, 0.3) - 0.3).abs() < 1e-14);
        let lhs = regularized_incomplete_beta(2.5, 7.0, 0.2);
        let rhs = 1.0 - regularized_incomplete_beta(7.0, 2.5, 0.8);
        assert!((lhs - rhs).abs() < 1e-14);
        // I_x(a, 1) = x^a
        assert!((regularized_incomplete_beta(3.0, 1.0, 0.7) - 0.7f64.powi(3)).abs() < 1e-14);
    }

    #[test]
    fn t_one_df_is_cauchy() {
        for t in [-3.0f64, -0.5, 0.0, 1.0, 7.5] {
            let cauchy = 0.5 + t.atan() / PI;
            assert!((student_t_cdf(t, 1.0) - cauchy).abs() < 1e-13, "t={t}");
        }
    }

    #[test]
    fn t_two_df_closed_form() {
        // F(t) = 1/2 + t / (2 sqrt(2 + t^2))
        for t in [-4.0f64, -1.0, 0.3, 2.0] {
            let exact = 0.5 + t / (2.0 * (2.0 + t * t).sqrt());
            assert!((student_t_cdf(t, 2.0) - exact).abs() < 1e-13, "t={t}");
        }
    }

    #[test]
    fn zero_statistic_has_unit_p() {
        assert_eq!(student_t_two_sided(0.0, 5.0), 1.0);
        assert_eq!(student_t_two_sided(f64::INFINITY, 5.0), 0.0);
    }
}
