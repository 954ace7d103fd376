use statrs::function::beta::beta_reg;

use super::{mean, sample_variance, ScoringError, TestResult};

/// Welch's unequal-variance t-test, two-sided.
///
/// Degrees of freedom follow Welch–Satterthwaite; the p-value is the Student-t
/// tail expressed through the regularized incomplete beta function.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<TestResult, ScoringError> {
    for s in [a, b] {
        if s.len() < 2 {
            return Err(ScoringError::TooFewSamples { need: 2, got: s.len() });
        }
        if s.iter().any(|x| !x.is_finite()) {
            return Err(ScoringError::InvalidRating("non-finite sample".into()));
        }
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (sample_variance(a) / na, sample_variance(b) / nb);
    if va == 0.0 && vb == 0.0 {
        return Err(ScoringError::BothConstant);
    }
    let se2 = va + vb;
    let t = (mean(a) - mean(b)) / se2.sqrt();
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    Ok(TestResult {
        statistic: t,
        p_value: student_t_two_sided(t, df),
        corrected_p: None,
        n: vec![a.len(), b.len()],
        df: Some(df),
    })
}

/// `P(|T| >= |t|)` for a Student-t variable with `df` degrees of freedom.
pub(crate) fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let x = df / (df + t * t);
    beta_reg(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Two-sided tail by Simpson integration of the t density, used as an
    /// independent check of the incomplete-beta route.
    fn simpson_tail(t: f64, df: f64) -> f64 {
        let ln_c = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
        let dens = |x: f64| (ln_c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp();
        let steps = 200_000;
        let h = t.abs() / steps as f64;
        let mut s = dens(0.0) + dens(t.abs());
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * dens(i as f64 * h);
        }
        1.0 - 2.0 * s * h / 3.0
    }

    fn ln_gamma(x: f64) -> f64 {
        statrs::function::gamma::ln_gamma(x)
    }

    #[test]
    fn textbook_fixture() {
        // Means differ by 1, both variances 5/3, n = 4:
        // t = -1 / sqrt(2 * (5/3) / 4) and df = 6.
        let r = welch_t(&[1., 2., 3., 4.], &[2., 3., 4., 5.]).unwrap();
        let expected_t = -1.0 / (2.0 * (5.0 / 3.0) / 4.0f64).sqrt();
        assert!((r.statistic - expected_t).abs() < 1e-12);
        assert!((r.df.unwrap() - 6.0).abs() < 1e-12);
        assert!((r.p_value - simpson_tail(expected_t, 6.0)).abs() < 1e-10);
        assert!((r.p_value - 0.3153335962012296).abs() < 1e-10);
    }

    #[test]
    fn identical_samples() {
        let a = [2.0, 3.5, 1.0, 4.0];
        let r = welch_t(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn errors() {
        assert_eq!(welch_t(&[1.0], &[1.0, 2.0]).unwrap_err().code(), "TooFewSamples");
        assert_eq!(welch_t(&[1.0, 1.0], &[2.0, 2.0]).unwrap_err().code(), "BothConstant");
        assert!(welch_t(&[1.0, 1.0], &[2.0, 3.0]).is_ok());
    }

    #[test]
    fn tail_matches_simpson_for_fractional_df() {
        for (t, df) in [(0.3, 2.5), (1.7, 7.3), (-2.9, 11.2), (4.0, 3.0)] {
            assert!((student_t_two_sided(t, df) - simpson_tail(t, df)).abs() < 1e-9);
        }
    }

    fn sample() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(1.0f64..5.0, 2..15)
    }

    proptest! {
        #[test]
        fn antisymmetric(a in sample(), b in sample()) {
            let ab = welch_t(&a, &b).unwrap();
            let ba = welch_t(&b, &a).unwrap();
            prop_assert!((ab.statistic + ba.statistic).abs() < 1e-12);
            prop_assert!((ab.p_value - ba.p_value).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&ab.p_value));
        }

        #[test]
        fn scale_invariant(a in sample(), b in sample(), c in 0.1f64..10.0) {
            let r = welch_t(&a, &b).unwrap();
            let sa: Vec<f64> = a.iter().map(|x| x * c).collect();
            let sb: Vec<f64> = b.iter().map(|x| x * c).collect();
            let s = welch_t(&sa, &sb).unwrap();
            prop_assert!((r.statistic - s.statistic).abs() <= 1e-12 * r.statistic.abs().max(1.0));
        }
    }
}
