use serde::{Deserialize, Serialize};

use super::ScoringError;

/// Two-way random-effects, average-measures, absolute-agreement ICC with the
/// ANOVA mean squares it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Icc {
    pub value: f64,
    pub subjects: usize,
    pub raters: usize,
    pub ms_rows: f64,
    pub ms_cols: f64,
    pub ms_error: f64,
    /// Set when the ratio is undefined (constant matrix, or a non-positive
    /// denominator); `value` is then 0 by convention.
    pub degenerate: bool,
}

/// ICC(2,k) over a subjects × raters matrix.
///
/// `(MSR - MSE) / (MSR + (MSC - MSE) / n)`. A matrix for which the
/// denominator is not positive (every constant matrix, and a handful of
/// pathological ones) returns 0 with `degenerate` set instead of erroring.
pub fn icc_2k(matrix: &[Vec<f64>]) -> Result<Icc, ScoringError> {
    let n = matrix.len();
    if n < 2 {
        return Err(ScoringError::TooFewSamples { need: 2, got: n });
    }
    let k = matrix[0].len();
    if k < 2 {
        return Err(ScoringError::TooFewSamples { need: 2, got: k });
    }
    for row in matrix {
        if row.len() != k {
            return Err(ScoringError::LengthMismatch {
                left: k,
                right: row.len(),
            });
        }
        if let Some(x) = row.iter().find(|x| !x.is_finite()) {
            return Err(ScoringError::InvalidRating(format!("non-finite cell {x}")));
        }
    }

    let (nf, kf) = (n as f64, k as f64);
    let grand = matrix.iter().flatten().sum::<f64>() / (nf * kf);
    let row_means: Vec<f64> = matrix.iter().map(|r| r.iter().sum::<f64>() / kf).collect();
    let col_means: Vec<f64> = (0..k).map(|j| matrix.iter().map(|r| r[j]).sum::<f64>() / nf).collect();

    let ss_rows = kf * row_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_cols = nf * col_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_error: f64 = matrix
        .iter()
        .zip(&row_means)
        .flat_map(|(row, rm)| {
            row.iter()
                .zip(&col_means)
                .map(move |(x, cm)| (x - rm - cm + grand).powi(2))
        })
        .sum();

    let ms_rows = ss_rows / (nf - 1.0);
    let ms_cols = ss_cols / (kf - 1.0);
    let ms_error = ss_error / ((nf - 1.0) * (kf - 1.0));

    let denom = ms_rows + (ms_cols - ms_error) / nf;
    let scale = ms_rows.max(ms_cols).max(ms_error);
    // Rounding noise in the sums of squares grows with the grand mean, so a
    // shifted constant matrix must still read as constant.
    let noise_floor = 1e-20 * (1.0 + grand * grand);
    // Written negated so a NaN denominator also counts as degenerate.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    let degenerate = scale <= noise_floor || !(denom > scale * 1e-12);
    let value = if degenerate {
        0.0
    } else {
        ((ms_rows - ms_error) / denom).min(1.0)
    };
    Ok(Icc {
        value,
        subjects: n,
        raters: k,
        ms_rows,
        ms_cols,
        ms_error,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn four_by_two_fixture() {
        // MSR = 3.5, MSC = 0.5, MSE = 1/6 from a hand ANOVA table.
        let icc = icc_2k(&m(&[&[1., 2.], &[3., 3.], &[4., 5.], &[2., 2.]])).unwrap();
        assert!((icc.ms_rows - 3.5).abs() < 1e-12);
        assert!((icc.ms_cols - 0.5).abs() < 1e-12);
        assert!((icc.ms_error - 1.0 / 6.0).abs() < 1e-12);
        assert!((icc.value - 0.9302325581395349).abs() < 1e-12);
        assert!(!icc.degenerate);
    }

    #[test]
    fn identical_raters_give_one() {
        let icc = icc_2k(&m(&[&[1., 1.], &[3., 3.], &[2., 2.], &[5., 5.]])).unwrap();
        assert_eq!(icc.value, 1.0);
    }

    #[test]
    fn constant_matrix_is_degenerate_zero() {
        let icc = icc_2k(&m(&[&[3., 3.], &[3., 3.], &[3., 3.]])).unwrap();
        assert_eq!(icc.value, 0.0);
        assert!(icc.degenerate);
    }

    #[test]
    fn balanced_disagreement_is_degenerate() {
        // Row and column means are all equal; only the error term is non-zero.
        let icc = icc_2k(&m(&[&[1., 2.], &[2., 1.]])).unwrap();
        assert!(icc.degenerate);
        assert_eq!(icc.value, 0.0);
    }

    #[test]
    fn shape_errors() {
        assert_eq!(icc_2k(&m(&[&[1., 2.]])).unwrap_err().code(), "TooFewSamples");
        assert_eq!(icc_2k(&m(&[&[1.], &[2.]])).unwrap_err().code(), "TooFewSamples");
        assert_eq!(icc_2k(&m(&[&[1., 2.], &[1.]])).unwrap_err().code(), "LengthMismatch");
    }

    fn matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (2usize..6, 2usize..12).prop_flat_map(|(k, n)| {
            prop::collection::vec(prop::collection::vec(1u8..=5, k), n).prop_map(|rows| {
                rows.into_iter()
                    .map(|r| r.into_iter().map(f64::from).collect())
                    .collect()
            })
        })
    }

    proptest! {
        #[test]
        fn never_exceeds_one(mat in matrix()) {
            let icc = icc_2k(&mat).unwrap();
            prop_assert!(icc.value <= 1.0);
        }

        #[test]
        fn shift_invariant(mat in matrix(), c in -10.0f64..10.0) {
            let a = icc_2k(&mat).unwrap();
            let shifted: Vec<Vec<f64>> =
                mat.iter().map(|r| r.iter().map(|x| x + c).collect()).collect();
            let b = icc_2k(&shifted).unwrap();
            prop_assert_eq!(a.degenerate, b.degenerate);
            prop_assert!((a.value - b.value).abs() < 1e-9);
        }
    }
}
