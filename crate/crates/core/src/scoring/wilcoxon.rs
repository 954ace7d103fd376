use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::{bonferroni, ScoringError, TestResult};

/// Largest number of non-zero differences for which the exact null
/// distribution is used.
pub const EXACT_MAX_N: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// `statistic` is `W = min(W+, W-)`.
    #[serde(flatten)]
    pub result: TestResult,
    pub w_plus: f64,
    pub w_minus: f64,
    pub exact: bool,
}

/// Average ranks of `|d|` for the non-zero differences, paired with the sign
/// of each difference. Zero differences are dropped.
pub fn signed_ranks(diffs: &[f64]) -> Vec<(f64, bool)> {
    let mut nz: Vec<(f64, bool)> = diffs
        .iter()
        .filter(|d| **d != 0.0)
        .map(|d| (d.abs(), *d > 0.0))
        .collect();
    nz.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ranked = Vec::with_capacity(nz.len());
    let mut i = 0;
    while i < nz.len() {
        let mut j = i;
        while j + 1 < nz.len() && nz[j + 1].0 == nz[i].0 {
            j += 1;
        }
        // Ranks i+1 ..= j+1 share their mean.
        let rank = (i + j + 2) as f64 / 2.0;
        ranked.extend(nz[i..=j].iter().map(|&(_, pos)| (rank, pos)));
        i = j + 1;
    }
    ranked
}

/// Two-sided Wilcoxon signed-rank test on paired samples, with a Bonferroni
/// correction for `m_comparisons`.
///
/// Zero differences are dropped. Up to [`EXACT_MAX_N`] remaining pairs the
/// p-value is exact; beyond that a tie-corrected normal approximation is used.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], m_comparisons: usize) -> Result<WilcoxonResult, ScoringError> {
    if a.len() != b.len() {
        return Err(ScoringError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(ScoringError::InvalidRating("non-finite sample".into()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let ranked = signed_ranks(&diffs);
    if ranked.is_empty() {
        return Err(ScoringError::AllZeroDifferences);
    }
    let n = ranked.len();
    // Folded from +0.0: an empty f64 sum is -0.0.
    let w_plus = ranked.iter().filter(|r| r.1).fold(0.0, |s, r| s + r.0);
    let w_minus = ranked.iter().filter(|r| !r.1).fold(0.0, |s, r| s + r.0);
    let w = w_plus.min(w_minus);
    let ranks: Vec<f64> = ranked.iter().map(|r| r.0).collect();
    let exact = n <= EXACT_MAX_N;
    let p = if exact {
        exact_p_value(&ranks, w)
    } else {
        normal_p_value(&ranks, w)
    };
    Ok(WilcoxonResult {
        result: TestResult {
            statistic: w,
            p_value: p,
            corrected_p: Some(bonferroni(p, m_comparisons)),
            n: vec![n],
            df: None,
        },
        w_plus,
        w_minus,
        exact,
    })
}

/// Exact two-sided p: the share of the `2^n` sign assignments whose
/// `min(W+, W-)` is at most `w`.
///
/// Average ranks are multiples of 1/2, so doubled ranks are integers and the
/// null distribution of doubled `W+` is counted by subset-sum dynamic
/// programming instead of visiting every assignment.
pub fn exact_p_value(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0f64; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let w2 = (w * 2.0).round() as usize;
    let hits: f64 = counts
        .iter()
        .enumerate()
        .filter(|(s, _)| (*s).min(total - s) <= w2)
        .map(|(_, c)| c)
        .sum();
    (hits / 2f64.powi(ranks.len() as i32)).min(1.0)
}

/// Normal-approximation two-sided p with the tie correction to the variance
/// and a 0.5 continuity correction toward the mean.
pub fn normal_p_value(ranks: &[f64], w: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|r| **r == sorted[i]).count();
        let t = j as f64;
        tie_term += t * t * t - t;
        i += j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = (w - mean + 0.5).min(0.0) / var.sqrt();
    erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Visits every sign assignment.
    fn brute_p(ranks: &[f64], w: f64) -> f64 {
        let n = ranks.len();
        let total: f64 = ranks.iter().sum();
        let mut hits = 0u64;
        for mask in 0u32..(1 << n) {
            let plus: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| ranks[i]).sum();
            if plus.min(total - plus) <= w + 1e-9 {
                hits += 1;
            }
        }
        hits as f64 / (1u64 << n) as f64
    }

    #[test]
    fn six_pair_fixture() {
        // Ranks 1..6; negatives hold ranks 2 and 4, so W- = 6 and W+ = 15.
        // Enumeration: 28 of 64 assignments have min(W+, W-) <= 6.
        let a = [1.0, -2.0, 3.0, -4.0, 5.0, 6.0];
        let r = wilcoxon_signed_rank(&a, &[0.0; 6], 1).unwrap();
        assert_eq!(r.w_plus, 15.0);
        assert_eq!(r.w_minus, 6.0);
        assert_eq!(r.result.statistic, 6.0);
        assert!(r.exact);
        assert_eq!(r.result.p_value, 28.0 / 64.0);
        assert_eq!(brute_p(&[1., 2., 3., 4., 5., 6.], 6.0), 28.0 / 64.0);
    }

    #[test]
    fn average_ranks_for_ties() {
        let r = signed_ranks(&[2.0, -2.0, 1.0, 0.0, 3.0]);
        assert_eq!(r, vec![(1.0, true), (2.5, true), (2.5, false), (4.0, true)]);
    }

    #[test]
    fn zero_differences_and_shapes() {
        assert_eq!(
            wilcoxon_signed_rank(&[1., 2.], &[1., 2.], 1).unwrap_err().code(),
            "AllZeroDifferences"
        );
        assert_eq!(
            wilcoxon_signed_rank(&[1.], &[1., 2.], 1).unwrap_err().code(),
            "LengthMismatch"
        );
    }

    #[test]
    fn bonferroni_applied() {
        let r = wilcoxon_signed_rank(&[1., 2., 3.], &[0., 0., 0.], 3).unwrap();
        // All positive: only the all-plus and all-minus patterns reach W = 0.
        assert_eq!(r.result.p_value, 0.25);
        assert_eq!(r.result.corrected_p, Some(0.75));
    }

    #[test]
    fn large_n_uses_normal_approximation() {
        let a: Vec<f64> = (1..=20).map(f64::from).collect();
        let b: Vec<f64> = (1..=20)
            .map(|i| if i % 3 == 0 { i as f64 + 0.5 } else { i as f64 - 0.5 })
            .collect();
        let r = wilcoxon_signed_rank(&a, &b, 1).unwrap();
        assert!(!r.exact);
        assert!((0.0..=1.0).contains(&r.result.p_value));
    }

    proptest! {
        #[test]
        fn normal_tracks_exact_at_twelve(signs in prop::collection::vec(any::<bool>(), 12)) {
            let d: Vec<f64> = signs
                .iter()
                .enumerate()
                .map(|(i, pos)| if *pos { i as f64 + 1.0 } else { -(i as f64) - 1.0 })
                .collect();
            let ranked = signed_ranks(&d);
            let ranks: Vec<f64> = ranked.iter().map(|r| r.0).collect();
            let wp: f64 = ranked.iter().filter(|r| r.1).map(|r| r.0).sum();
            let w = wp.min(78.0 - wp);
            prop_assert!((exact_p_value(&ranks, w) - normal_p_value(&ranks, w)).abs() < 0.05);
        }
    }

    fn diffs(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec((-4i32..=4).prop_map(f64::from), 1..=max_n)
    }

    proptest! {
        #[test]
        fn exact_matches_enumeration(d in diffs(12)) {
            let ranked = signed_ranks(&d);
            prop_assume!(!ranked.is_empty());
            let ranks: Vec<f64> = ranked.iter().map(|r| r.0).collect();
            let wp: f64 = ranked.iter().filter(|r| r.1).map(|r| r.0).sum();
            let w = wp.min(ranks.iter().sum::<f64>() - wp);
            prop_assert!((exact_p_value(&ranks, w) - brute_p(&ranks, w)).abs() < 1e-12);
        }

        #[test]
        fn rank_sum_identity(d in diffs(40)) {
            let zeros = vec![0.0; d.len()];
            if let Ok(r) = wilcoxon_signed_rank(&d, &zeros, 1) {
                let n = r.result.n[0] as f64;
                prop_assert_eq!(r.w_plus + r.w_minus, n * (n + 1.0) / 2.0);
            }
        }

        #[test]
        fn shift_of_both_samples_keeps_w(
            a in prop::collection::vec((0i32..10).prop_map(f64::from), 3..20),
            off in (-5i32..5).prop_map(f64::from),
        ) {
            let b: Vec<f64> = a.iter().enumerate().map(|(i, x)| x + (i % 4) as f64 - 1.5).collect();
            let r = wilcoxon_signed_rank(&a, &b, 1).unwrap();
            // Shift each pair by a common per-pair offset: differences are kept.
            let a2: Vec<f64> = a.iter().map(|x| x + off).collect();
            let b2: Vec<f64> = b.iter().map(|x| x + off).collect();
            let s = wilcoxon_signed_rank(&a2, &b2, 1).unwrap();
            prop_assert_eq!(r.result.n, s.result.n);
            prop_assert!((r.result.statistic - s.result.statistic).abs() < 1e-9);
        }
    }
}
