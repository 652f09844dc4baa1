//! One-sided Wilcoxon signed-rank test.

use crate::error::{Error, Result};

/// P-value of the one-sided Wilcoxon signed-rank test with alternative
/// "a tends to be greater than b".
///
/// Zero differences are dropped; ties in |difference| receive average ranks.
/// With at most 12 non-zero pairs the null distribution is exact (all 2ⁿ
/// sign patterns enumerated); above that a normal approximation with tie
/// correction is used. All differences zero means no evidence either way and
/// reports p = 1.
pub fn wilcoxon_one_sided(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::invalid("wilcoxon needs at least one pair"));
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::numeric("non-finite difference in wilcoxon input"));
    }
    if diffs.is_empty() {
        return Ok(1.0);
    }

    let n = diffs.len();
    let ranks = average_ranks(&diffs);
    let w_plus: f64 = ranks
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| *r)
        .sum();

    if n <= 12 {
        Ok(exact_p(&ranks, w_plus))
    } else {
        Ok(normal_p(&ranks, w_plus))
    }
}

/// Ranks of |d| (1-based), averaging over ties.
fn average_ranks(diffs: &[f64]) -> Vec<f64> {
    let n = diffs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diffs[i].abs().partial_cmp(&diffs[j].abs()).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && diffs[order[j + 1]].abs() == diffs[order[i]].abs() {
            j += 1;
        }
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// P(W⁺ ≥ w_obs) under the exact null: every sign pattern equally likely.
fn exact_p(ranks: &[f64], w_obs: f64) -> f64 {
    let n = ranks.len();
    let total = 1u64 << n;
    let mut at_least = 0u64;
    for pattern in 0..total {
        let mut w = 0.0;
        for (i, r) in ranks.iter().enumerate() {
            if pattern & (1 << i) != 0 {
                w += r;
            }
        }
        if w >= w_obs - 1e-9 {
            at_least += 1;
        }
    }
    at_least as f64 / total as f64
}

/// Normal approximation with tie correction on the variance.
fn normal_p(ranks: &[f64], w_obs: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    // Tie correction: each group of t tied ranks removes (t³ − t)/48.
    let mut sorted = ranks.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = (w_obs - mean) / var.sqrt();
    0.5 * statrs::function::erf::erfc(z / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Independent oracle: recursive enumeration over sign patterns, with
    /// its own rank computation.
    fn oracle_exact(a: &[f64], b: &[f64]) -> f64 {
        let diffs: Vec<f64> = a
            .iter()
            .zip(b)
            .map(|(x, y)| x - y)
            .filter(|d| *d != 0.0)
            .collect();
        if diffs.is_empty() {
            return 1.0;
        }
        let n = diffs.len();
        let mut pairs: Vec<(f64, usize)> = diffs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.abs(), i))
            .collect();
        pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut ranks = vec![0.0; n];
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && pairs[j + 1].0 == pairs[i].0 {
                j += 1;
            }
            for k in i..=j {
                ranks[pairs[k].1] = (i + j + 2) as f64 / 2.0;
            }
            i = j + 1;
        }
        let w_obs: f64 = (0..n).filter(|&i| diffs[i] > 0.0).map(|i| ranks[i]).sum();

        fn count(ranks: &[f64], idx: usize, w: f64, w_obs: f64) -> u64 {
            if idx == ranks.len() {
                return u64::from(w >= w_obs - 1e-9);
            }
            count(ranks, idx + 1, w, w_obs) + count(ranks, idx + 1, w + ranks[idx], w_obs)
        }
        count(&ranks, 0, 0.0, w_obs) as f64 / (1u64 << n) as f64
    }

    #[test]
    fn all_greater_n6_gives_one_over_sixty_four() {
        let a = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        let b = [1.0, 1.5, 2.0, 2.5, 3.0, 3.5];
        let p = wilcoxon_one_sided(&a, &b).unwrap();
        assert_abs_diff_eq!(p, 1.0 / 64.0, epsilon = 1e-15);
    }

    #[test]
    fn identical_samples_give_p_one() {
        let a = [0.4, 0.5, 0.6, 0.7, 0.8];
        let p = wilcoxon_one_sided(&a, &a).unwrap();
        assert_abs_diff_eq!(p, 1.0, epsilon = 0.0);
    }

    #[test]
    fn eight_pair_example_matches_enumeration_oracle() {
        // Paired scores with one tie in |difference| and a sign mix.
        let a = [125.0, 115.0, 130.0, 140.0, 140.0, 115.0, 140.0, 125.0];
        let b = [110.0, 122.0, 125.0, 120.0, 140.0 - 7.0, 124.0, 123.0, 137.0];
        let p = wilcoxon_one_sided(&a, &b).unwrap();
        let want = oracle_exact(&a, &b);
        assert_abs_diff_eq!(p, want, epsilon = 0.0);
    }

    #[test]
    fn random_small_samples_match_oracle_exactly() {
        use rand::Rng;
        let mut rng = crate::rng::seeded(55);
        for _ in 0..200 {
            let n = rng.random_range(1..=12);
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            let b: Vec<f64> = (0..n)
                .map(|i| {
                    if rng.random::<bool>() {
                        a[i]
                    } else {
                        rng.random_range(0.0..1.0)
                    }
                })
                .collect();
            let p = wilcoxon_one_sided(&a, &b).unwrap();
            let want = oracle_exact(&a, &b);
            assert_abs_diff_eq!(p, want, epsilon = 0.0);
        }
    }

    #[test]
    fn large_sample_normal_branch_is_sane() {
        // 30 pairs strongly favoring a: the approximation must report a
        // small p; the reversed direction must report a large one.
        let a: Vec<f64> = (0..30).map(|i| 1.0 + i as f64 * 0.01).collect();
        let b: Vec<f64> = (0..30).map(|i| 0.5 + i as f64 * 0.008).collect();
        let p = wilcoxon_one_sided(&a, &b).unwrap();
        assert!(p < 1e-4, "p = {p}");
        let reversed = wilcoxon_one_sided(&b, &a).unwrap();
        assert!(reversed > 0.999, "p = {reversed}");
    }

    #[test]
    fn rejects_mismatched_lengths() {
        assert!(wilcoxon_one_sided(&[1.0], &[1.0, 2.0]).is_err());
        assert!(wilcoxon_one_sided(&[], &[]).is_err());
    }
}
