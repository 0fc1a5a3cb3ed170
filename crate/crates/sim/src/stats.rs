//! Friedman rank test over paired conditions with Wilcoxon signed-rank
//! post-hoc comparisons.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Result, SimError};

/// Largest sample for which the signed-rank null distribution is enumerated.
pub const WILCOXON_EXACT_MAX_N: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseOutcome {
    pub a: usize,
    pub b: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    /// Pairs with a nonzero difference.
    pub n: usize,
    pub p_value: f64,
    /// Bonferroni-adjusted, capped at 1.
    pub p_adjusted: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanOutcome {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub pairwise: Vec<PairwiseOutcome>,
}

/// Ranks starting at 1; tied values share the mean of their ranks.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

fn check_matrix(matrix: &[Vec<f64>]) -> Result<usize> {
    let k = matrix.first().map_or(0, Vec::len);
    if matrix.len() < 2 || k < 2 {
        return Err(SimError::Stats(format!(
            "need at least 2 rows and 2 conditions, got {} x {k}",
            matrix.len()
        )));
    }
    if matrix.iter().any(|r| r.len() != k) {
        return Err(SimError::Stats("rows differ in length".into()));
    }
    if matrix.iter().flatten().any(|v| !v.is_finite()) {
        return Err(SimError::Stats("non-finite value".into()));
    }
    Ok(k)
}

/// Friedman chi-square with the tie correction. A matrix whose rows are all
/// constant carries no rank information and yields statistic 0, p = 1.
pub fn friedman_statistic(matrix: &[Vec<f64>]) -> Result<f64> {
    let k = check_matrix(matrix)?;
    let n = matrix.len() as f64;
    let kf = k as f64;
    let mut rank_sums = vec![0.0; k];
    let mut sum_sq = 0.0;
    for row in matrix {
        for (j, r) in average_ranks(row).into_iter().enumerate() {
            rank_sums[j] += r;
            sum_sq += r * r;
        }
    }
    let center = n * (kf + 1.0) / 2.0;
    let spread: f64 = rank_sums.iter().map(|r| (r - center).powi(2)).sum();
    let denom = sum_sq - n * kf * (kf + 1.0).powi(2) / 4.0;
    if denom <= 1e-12 {
        return Ok(0.0);
    }
    Ok((kf - 1.0) * spread / denom)
}

/// Two-sided signed-rank test of `a` against `b` (paired).
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<(f64, f64, usize, f64)> {
    if a.len() != b.len() {
        return Err(SimError::Stats("paired samples differ in length".into()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return Ok((0.0, 0.0, 0, 1.0));
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;
    let tied = ranks.iter().any(|r| r.fract() != 0.0) || {
        let mut s = abs.clone();
        s.sort_by(f64::total_cmp);
        s.windows(2).any(|w| w[0] == w[1])
    };
    let p = if !tied && n <= WILCOXON_EXACT_MAX_N {
        exact_signed_rank_p(n, w_plus.min(w_minus).round() as usize)
    } else {
        normal_signed_rank_p(&abs, n, w_plus)
    };
    Ok((w_plus, w_minus, n, p))
}

/// P(W <= w) doubled, with W the signed-rank statistic of `n` untied pairs.
fn exact_signed_rank_p(n: usize, w: usize) -> f64 {
    let max = n * (n + 1) / 2;
    let mut counts = vec![0f64; max + 1];
    counts[0] = 1.0;
    for r in 1..=n {
        for s in (r..=max).rev() {
            counts[s] += counts[s - r];
        }
    }
    let tail: f64 = counts[..=w].iter().sum();
    (2.0 * tail / 2f64.powi(n as i32)).min(1.0)
}

fn normal_signed_rank_p(abs: &[f64], n: usize, w_plus: f64) -> f64 {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let mut sorted = abs.to_vec();
    sorted.sort_by(f64::total_cmp);
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
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::standard();
    (2.0 * (1.0 - normal.cdf(z))).min(1.0)
}

/// Friedman test plus all pairwise Wilcoxon tests at level `alpha`,
/// Bonferroni-corrected over the k(k-1)/2 pairs.
pub fn friedman_test(matrix: &[Vec<f64>], alpha: f64) -> Result<FriedmanOutcome> {
    let k = check_matrix(matrix)?;
    let statistic = friedman_statistic(matrix)?;
    let df = k - 1;
    let p_value = if statistic == 0.0 {
        1.0
    } else {
        let chi = ChiSquared::new(df as f64).map_err(|e| SimError::Stats(e.to_string()))?;
        1.0 - chi.cdf(statistic)
    };
    let pairs = k * (k - 1) / 2;
    let mut pairwise = Vec::with_capacity(pairs);
    for a in 0..k {
        for b in a + 1..k {
            let xa: Vec<f64> = matrix.iter().map(|r| r[a]).collect();
            let xb: Vec<f64> = matrix.iter().map(|r| r[b]).collect();
            let (w_plus, w_minus, n, p) = wilcoxon_signed_rank(&xa, &xb)?;
            let p_adjusted = (p * pairs as f64).min(1.0);
            pairwise.push(PairwiseOutcome {
                a,
                b,
                w_plus,
                w_minus,
                n,
                p_value: p,
                p_adjusted,
                significant: statistic > 0.0 && p_adjusted < alpha,
            });
        }
    }
    Ok(FriedmanOutcome {
        statistic,
        df,
        p_value,
        pairwise,
    })
}
