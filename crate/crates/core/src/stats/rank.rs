//! Two-sample rank tests: Wilcoxon–Mann–Whitney and van der Waerden normal
//! scores. Both work on a tally of the pooled sample by distinct value, so
//! heavily tied categorical data costs O(categories) after tallying.

use statrs::distribution::ContinuousCDF;

use super::{check_alpha, std_normal, two_sided_normal_p, Method, TestOptions, TestReport};
use crate::error::{Error, Result};

// Slack for comparing floating-point score sums during enumeration.
const SCORE_TOLERANCE: f64 = 1e-10;

/// Counts of each distinct pooled value, ascending, split by sample.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Tally {
    c1: Vec<u64>,
    c2: Vec<u64>,
}

impl Tally {
    pub(crate) fn from_samples(s1: &[f64], s2: &[f64]) -> Result<Tally> {
        if s1.is_empty() || s2.is_empty() {
            return Err(Error::EmptySample);
        }
        if s1.iter().chain(s2).any(|v| v.is_nan()) {
            return Err(Error::Domain("samples contain NaN".into()));
        }
        let mut pooled: Vec<(f64, bool)> = s1
            .iter()
            .map(|&v| (v, true))
            .chain(s2.iter().map(|&v| (v, false)))
            .collect();
        pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut tally = Tally {
            c1: Vec::new(),
            c2: Vec::new(),
        };
        let mut last: Option<f64> = None;
        for (v, first) in pooled {
            if last != Some(v) {
                tally.c1.push(0);
                tally.c2.push(0);
                last = Some(v);
            }
            let k = tally.c1.len() - 1;
            if first {
                tally.c1[k] += 1;
            } else {
                tally.c2[k] += 1;
            }
        }
        Ok(tally)
    }

    /// From per-category counts of two categorical samples; empty categories
    /// are dropped.
    pub(crate) fn from_counts(c1: &[u64], c2: &[u64]) -> Result<Tally> {
        let (a, b): (Vec<u64>, Vec<u64>) = c1
            .iter()
            .zip(c2)
            .filter(|(x, y)| **x + **y > 0)
            .map(|(x, y)| (*x, *y))
            .unzip();
        if a.iter().sum::<u64>() == 0 || b.iter().sum::<u64>() == 0 {
            return Err(Error::EmptySample);
        }
        Ok(Tally { c1: a, c2: b })
    }

    fn n1(&self) -> u64 {
        self.c1.iter().sum()
    }

    fn n2(&self) -> u64 {
        self.c2.iter().sum()
    }

    fn group_sizes(&self) -> impl Iterator<Item = u64> + '_ {
        self.c1.iter().zip(&self.c2).map(|(a, b)| a + b)
    }

    fn has_ties(&self) -> bool {
        self.group_sizes().any(|t| t > 1)
    }

    fn midranks(&self) -> Vec<f64> {
        let mut below = 0u64;
        self.group_sizes()
            .map(|t| {
                let r = below as f64 + (t as f64 + 1.0) / 2.0;
                below += t;
                r
            })
            .collect()
    }
}

/// Number of `n1`-subsets of ranks `1..=n` with each possible rank sum,
/// indexed by `U = sum - n1(n1+1)/2`.
fn exact_u_counts(n1: usize, n2: usize) -> Vec<u64> {
    let n = n1 + n2;
    let max_u = n1 * n2;
    // ways[j][u]: j ranks chosen so far, with U-offset u.
    let mut ways = vec![vec![0u64; max_u + 1]; n1 + 1];
    ways[0][0] = 1;
    for rank in 1..=n {
        for j in (1..=n1.min(rank)).rev() {
            // Choosing `rank` as the j-th smallest of sample 1 adds rank - j to U.
            let add = rank - j;
            if add > n2 {
                continue;
            }
            for u in (add..=max_u).rev() {
                ways[j][u] += ways[j - 1][u - add];
            }
        }
    }
    ways.swap_remove(n1)
}

pub(crate) fn wmw_from_tally(t: &Tally, alpha: f64, opts: &TestOptions) -> Result<TestReport> {
    check_alpha(alpha)?;
    let (n1, n2) = (t.n1(), t.n2());
    let n = n1 + n2;
    let ranks = t.midranks();
    let r1: f64 = t.c1.iter().zip(&ranks).map(|(&c, r)| c as f64 * r).sum();
    let u1 = r1 - (n1 * (n1 + 1)) as f64 / 2.0;
    let sizes = (n1 as usize, n2 as usize);

    if !t.has_ties() && (n as usize) <= opts.exact_rank_max {
        let counts = exact_u_counts(n1 as usize, n2 as usize);
        let total: u64 = counts.iter().sum();
        let u = u1.round() as usize;
        let lower: u64 = counts[..=u].iter().sum();
        let upper: u64 = counts[u..].iter().sum();
        let p = (2 * lower.min(upper)) as f64 / total as f64;
        return Ok(TestReport::new("wilcoxon-mann-whitney", u1, p.min(1.0), Method::Exact, sizes, alpha));
    }

    let (n1f, n2f, nf) = (n1 as f64, n2 as f64, n as f64);
    let ties: f64 = t.group_sizes().map(|s| (s as f64).powi(3) - s as f64).sum();
    let var = n1f * n2f / 12.0 * ((nf + 1.0) - ties / (nf * (nf - 1.0)));
    let p = if var > 0.0 {
        let dev = ((u1 - n1f * n2f / 2.0).abs() - 0.5).max(0.0);
        two_sided_normal_p(dev / var.sqrt())
    } else {
        1.0
    };
    Ok(TestReport::new("wilcoxon-mann-whitney", u1, p, Method::Asymptotic, sizes, alpha))
}

/// Two-sided Wilcoxon–Mann–Whitney test. The statistic is `U` of sample 1.
///
/// Exact when the pooled size is at most 20 and there are no ties; otherwise
/// the normal approximation with tie-corrected variance and continuity
/// correction.
pub fn wmw_test(sample1: &[f64], sample2: &[f64], alpha: f64) -> Result<TestReport> {
    wmw_test_with(sample1, sample2, alpha, &TestOptions::default())
}

pub fn wmw_test_with(sample1: &[f64], sample2: &[f64], alpha: f64, opts: &TestOptions) -> Result<TestReport> {
    wmw_from_tally(&Tally::from_samples(sample1, sample2)?, alpha, opts)
}

/// Visits every `k`-subset sum of `values`.
fn for_each_subset_sum(values: &[f64], k: usize, f: &mut impl FnMut(f64)) {
    fn go(values: &[f64], k: usize, acc: f64, f: &mut impl FnMut(f64)) {
        if k == 0 {
            f(acc);
            return;
        }
        if values.len() < k {
            return;
        }
        go(&values[1..], k - 1, acc + values[0], f);
        go(&values[1..], k, acc, f);
    }
    go(values, k, 0.0, f);
}

pub(crate) fn normal_scores_from_tally(t: &Tally, alpha: f64, opts: &TestOptions) -> Result<TestReport> {
    check_alpha(alpha)?;
    let (n1, n2) = (t.n1(), t.n2());
    let n = n1 + n2;
    let nf = n as f64;
    let normal = std_normal();
    let scores: Vec<f64> = t
        .midranks()
        .iter()
        .map(|r| normal.inverse_cdf(r / (nf + 1.0)))
        .collect();
    let stat: f64 = t.c1.iter().zip(&scores).map(|(&c, s)| c as f64 * s).sum();
    let total: f64 = t.group_sizes().zip(&scores).map(|(c, s)| c as f64 * s).sum();
    let mean = n1 as f64 * total / nf;
    let sizes = (n1 as usize, n2 as usize);

    if (n as usize) <= opts.exact_rank_max {
        let pooled: Vec<f64> = t
            .group_sizes()
            .zip(&scores)
            .flat_map(|(c, &s)| std::iter::repeat_n(s, c as usize))
            .collect();
        let observed = (stat - mean).abs();
        let (mut hits, mut all) = (0u64, 0u64);
        for_each_subset_sum(&pooled, n1 as usize, &mut |s| {
            all += 1;
            if (s - mean).abs() >= observed - SCORE_TOLERANCE {
                hits += 1;
            }
        });
        let p = hits as f64 / all as f64;
        return Ok(TestReport::new("normal-scores", stat, p, Method::Exact, sizes, alpha));
    }

    let ss: f64 = t
        .group_sizes()
        .zip(&scores)
        .map(|(c, s)| c as f64 * (s - total / nf).powi(2))
        .sum();
    let var = n1 as f64 * n2 as f64 / (nf * (nf - 1.0)) * ss;
    let p = if var > 0.0 {
        two_sided_normal_p((stat - mean) / var.sqrt())
    } else {
        1.0
    };
    Ok(TestReport::new("normal-scores", stat, p, Method::Asymptotic, sizes, alpha))
}

/// Two-sided van der Waerden normal-scores test. Scores are
/// `Φ⁻¹(midrank / (N + 1))`; the statistic is the score sum of sample 1.
///
/// Exact permutation p-value when the pooled size is at most 20, otherwise
/// the normal approximation.
pub fn normal_scores_test(sample1: &[f64], sample2: &[f64], alpha: f64) -> Result<TestReport> {
    normal_scores_test_with(sample1, sample2, alpha, &TestOptions::default())
}

pub fn normal_scores_test_with(
    sample1: &[f64],
    sample2: &[f64],
    alpha: f64,
    opts: &TestOptions,
) -> Result<TestReport> {
    normal_scores_from_tally(&Tally::from_samples(sample1, sample2)?, alpha, opts)
}

/// Exact null mean of the normal-scores statistic for this pooled sample.
pub fn normal_scores_null_mean(sample1: &[f64], sample2: &[f64]) -> Result<f64> {
    let t = Tally::from_samples(sample1, sample2)?;
    let nf = (t.n1() + t.n2()) as f64;
    let normal = std_normal();
    let total: f64 = t
        .group_sizes()
        .zip(t.midranks())
        .map(|(c, r)| c as f64 * normal.inverse_cdf(r / (nf + 1.0)))
        .sum();
    Ok(t.n1() as f64 * total / nf)
}
