//! Wald–Wolfowitz runs test for binary sequences.

use serde::Serialize;

use super::{check_alpha, std_normal, two_sided_normal_p, Method, TestOptions, TestReport};
use crate::error::{Error, Result};
use statrs::distribution::ContinuousCDF;

/// Which deviation in the number of runs counts as evidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    #[default]
    TwoSided,
    /// Too few runs: clustering or persistence.
    Fewer,
    /// Too many runs: alternation.
    More,
}

/// `None` on overflow.
fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    (0..k).try_fold(1u128, |acc, i| Some(acc.checked_mul((n - i) as u128)? / (i + 1) as u128))
}

/// Number of arrangements of `n1` ones and `n2` zeros with exactly `r` runs.
fn arrangements_with_runs(n1: u64, n2: u64, r: u64) -> Option<u128> {
    if r < 2 {
        return Some(0);
    }
    let k = r / 2;
    let b = binomial;
    if r.is_multiple_of(2) {
        b(n1 - 1, k - 1)?.checked_mul(b(n2 - 1, k - 1)?)?.checked_mul(2)
    } else {
        let x = b(n1 - 1, k)?.checked_mul(b(n2 - 1, k - 1)?)?;
        let y = b(n1 - 1, k - 1)?.checked_mul(b(n2 - 1, k)?)?;
        x.checked_add(y)
    }
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        f64::NEG_INFINITY
    } else {
        statrs::function::factorial::ln_binomial(n, k)
    }
}

/// Log of [`arrangements_with_runs`] for when the counts overflow.
fn ln_arrangements_with_runs(n1: u64, n2: u64, r: u64) -> f64 {
    let k = r / 2;
    if r.is_multiple_of(2) {
        std::f64::consts::LN_2 + ln_binomial(n1 - 1, k - 1) + ln_binomial(n2 - 1, k - 1)
    } else {
        let x = ln_binomial(n1 - 1, k) + ln_binomial(n2 - 1, k - 1);
        let y = ln_binomial(n1 - 1, k - 1) + ln_binomial(n2 - 1, k);
        let m = x.max(y);
        m + ((x - m).exp() + (y - m).exp()).ln()
    }
}

/// `(P(R ≤ r), P(R ≥ r))` under random arrangement.
fn exact_tails(n1: u64, n2: u64, r: u64) -> (f64, f64) {
    let max_r = 2 * n1.min(n2) + u64::from(n1 != n2);
    let counts: Option<Vec<u128>> = (2..=max_r).map(|k| arrangements_with_runs(n1, n2, k)).collect();
    let idx = (r - 2) as usize;
    if let Some(c) = counts.filter(|c| c.iter().try_fold(0u128, |a, &x| a.checked_add(x)).is_some()) {
        let total: u128 = c.iter().sum();
        let le: u128 = c[..=idx].iter().sum();
        let ge: u128 = c[idx..].iter().sum();
        return (le as f64 / total as f64, ge as f64 / total as f64);
    }
    let ln_total = ln_binomial(n1 + n2, n1);
    let probs: Vec<f64> = (2..=max_r)
        .map(|k| (ln_arrangements_with_runs(n1, n2, k) - ln_total).exp())
        .collect();
    let le: f64 = probs[..=idx].iter().sum();
    let ge: f64 = probs[idx..].iter().sum();
    (le.min(1.0), ge.min(1.0))
}

pub fn count_runs(seq: &[bool]) -> u64 {
    if seq.is_empty() {
        return 0;
    }
    1 + seq.windows(2).filter(|w| w[0] != w[1]).count() as u64
}

/// Two-sided runs test; see [`runs_test_with`].
pub fn runs_test(seq: &[bool], alpha: f64) -> Result<TestReport> {
    runs_test_with(seq, alpha, Alternative::TwoSided, &TestOptions::default())
}

/// Runs test on the number of maximal blocks of equal symbols.
///
/// Exact null distribution for sequences up to `exact_runs_max` long,
/// otherwise the normal approximation with continuity correction. The
/// two-sided p-value doubles the smaller tail.
pub fn runs_test_with(
    seq: &[bool],
    alpha: f64,
    alternative: Alternative,
    opts: &TestOptions,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    let n1 = seq.iter().filter(|&&b| b).count() as u64;
    let n2 = seq.len() as u64 - n1;
    if n1 == 0 || n2 == 0 {
        return Err(Error::DegenerateSequence);
    }
    let r = count_runs(seq);
    let n = n1 + n2;
    let sizes = (n1 as usize, n2 as usize);

    let (lower, upper, method) = if seq.len() <= opts.exact_runs_max {
        let (le, ge) = exact_tails(n1, n2, r);
        (le, ge, Method::Exact)
    } else {
        let (a, b, nf) = (n1 as f64, n2 as f64, n as f64);
        let mean = 2.0 * a * b / nf + 1.0;
        let var = 2.0 * a * b * (2.0 * a * b - nf) / (nf * nf * (nf - 1.0));
        if var <= 0.0 {
            (1.0, 1.0, Method::Asymptotic)
        } else {
            let sd = var.sqrt();
            let normal = std_normal();
            let rf = r as f64;
            let lower = normal.cdf((rf - mean + 0.5) / sd);
            let upper = normal.sf((rf - mean - 0.5) / sd);
            if alternative == Alternative::TwoSided {
                let dev = ((rf - mean).abs() - 0.5).max(0.0);
                let p = two_sided_normal_p(dev / sd);
                return Ok(TestReport::new("runs", rf, p, Method::Asymptotic, sizes, alpha));
            }
            (lower, upper, Method::Asymptotic)
        }
    };
    let p = match alternative {
        Alternative::TwoSided => (2.0 * lower.min(upper)).min(1.0),
        Alternative::Fewer => lower,
        Alternative::More => upper,
    };
    Ok(TestReport::new("runs", r as f64, p, method, sizes, alpha))
}
