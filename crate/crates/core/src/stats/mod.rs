//! Purity and randomness tests for outcome time series.
//!
//! A source that is a pure ensemble should produce samples that look alike no
//! matter which time window they come from or which intensity-reduction
//! procedure thinned them, and its outcomes should carry no temporal structure
//! beyond a fixed multinomial law. This module provides the windowing and
//! thinning operations, the two-sample compatibility tests, the runs test and
//! periodogram, and the protocol that ties them together under a family-wise
//! error adjustment.

mod chi2;
mod multiplicity;
mod periodogram;
mod purity;
mod rank;
mod runs;
mod series;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

pub use chi2::chi2_homogeneity;
pub use multiplicity::holm_adjust;
pub use periodogram::{fisher_g_pvalue, periodogram, Periodogram};
pub use purity::{purity_protocol, Comparison, PurityConfig, PurityProtocolResult, SampleLabel};
pub use rank::{
    normal_scores_null_mean, normal_scores_test, normal_scores_test_with, wmw_test, wmw_test_with,
};
pub use runs::{runs_test, runs_test_with, Alternative};
pub use series::{reduce_intensity, segment_by_time, split_by_procedure, CategoricalSeries, Reduction};

/// Largest combined size for exact rank-test enumeration.
pub const DEFAULT_EXACT_RANK_MAX: usize = 20;
/// Largest sequence length for the exact runs distribution.
pub const DEFAULT_EXACT_RUNS_MAX: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub test_name: String,
    pub statistic: f64,
    pub p_value: f64,
    /// Equal to `p_value` unless a multiplicity adjustment has been applied.
    pub p_adjusted: f64,
    pub method: Method,
    pub n1: usize,
    pub n2: usize,
    pub alpha: f64,
    pub reject: bool,
}

impl TestReport {
    pub(crate) fn new(
        test_name: &str,
        statistic: f64,
        p_value: f64,
        method: Method,
        (n1, n2): (usize, usize),
        alpha: f64,
    ) -> Self {
        let p = p_value.clamp(0.0, 1.0);
        TestReport {
            test_name: test_name.to_string(),
            statistic,
            p_value: p,
            p_adjusted: p,
            method,
            n1,
            n2,
            alpha,
            reject: p < alpha,
        }
    }

    pub fn adjust(&mut self, p_adjusted: f64) {
        self.p_adjusted = p_adjusted.clamp(0.0, 1.0);
        self.reject = self.p_adjusted < self.alpha;
    }
}

/// Thresholds for switching from exact to asymptotic null distributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestOptions {
    pub exact_rank_max: usize,
    pub exact_runs_max: usize,
}

impl Default for TestOptions {
    fn default() -> Self {
        TestOptions {
            exact_rank_max: DEFAULT_EXACT_RANK_MAX,
            exact_runs_max: DEFAULT_EXACT_RUNS_MAX,
        }
    }
}

pub(crate) fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// `P(|Z| >= |z|)` for a standard normal `Z`.
pub(crate) fn two_sided_normal_p(z: f64) -> f64 {
    (2.0 * std_normal().sf(z.abs())).min(1.0)
}

pub(crate) fn check_alpha(alpha: f64) -> crate::Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(crate::Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}
