//! Correlation estimates with error bars, the CHSH combination, and its bounds.

pub mod rates;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{PairOutcome, Spin};

pub use rates::{rate_summary, DEFAULT_RATE_THRESHOLD_SIGMA, RateComparison, RateInput, RateRow, RateSummary};

pub const CHSH_BOUND: f64 = 2.0;
pub const DEFAULT_VIOLATION_SIGMA: f64 = 2.0;

/// Coincidence tallies by outcome.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CoincidenceCounts {
    pub n_pp: u64,
    pub n_pm: u64,
    pub n_mp: u64,
    pub n_mm: u64,
}

impl CoincidenceCounts {
    pub fn record(&mut self, a: Spin, b: Spin) {
        match (a, b) {
            (Spin::Up, Spin::Up) => self.n_pp += 1,
            (Spin::Up, Spin::Down) => self.n_pm += 1,
            (Spin::Down, Spin::Up) => self.n_mp += 1,
            (Spin::Down, Spin::Down) => self.n_mm += 1,
        }
    }

    /// Tallies double detections; pairs with a missing click are skipped.
    pub fn from_pairs(pairs: &[PairOutcome]) -> Self {
        let mut c = CoincidenceCounts::default();
        for (a, b) in pairs.iter().filter_map(PairOutcome::coincidence) {
            c.record(a, b);
        }
        c
    }

    pub fn merge(self, other: Self) -> Self {
        CoincidenceCounts {
            n_pp: self.n_pp + other.n_pp,
            n_pm: self.n_pm + other.n_pm,
            n_mp: self.n_mp + other.n_mp,
            n_mm: self.n_mm + other.n_mm,
        }
    }

    pub fn total(&self) -> u64 {
        self.n_pp + self.n_pm + self.n_mp + self.n_mm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationEstimate {
    pub e_hat: f64,
    pub stderr: f64,
    #[serde(flatten)]
    pub counts: CoincidenceCounts,
    pub n_coincidences: u64,
}

impl CorrelationEstimate {
    pub fn from_counts(counts: CoincidenceCounts) -> Result<Self> {
        let n = counts.total();
        if n == 0 {
            return Err(Error::EmptyEstimate);
        }
        let same = (counts.n_pp + counts.n_mm) as i64;
        let diff = (counts.n_pm + counts.n_mp) as i64;
        let e_hat = (same - diff) as f64 / n as f64;
        let stderr = ((1.0 - e_hat * e_hat).max(0.0) / n as f64).sqrt();
        Ok(CorrelationEstimate {
            e_hat,
            stderr,
            counts,
            n_coincidences: n,
        })
    }
}

/// Post-selected estimate over pairs where both sides clicked.
pub fn estimate_correlation(pairs: &[PairOutcome]) -> Result<CorrelationEstimate> {
    CorrelationEstimate::from_counts(CoincidenceCounts::from_pairs(pairs))
}

/// `|E₁ − E₂| + |E₃ + E₄|` for plain numbers.
pub fn chsh_value(e_ab: f64, e_ab2: f64, e_a2b2: f64, e_a2b: f64) -> f64 {
    (e_ab - e_ab2).abs() + (e_a2b2 + e_a2b).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshResult {
    pub s_value: f64,
    pub s_stderr: f64,
    /// Estimates in the order `(a,b)`, `(a,b′)`, `(a′,b′)`, `(a′,b)`.
    pub components: [CorrelationEstimate; 4],
    pub bound: f64,
    pub n_sigma: f64,
    pub violated: bool,
}

/// CHSH with the classical bound and a 2σ decision.
pub fn chsh(
    e_ab: &CorrelationEstimate,
    e_ab2: &CorrelationEstimate,
    e_a2b2: &CorrelationEstimate,
    e_a2b: &CorrelationEstimate,
) -> ChshResult {
    chsh_with(
        [*e_ab, *e_ab2, *e_a2b2, *e_a2b],
        CHSH_BOUND,
        DEFAULT_VIOLATION_SIGMA,
    )
}

/// CHSH against an arbitrary `bound`; violated iff `S - n_sigma·σ_S > bound`.
/// The four runs are independent, so errors add in quadrature.
pub fn chsh_with(components: [CorrelationEstimate; 4], bound: f64, n_sigma: f64) -> ChshResult {
    let [e1, e2, e3, e4] = components.map(|c| c.e_hat);
    let s_value = chsh_value(e1, e2, e3, e4);
    let s_stderr = components.iter().map(|c| c.stderr * c.stderr).sum::<f64>().sqrt();
    ChshResult {
        s_value,
        s_stderr,
        components,
        bound,
        n_sigma,
        violated: s_value - n_sigma * s_stderr > bound,
    }
}

/// Relaxed CHSH bound `4 − 2δ` for a minimum hidden-variable overlap `δ`.
pub fn larsson_gill_bound(delta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Domain(format!("overlap δ must lie in [0, 1], got {delta}")));
    }
    Ok(4.0 - 2.0 * delta)
}
