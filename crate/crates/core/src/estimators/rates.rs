//! Singles and coincidence rates per setting combination, and a screen for
//! setting-dependent detection rates.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::simulate::{CoincidenceMatch, Side};

pub const DEFAULT_RATE_THRESHOLD_SIGMA: f64 = 5.0;

/// Raw counts of one setting combination observed for `duration_s` seconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateInput {
    pub label: String,
    pub setting_a: u8,
    pub setting_b: u8,
    pub duration_s: f64,
    pub singles_a: u64,
    pub singles_b: u64,
    pub coincidences: u64,
}

impl RateInput {
    /// One row per `(setting_a, setting_b)` seen in a matched stream pair.
    ///
    /// Singles count every click on that side with that setting, matched or not.
    pub fn from_match(label: &str, matched: &CoincidenceMatch, duration_s: f64) -> Vec<RateInput> {
        let mut singles_a: BTreeMap<u8, u64> = matched.unmatched_a.clone();
        let mut singles_b: BTreeMap<u8, u64> = matched.unmatched_b.clone();
        let mut coinc: BTreeMap<(u8, u8), u64> = BTreeMap::new();
        for (ea, eb) in &matched.pairs {
            *singles_a.entry(ea.setting).or_default() += 1;
            *singles_b.entry(eb.setting).or_default() += 1;
            *coinc.entry((ea.setting, eb.setting)).or_default() += 1;
        }
        let settings_a: BTreeSet<u8> = singles_a.keys().copied().collect();
        let settings_b: BTreeSet<u8> = singles_b.keys().copied().collect();
        let mut rows = Vec::new();
        for &sa in &settings_a {
            for &sb in &settings_b {
                rows.push(RateInput {
                    label: label.to_string(),
                    setting_a: sa,
                    setting_b: sb,
                    duration_s,
                    singles_a: singles_a[&sa],
                    singles_b: singles_b[&sb],
                    coincidences: coinc.get(&(sa, sb)).copied().unwrap_or(0),
                });
            }
        }
        rows
    }
}

/// A rate in Hz with its Poisson standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rate {
    pub hz: f64,
    pub stderr: f64,
}

impl Rate {
    fn from_count(n: u64, duration_s: f64) -> Rate {
        if duration_s > 0.0 {
            Rate {
                hz: n as f64 / duration_s,
                stderr: (n as f64).sqrt() / duration_s,
            }
        } else {
            Rate { hz: 0.0, stderr: 0.0 }
        }
    }
}

/// A binomial fraction with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fraction {
    pub value: f64,
    pub stderr: f64,
}

impl Fraction {
    fn new(k: u64, n: u64) -> Option<Fraction> {
        (n > 0).then(|| {
            let p = k as f64 / n as f64;
            Fraction {
                value: p,
                stderr: (p * (1.0 - p) / n as f64).max(0.0).sqrt(),
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub label: String,
    pub setting_a: u8,
    pub setting_b: u8,
    pub duration_s: f64,
    pub singles_a: Rate,
    pub singles_b: Rate,
    pub coincidences: Rate,
    /// Coincidences as a fraction of A's singles.
    pub detected_fraction_a: Option<Fraction>,
    pub detected_fraction_b: Option<Fraction>,
}

/// Singles-rate comparison between two rows on one side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateComparison {
    pub side: Side,
    pub row_i: usize,
    pub row_j: usize,
    pub ratio: Option<f64>,
    pub ratio_stderr: Option<f64>,
    /// Rate difference in units of the combined Poisson standard error.
    pub z: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSummary {
    pub rows: Vec<RateRow>,
    pub comparisons: Vec<RateComparison>,
    pub threshold_sigma: f64,
    pub flagged: bool,
}

fn compare(side: Side, (i, ni, di): (usize, u64, f64), (j, nj, dj): (usize, u64, f64), threshold: f64) -> Option<RateComparison> {
    if di <= 0.0 || dj <= 0.0 || (ni == 0 && nj == 0) {
        return None;
    }
    let (ri, rj) = (ni as f64 / di, nj as f64 / dj);
    let combined = (ni as f64 / (di * di) + nj as f64 / (dj * dj)).sqrt();
    let z = (ri - rj) / combined;
    let (ratio, ratio_stderr) = if ni > 0 && nj > 0 {
        let r = ri / rj;
        (Some(r), Some(r * (1.0 / ni as f64 + 1.0 / nj as f64).sqrt()))
    } else {
        (None, None)
    };
    Some(RateComparison {
        side,
        row_i: i,
        row_j: j,
        ratio,
        ratio_stderr,
        z,
        flagged: z.abs() > threshold,
    })
}

/// Tabulates rates and compares each side's singles rate across every pair of
/// rows with different setting combinations.
pub fn rate_summary(inputs: &[RateInput], threshold_sigma: f64) -> RateSummary {
    let rows: Vec<RateRow> = inputs
        .iter()
        .map(|r| RateRow {
            label: r.label.clone(),
            setting_a: r.setting_a,
            setting_b: r.setting_b,
            duration_s: r.duration_s,
            singles_a: Rate::from_count(r.singles_a, r.duration_s),
            singles_b: Rate::from_count(r.singles_b, r.duration_s),
            coincidences: Rate::from_count(r.coincidences, r.duration_s),
            detected_fraction_a: Fraction::new(r.coincidences.min(r.singles_a), r.singles_a),
            detected_fraction_b: Fraction::new(r.coincidences.min(r.singles_b), r.singles_b),
        })
        .collect();

    let mut comparisons = Vec::new();
    for i in 0..inputs.len() {
        for j in i + 1..inputs.len() {
            let (x, y) = (&inputs[i], &inputs[j]);
            if (x.setting_a, x.setting_b) == (y.setting_a, y.setting_b) {
                continue;
            }
            comparisons.extend(compare(Side::A, (i, x.singles_a, x.duration_s), (j, y.singles_a, y.duration_s), threshold_sigma));
            comparisons.extend(compare(Side::B, (i, x.singles_b, x.duration_s), (j, y.singles_b, y.duration_s), threshold_sigma));
        }
    }
    let flagged = comparisons.iter().any(|c| c.flagged);
    RateSummary {
        rows,
        comparisons,
        threshold_sigma,
        flagged,
    }
}
