//! The purity protocol: are time-windowed and intensity-reduced samples all
//! drawn from one population?

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::chi2::chi2_homogeneity;
use super::multiplicity::holm_adjust;
use super::rank::{normal_scores_from_tally, wmw_from_tally, Tally};
use super::series::{segment_by_time, split_by_procedure, CategoricalSeries, Reduction};
use super::{check_alpha, TestOptions, TestReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PurityConfig {
    pub delta_t_ns: u64,
    pub procedures: Vec<Reduction>,
    pub alpha: f64,
    pub options: TestOptions,
}

impl PurityConfig {
    /// Thinning by half, decimation by two and truncation to the first half.
    pub fn new(delta_t_ns: u64, alpha: f64) -> Self {
        PurityConfig {
            delta_t_ns,
            procedures: vec![
                Reduction::BernoulliThin(0.5),
                Reduction::Decimate(2),
                Reduction::TimeTruncate(0.5),
            ],
            alpha,
            options: TestOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SampleLabel {
    Segment { index: usize },
    /// Events of a segment kept by a reduction procedure.
    Reduced { segment: usize, procedure: String },
    /// The complementary events the same procedure discarded.
    Discarded { segment: usize, procedure: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub left: SampleLabel,
    pub right: SampleLabel,
    pub report: TestReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PurityProtocolResult {
    pub n_segments: usize,
    pub segment_sizes: Vec<usize>,
    pub comparisons: Vec<Comparison>,
    pub adjustment: String,
    pub alpha: f64,
    /// True when any Holm-adjusted p-value falls below `alpha`.
    pub family_reject: bool,
    pub min_adjusted_p: Option<f64>,
}

struct Job {
    left: SampleLabel,
    right: SampleLabel,
    counts: (Vec<u64>, Vec<u64>),
}

fn run_tests(job: &Job, alpha: f64, opts: &TestOptions) -> Result<Vec<Comparison>> {
    let (c1, c2) = &job.counts;
    let tally = Tally::from_counts(c1, c2)?;
    let reports = [
        wmw_from_tally(&tally, alpha, opts)?,
        normal_scores_from_tally(&tally, alpha, opts)?,
        chi2_homogeneity(&[c1.clone(), c2.clone()], alpha)?,
    ];
    Ok(reports
        .into_iter()
        .map(|report| Comparison {
            left: job.left.clone(),
            right: job.right.clone(),
            report,
        })
        .collect())
}

/// Segments the series into windows of `delta_t_ns`, compares every pair of
/// segments, and within each segment compares what every reduction procedure
/// keeps against what it discards. Each comparison runs the rank-sum,
/// normal-scores and χ² tests on the category labels. The whole family is
/// Holm-adjusted.
///
/// Comparisons where one side is empty (for instance `Decimate(1)`) are
/// skipped.
pub fn purity_protocol<R: Rng + ?Sized>(
    series: &CategoricalSeries,
    config: &PurityConfig,
    rng: &mut R,
) -> Result<PurityProtocolResult> {
    check_alpha(config.alpha)?;
    for p in &config.procedures {
        p.validate()?;
    }
    let segments = segment_by_time(series, config.delta_t_ns)?;
    if segments.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "purity protocol needs at least two segments, got {}",
            segments.len()
        )));
    }
    let tallies: Vec<Vec<u64>> = segments.iter().map(|s| s.tally()).collect();

    let mut jobs = Vec::new();
    for i in 0..segments.len() {
        for j in i + 1..segments.len() {
            jobs.push(Job {
                left: SampleLabel::Segment { index: i },
                right: SampleLabel::Segment { index: j },
                counts: (tallies[i].clone(), tallies[j].clone()),
            });
        }
    }
    for (i, seg) in segments.iter().enumerate() {
        for &proc in &config.procedures {
            let (kept, dropped) = split_by_procedure(seg, proc, rng)?;
            if kept.is_empty() || dropped.is_empty() {
                continue;
            }
            jobs.push(Job {
                left: SampleLabel::Reduced {
                    segment: i,
                    procedure: proc.to_string(),
                },
                right: SampleLabel::Discarded {
                    segment: i,
                    procedure: proc.to_string(),
                },
                counts: (kept.tally(), dropped.tally()),
            });
        }
    }

    let nested: Vec<Vec<Comparison>> = jobs
        .par_iter()
        .map(|job| run_tests(job, config.alpha, &config.options))
        .collect::<Result<_>>()?;
    let mut comparisons: Vec<Comparison> = nested.into_iter().flatten().collect();

    let raw: Vec<f64> = comparisons.iter().map(|c| c.report.p_value).collect();
    for (c, p) in comparisons.iter_mut().zip(holm_adjust(&raw)) {
        c.report.adjust(p);
    }
    let min_adjusted_p = comparisons
        .iter()
        .map(|c| c.report.p_adjusted)
        .min_by(f64::total_cmp);
    Ok(PurityProtocolResult {
        n_segments: segments.len(),
        segment_sizes: segments.iter().map(|s| s.len()).collect(),
        family_reject: comparisons.iter().any(|c| c.report.reject),
        comparisons,
        adjustment: "holm".into(),
        alpha: config.alpha,
        min_adjusted_p,
    })
}
