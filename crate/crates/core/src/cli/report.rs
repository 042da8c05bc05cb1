//! Report documents and CSV tables.

use std::fmt::Write as _;

use serde::Serialize;

use crate::estimators::{ChshResult, CorrelationEstimate, RateSummary};
use crate::simulate::ExperimentConfig;
use crate::stats::{Method, PurityProtocolResult, SampleLabel, TestReport};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub run_id: String,
    pub n_pairs: u64,
    pub singles_a: u64,
    pub singles_b: u64,
    pub n_coincidences: u64,
    pub duration_s: f64,
    /// `None` when the run produced no coincidences.
    pub correlation: Option<CorrelationEstimate>,
    pub purity: Option<PurityProtocolResult>,
}

/// Everything `simulate` produces for one configuration file.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool_version: String,
    pub master_seed: u64,
    pub configs: Vec<ExperimentConfig>,
    pub runs: Vec<RunSummary>,
    pub chsh: Option<ChshResult>,
    pub rates: RateSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct SettingsEstimate {
    pub setting_a: u8,
    pub setting_b: u8,
    pub estimate: CorrelationEstimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub tool_version: String,
    pub window_ns: u64,
    pub overall: CorrelationEstimate,
    pub by_settings: Vec<SettingsEstimate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChshReport {
    pub tool_version: String,
    pub master_seed: Option<u64>,
    pub window_ns: u64,
    /// Source of each component, in the order of `result.components`.
    pub sources: Vec<String>,
    pub result: ChshResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct PurityReport {
    pub tool_version: String,
    pub seed: u64,
    pub series: String,
    pub n_events: usize,
    pub delta_t_ns: u64,
    pub procedures: Vec<String>,
    pub result: PurityProtocolResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodogramSummary {
    pub n: usize,
    pub dominant_frequency: Option<f64>,
    pub fisher_g: f64,
    pub fisher_p: f64,
    pub method: Method,
    pub reject: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RandomnessReport {
    pub tool_version: String,
    pub side: String,
    pub n_events: usize,
    pub alpha: f64,
    pub runs: TestReport,
    pub periodogram: PeriodogramSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct RatesReport {
    pub tool_version: String,
    pub window_ns: u64,
    pub summary: RateSummary,
}

pub fn to_json<T: Serialize>(report: &T) -> crate::Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

/// Builds a CSV document row by row. Fields are written verbatim.
pub struct Csv(String);

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv(header.join(",") + "\n")
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.0, "{}", fields.join(","));
    }

    pub fn finish(self) -> String {
        self.0
    }
}

pub fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn label(l: &SampleLabel) -> String {
    match l {
        SampleLabel::Segment { index } => format!("segment {index}"),
        SampleLabel::Reduced { segment, procedure } => format!("segment {segment} kept by {procedure}"),
        SampleLabel::Discarded { segment, procedure } => {
            format!("segment {segment} discarded by {procedure}")
        }
    }
}

pub fn method(m: Method) -> &'static str {
    match m {
        Method::Exact => "exact",
        Method::Asymptotic => "asymptotic",
    }
}

pub fn correlation_csv(rows: &[(String, CorrelationEstimate)]) -> String {
    let mut csv = Csv::new(&["label", "e_hat", "stderr", "n_pp", "n_pm", "n_mp", "n_mm", "n_coincidences"]);
    for (name, e) in rows {
        csv.row(&[
            name.clone(),
            e.e_hat.to_string(),
            e.stderr.to_string(),
            e.counts.n_pp.to_string(),
            e.counts.n_pm.to_string(),
            e.counts.n_mp.to_string(),
            e.counts.n_mm.to_string(),
            e.n_coincidences.to_string(),
        ]);
    }
    csv.finish()
}

pub fn rates_csv(summary: &RateSummary) -> String {
    let mut csv = Csv::new(&[
        "label",
        "setting_a",
        "setting_b",
        "duration_s",
        "singles_a_hz",
        "singles_a_stderr",
        "singles_b_hz",
        "singles_b_stderr",
        "coincidences_hz",
        "coincidences_stderr",
        "detected_fraction_a",
        "detected_fraction_b",
    ]);
    for r in &summary.rows {
        csv.row(&[
            r.label.clone(),
            r.setting_a.to_string(),
            r.setting_b.to_string(),
            r.duration_s.to_string(),
            r.singles_a.hz.to_string(),
            r.singles_a.stderr.to_string(),
            r.singles_b.hz.to_string(),
            r.singles_b.stderr.to_string(),
            r.coincidences.hz.to_string(),
            r.coincidences.stderr.to_string(),
            opt(r.detected_fraction_a.map(|f| f.value)),
            opt(r.detected_fraction_b.map(|f| f.value)),
        ]);
    }
    csv.finish()
}

pub fn purity_csv(result: &PurityProtocolResult) -> String {
    let mut csv = Csv::new(&["left", "right", "test", "statistic", "p_value", "p_adjusted", "method", "reject"]);
    for c in &result.comparisons {
        csv.row(&[
            label(&c.left),
            label(&c.right),
            c.report.test_name.clone(),
            c.report.statistic.to_string(),
            c.report.p_value.to_string(),
            c.report.p_adjusted.to_string(),
            method(c.report.method).to_string(),
            c.report.reject.to_string(),
        ]);
    }
    csv.finish()
}
