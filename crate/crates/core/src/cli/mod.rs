//! Command-line front end: configuration files, event files, and the
//! `simulate`, `estimate`, `chsh`, `purity`, `randomness` and `rates`
//! commands. Every command produces a JSON report and, on request, CSV tables.

mod config;
mod events;
mod report;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{parse_config, parse_config_str, Campaign, ConfigFile};
pub use events::{format_events, parse_events, read_events, write_events, EVENTS_HEADER};
pub use report::{
    ChshReport, EstimateReport, PeriodogramSummary, PurityReport, RandomnessReport, RatesReport,
    RunReport, RunSummary, SettingsEstimate, TOOL_VERSION,
};

use crate::error::{Error, Result};
use crate::estimators::{
    chsh_with, estimate_correlation, larsson_gill_bound, rate_summary, CorrelationEstimate, RateInput,
    CHSH_BOUND, DEFAULT_RATE_THRESHOLD_SIGMA, DEFAULT_VIOLATION_SIGMA,
};
use crate::models::{PairOutcome, Spin};
use crate::rng::{RunSeed, REDUCTION_STREAM};
use crate::simulate::{
    match_coincidences, simulate_run, CoincidenceMatch, EventStreams, DEFAULT_WINDOW_NS,
};
use crate::stats::{
    periodogram, purity_protocol, runs_test, CategoricalSeries, PurityConfig, Reduction,
};
use report::{correlation_csv, opt, purity_csv, rates_csv, to_json, Csv};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const OUT_DIR_ENV: &str = "SPCE_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "spce", version, about = "Simulate and analyze spin-polarization correlation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a configuration file, write event files and a run report.
    Simulate(SimulateArgs),
    /// Correlation estimate from event files.
    Estimate(EstimateArgs),
    /// CHSH value from a campaign config or from event files.
    Chsh(ChshArgs),
    /// Purity protocol on an event file.
    Purity(PurityArgs),
    /// Runs test and periodogram on one side's outcomes.
    Randomness(RandomnessArgs),
    /// Singles and coincidence rates per setting combination.
    Rates(RatesArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Directory for report, event and CSV files.
    #[arg(long, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
    /// Also write CSV tables to the output directory.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub window_ns: Option<u64>,
    /// Run the purity protocol on each run's coincidences with this window.
    #[arg(long)]
    pub delta_t_ns: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub events: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_WINDOW_NS)]
    pub window_ns: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ChshArgs {
    /// Campaign config with a `[chsh]` table.
    #[arg(long, conflicts_with = "events", required_unless_present = "events")]
    pub config: Option<PathBuf>,
    /// Event files covering all four setting combinations.
    #[arg(long, num_args = 1..)]
    pub events: Vec<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub window_ns: Option<u64>,
    /// Use the relaxed bound 4 − 2δ instead of 2.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_VIOLATION_SIGMA)]
    pub n_sigma: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeriesKind {
    /// Joint outcome of each coincidence, four categories.
    Joint,
    /// Side A clicks, two categories.
    A,
    /// Side B clicks, two categories.
    B,
}

impl SeriesKind {
    fn name(self) -> &'static str {
        match self {
            SeriesKind::Joint => "joint",
            SeriesKind::A => "a",
            SeriesKind::B => "b",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PurityArgs {
    #[arg(long)]
    pub events: PathBuf,
    #[arg(long)]
    pub delta_t_ns: u64,
    /// Comma-separated reductions such as `thin:0.5,decimate:2,truncate:0.5`.
    #[arg(long, value_delimiter = ',')]
    pub procedures: Option<Vec<Reduction>>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Seed for random reductions.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SeriesKind::Joint)]
    pub series: SeriesKind,
    #[arg(long, default_value_t = DEFAULT_WINDOW_NS)]
    pub window_ns: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    A,
    B,
}

#[derive(Debug, Clone, Args)]
pub struct RandomnessArgs {
    #[arg(long)]
    pub events: PathBuf,
    #[arg(long, value_enum, default_value_t = SideArg::A)]
    pub side: SideArg,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RatesArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub events: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_WINDOW_NS)]
    pub window_ns: u64,
    #[arg(long, default_value_t = DEFAULT_RATE_THRESHOLD_SIGMA)]
    pub threshold_sigma: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// A finished command: its JSON report and any CSV tables, by file name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub name: &'static str,
    pub report: String,
    pub tables: Vec<(String, String)>,
}

impl Command {
    fn output_args(&self) -> &OutputArgs {
        match self {
            Command::Simulate(a) => &a.output,
            Command::Estimate(a) => &a.output,
            Command::Chsh(a) => &a.output,
            Command::Purity(a) => &a.output,
            Command::Randomness(a) => &a.output,
            Command::Rates(a) => &a.output,
        }
    }
}

/// Runs a command, prints its report and writes requested files.
pub fn run(cli: &Cli) -> Result<()> {
    let out = cli.command.output_args();
    if out.csv && out.out.is_none() {
        return Err(Error::Validation(format!("--csv needs --out or {OUT_DIR_ENV}")));
    }
    let result = execute(&cli.command)?;
    if let Some(dir) = &out.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{}.json", result.name)), &result.report)?;
        if out.csv {
            for (name, body) in &result.tables {
                std::fs::write(dir.join(name), body)?;
            }
        }
    }
    print!("{}", result.report);
    Ok(())
}

/// Runs a command without printing. `simulate` still writes event files when
/// an output directory is set.
pub fn execute(command: &Command) -> Result<CommandOutput> {
    match command {
        Command::Simulate(a) => simulate_command(a),
        Command::Estimate(a) => estimate_command(a),
        Command::Chsh(a) => chsh_command(a),
        Command::Purity(a) => purity_command(a),
        Command::Randomness(a) => randomness_command(a),
        Command::Rates(a) => rates_command(a),
    }
}

fn load_matched(path: &Path, window_ns: u64) -> Result<(EventStreams, CoincidenceMatch)> {
    let streams = read_events(path)?;
    let matched = match_coincidences(&streams.a, &streams.b, window_ns)?;
    Ok((streams, matched))
}

fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Joint outcomes of matched pairs as categories `2·[A = −1] + [B = −1]`,
/// stamped with A's time.
pub fn joint_series(matched: &CoincidenceMatch) -> Result<CategoricalSeries> {
    let values = matched
        .pairs
        .iter()
        .map(|(a, b)| 2 * u32::from(a.outcome == Spin::Down) + u32::from(b.outcome == Spin::Down))
        .collect();
    let times = matched.pairs.iter().map(|(a, _)| a.time_ns).collect();
    CategoricalSeries::with_timestamps(values, times, 4)
}

/// One side's clicks, `+1` as category 0 and `−1` as category 1.
pub fn side_series(streams: &EventStreams, side: SideArg) -> Result<CategoricalSeries> {
    let events = match side {
        SideArg::A => &streams.a,
        SideArg::B => &streams.b,
    };
    let values = events.iter().map(|e| u32::from(e.outcome == Spin::Down)).collect();
    let times = events.iter().map(|e| e.time_ns).collect();
    CategoricalSeries::with_timestamps(values, times, 2)
}

fn simulate_command(args: &SimulateArgs) -> Result<CommandOutput> {
    let mut cfg = parse_config(&args.config)?;
    cfg.apply_overrides(args.seed, args.window_ns)?;
    if let Some(dir) = &args.output.out {
        std::fs::create_dir_all(dir)?;
    }
    let mut runs = Vec::new();
    let mut rate_inputs = Vec::new();
    for run in cfg.runs() {
        let output = simulate_run(run)?;
        if let Some(dir) = &args.output.out {
            write_events(&dir.join(format!("{}.events", run.run_id)), &output.streams)?;
        }
        let duration_s = output.streams.duration_s();
        rate_inputs.extend(RateInput::from_match(&run.run_id, &output.matched, duration_s));
        let purity = match args.delta_t_ns {
            Some(dt) => {
                let series = joint_series(&output.matched)?;
                let mut rng = run.run_seed().stream(REDUCTION_STREAM);
                Some(purity_protocol(&series, &PurityConfig::new(dt, args.alpha), &mut rng)?)
            }
            None => None,
        };
        runs.push(RunSummary {
            run_id: run.run_id.clone(),
            n_pairs: run.n_pairs,
            singles_a: output.streams.a.len() as u64,
            singles_b: output.streams.b.len() as u64,
            n_coincidences: output.matched.pairs.len() as u64,
            duration_s,
            correlation: estimate_correlation(&output.matched.pair_outcomes()).ok(),
            purity,
        });
    }
    let chsh = match &cfg {
        ConfigFile::Campaign(_) => {
            let comps: Option<Vec<CorrelationEstimate>> = runs.iter().map(|r| r.correlation).collect();
            comps.map(|c| chsh_with([c[0], c[1], c[2], c[3]], CHSH_BOUND, DEFAULT_VIOLATION_SIGMA))
        }
        ConfigFile::Single(_) => None,
    };
    let report = RunReport {
        tool_version: TOOL_VERSION.to_string(),
        master_seed: cfg.master_seed(),
        configs: cfg.runs().into_iter().cloned().collect(),
        runs,
        chsh,
        rates: rate_summary(&rate_inputs, DEFAULT_RATE_THRESHOLD_SIGMA),
    };

    let mut tables = vec![("rates.csv".to_string(), rates_csv(&report.rates))];
    let rows: Vec<(String, CorrelationEstimate)> = report
        .runs
        .iter()
        .filter_map(|r| r.correlation.map(|c| (r.run_id.clone(), c)))
        .collect();
    tables.push(("correlations.csv".into(), correlation_csv(&rows)));
    for r in &report.runs {
        if let Some(p) = &r.purity {
            tables.push((format!("purity-{}.csv", r.run_id), purity_csv(p)));
        }
    }
    Ok(CommandOutput {
        name: "simulate",
        report: to_json(&report)?,
        tables,
    })
}

fn estimate_command(args: &EstimateArgs) -> Result<CommandOutput> {
    let mut pairs: Vec<PairOutcome> = Vec::new();
    let mut groups: std::collections::BTreeMap<(u8, u8), Vec<PairOutcome>> = Default::default();
    for path in &args.events {
        let (_, matched) = load_matched(path, args.window_ns)?;
        pairs.extend(matched.pair_outcomes());
        for (k, v) in matched.by_settings() {
            groups.entry(k).or_default().extend(v);
        }
    }
    let overall = estimate_correlation(&pairs)?;
    let by_settings = groups
        .into_iter()
        .map(|((sa, sb), p)| {
            Ok(SettingsEstimate {
                setting_a: sa,
                setting_b: sb,
                estimate: estimate_correlation(&p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = EstimateReport {
        tool_version: TOOL_VERSION.to_string(),
        window_ns: args.window_ns,
        overall,
        by_settings,
    };
    let mut rows = vec![("all".to_string(), report.overall)];
    rows.extend(
        report
            .by_settings
            .iter()
            .map(|s| (format!("a{}b{}", s.setting_a, s.setting_b), s.estimate)),
    );
    Ok(CommandOutput {
        name: "estimate",
        report: to_json(&report)?,
        tables: vec![("estimates.csv".into(), correlation_csv(&rows))],
    })
}

fn chsh_command(args: &ChshArgs) -> Result<CommandOutput> {
    let bound = match args.delta {
        Some(d) => larsson_gill_bound(d)?,
        None => CHSH_BOUND,
    };
    let (components, sources, master_seed, window_ns) = if let Some(path) = &args.config {
        let mut cfg = parse_config(path)?;
        cfg.apply_overrides(args.seed, args.window_ns)?;
        let ConfigFile::Campaign(campaign) = &cfg else {
            return Err(Error::Validation(format!(
                "{}: chsh needs a campaign config with a [chsh] table",
                path.display()
            )));
        };
        let mut comps = Vec::new();
        for run in &campaign.runs {
            let output = simulate_run(run)?;
            comps.push(estimate_correlation(&output.matched.pair_outcomes())?);
        }
        let sources = campaign.runs.iter().map(|r| r.run_id.clone()).collect();
        let window = campaign.runs[0].coincidence_window_ns;
        (comps, sources, Some(cfg.master_seed()), window)
    } else {
        let window = args.window_ns.unwrap_or(DEFAULT_WINDOW_NS);
        let mut groups: std::collections::BTreeMap<(u8, u8), Vec<PairOutcome>> = Default::default();
        for path in &args.events {
            let (_, matched) = load_matched(path, window)?;
            for (k, v) in matched.by_settings() {
                groups.entry(k).or_default().extend(v);
            }
        }
        let order = [(1u8, 1u8), (1, 2), (2, 2), (2, 1)];
        let mut comps = Vec::new();
        for key in order {
            let pairs = groups.get(&key).ok_or_else(|| {
                Error::InsufficientData(format!("no coincidences with settings a{}b{}", key.0, key.1))
            })?;
            comps.push(estimate_correlation(pairs)?);
        }
        let sources = order.iter().map(|(a, b)| format!("a{a}b{b}")).collect();
        (comps, sources, None, window)
    };
    let result = chsh_with([components[0], components[1], components[2], components[3]], bound, args.n_sigma);
    let report = ChshReport {
        tool_version: TOOL_VERSION.to_string(),
        master_seed,
        window_ns,
        sources,
        result,
    };
    let rows: Vec<(String, CorrelationEstimate)> =
        report.sources.iter().cloned().zip(report.result.components).collect();
    Ok(CommandOutput {
        name: "chsh",
        report: to_json(&report)?,
        tables: vec![("chsh.csv".into(), correlation_csv(&rows))],
    })
}

fn purity_command(args: &PurityArgs) -> Result<CommandOutput> {
    let streams = read_events(&args.events)?;
    let series = match args.series {
        SeriesKind::Joint => joint_series(&match_coincidences(&streams.a, &streams.b, args.window_ns)?)?,
        SeriesKind::A => side_series(&streams, SideArg::A)?,
        SeriesKind::B => side_series(&streams, SideArg::B)?,
    };
    let mut cfg = PurityConfig::new(args.delta_t_ns, args.alpha);
    if let Some(p) = &args.procedures {
        cfg.procedures = p.clone();
    }
    let mut rng = RunSeed::derive(args.seed, "purity").stream(REDUCTION_STREAM);
    let result = purity_protocol(&series, &cfg, &mut rng)?;
    let report = PurityReport {
        tool_version: TOOL_VERSION.to_string(),
        seed: args.seed,
        series: args.series.name().to_string(),
        n_events: series.len(),
        delta_t_ns: args.delta_t_ns,
        procedures: cfg.procedures.iter().map(|p| p.to_string()).collect(),
        result,
    };
    Ok(CommandOutput {
        name: "purity",
        tables: vec![("purity.csv".into(), purity_csv(&report.result))],
        report: to_json(&report)?,
    })
}

fn randomness_command(args: &RandomnessArgs) -> Result<CommandOutput> {
    let streams = read_events(&args.events)?;
    let events = match args.side {
        SideArg::A => &streams.a,
        SideArg::B => &streams.b,
    };
    let binary: Vec<bool> = events.iter().map(|e| e.outcome == Spin::Up).collect();
    let coded: Vec<f64> = events.iter().map(|e| f64::from(e.outcome.value())).collect();
    let runs = runs_test(&binary, args.alpha)?;
    let spectrum = periodogram(&coded)?;
    let report = RandomnessReport {
        tool_version: TOOL_VERSION.to_string(),
        side: format!("{:?}", args.side),
        n_events: events.len(),
        alpha: args.alpha,
        runs,
        periodogram: PeriodogramSummary {
            n: spectrum.n,
            dominant_frequency: spectrum.dominant_frequency,
            fisher_g: spectrum.fisher_g,
            fisher_p: spectrum.fisher_p,
            method: spectrum.method,
            reject: spectrum.fisher_p < args.alpha,
        },
    };
    let mut csv = Csv::new(&["frequency", "power"]);
    for (f, p) in spectrum.frequencies.iter().zip(&spectrum.power) {
        csv.row(&[f.to_string(), p.to_string()]);
    }
    Ok(CommandOutput {
        name: "randomness",
        report: to_json(&report)?,
        tables: vec![("periodogram.csv".into(), csv.finish())],
    })
}

fn rates_command(args: &RatesArgs) -> Result<CommandOutput> {
    let mut inputs = Vec::new();
    for path in &args.events {
        let (streams, matched) = load_matched(path, args.window_ns)?;
        inputs.extend(RateInput::from_match(&file_label(path), &matched, streams.duration_s()));
    }
    let summary = rate_summary(&inputs, args.threshold_sigma);
    let mut tables = vec![("rates.csv".to_string(), rates_csv(&summary))];
    let mut cmp = Csv::new(&["side", "row_i", "row_j", "ratio", "ratio_stderr", "z", "flagged"]);
    for c in &summary.comparisons {
        cmp.row(&[
            c.side.to_string(),
            c.row_i.to_string(),
            c.row_j.to_string(),
            opt(c.ratio),
            opt(c.ratio_stderr),
            c.z.to_string(),
            c.flagged.to_string(),
        ]);
    }
    tables.push(("rate-comparisons.csv".into(), cmp.finish()));
    let report = RatesReport {
        tool_version: TOOL_VERSION.to_string(),
        window_ns: args.window_ns,
        summary,
    };
    Ok(CommandOutput {
        name: "rates",
        report: to_json(&report)?,
        tables,
    })
}
