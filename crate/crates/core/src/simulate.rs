//! From model draws to experiment records: efficiency thinning, timestamped
//! per-side click streams, and coincidence matching.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::CapSpec;
use crate::models::{ModelId, Outcome, PairOutcome, Spin};
use crate::rng::{RandomStream, RunSeed, EMISSION_STREAM};

pub const DEFAULT_WINDOW_NS: u64 = 2000;
// Low enough that jittered emissions rarely reorder, so greedy matching
// seldom pairs clicks from different emissions.
pub const DEFAULT_PAIR_RATE_HZ: f64 = 1_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn as_char(self) -> char {
        match self {
            Side::A => 'A',
            Side::B => 'B',
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// One analyzer of an experiment: its cap and the setting index recorded in
/// event files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Analyzer {
    pub cap: CapSpec,
    pub setting: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub model_id: String,
    pub analyzer_a: Analyzer,
    pub analyzer_b: Analyzer,
    pub n_pairs: u64,
    pub efficiency_a: f64,
    pub efficiency_b: f64,
    pub pair_rate_hz: f64,
    pub coincidence_window_ns: u64,
    /// Upper bound of the per-side uniform timing jitter.
    pub jitter_ns: u64,
    pub master_seed: u64,
    pub run_id: String,
}

impl ExperimentConfig {
    /// Ideal detectors, default window and rate, jitter at a quarter window.
    pub fn new(
        model: ModelId,
        analyzer_a: Analyzer,
        analyzer_b: Analyzer,
        n_pairs: u64,
        master_seed: u64,
    ) -> Self {
        ExperimentConfig {
            model_id: model.as_str().to_string(),
            analyzer_a,
            analyzer_b,
            n_pairs,
            efficiency_a: 1.0,
            efficiency_b: 1.0,
            pair_rate_hz: DEFAULT_PAIR_RATE_HZ,
            coincidence_window_ns: DEFAULT_WINDOW_NS,
            jitter_ns: DEFAULT_WINDOW_NS / 4,
            master_seed,
            run_id: "run".to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Validation(msg));
        if self.n_pairs < 1 {
            return bad("n_pairs must be at least 1".into());
        }
        for (name, eta) in [("efficiency_a", self.efficiency_a), ("efficiency_b", self.efficiency_b)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return bad(format!("{name} must lie in (0, 1], got {eta}"));
            }
        }
        if self.coincidence_window_ns == 0 {
            return bad("coincidence_window_ns must be positive".into());
        }
        if !(self.pair_rate_hz.is_finite() && self.pair_rate_hz > 0.0) {
            return bad(format!("pair_rate_hz must be positive, got {}", self.pair_rate_hz));
        }
        for (name, s) in [("A", self.analyzer_a.setting), ("B", self.analyzer_b.setting)] {
            if !(1..=2).contains(&s) {
                return bad(format!("analyzer {name} setting must be 1 or 2, got {s}"));
            }
        }
        if self.run_id.is_empty() {
            return bad("run_id must not be empty".into());
        }
        self.model()?;
        Ok(())
    }

    pub fn model(&self) -> Result<ModelId> {
        self.model_id.parse()
    }

    pub fn run_seed(&self) -> RunSeed {
        RunSeed::derive(self.master_seed, &self.run_id)
    }

    /// The stream used by [`emit_event_streams`] in a standard run.
    pub fn emission_stream(&self) -> RandomStream {
        self.run_seed().stream(EMISSION_STREAM)
    }
}

fn thin<R: Rng + ?Sized>(outcome: Outcome, efficiency: f64, rng: &mut R) -> Outcome {
    // Always consume one draw so the stream layout is outcome-independent.
    let u: f64 = rng.random();
    if u < efficiency {
        outcome
    } else {
        Outcome::NoDetect
    }
}

/// Generates `n_pairs` outcomes. Pair `i` draws from stream `i` of the run
/// key, so the result does not depend on the thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<PairOutcome>> {
    let model = config.model()?;
    config.validate()?;
    let seed = config.run_seed();
    let (cap_a, cap_b) = (config.analyzer_a.cap, config.analyzer_b.cap);
    let pairs = (0..config.n_pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.stream(i);
            let raw = model.draw_pair(&cap_a, &cap_b, &mut rng);
            PairOutcome {
                a: thin(raw.a, config.efficiency_a, &mut rng),
                b: thin(raw.b, config.efficiency_b, &mut rng),
            }
        })
        .collect();
    Ok(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct EventRecord {
    pub time_ns: u64,
    pub side: Side,
    pub setting: u8,
    pub outcome: Spin,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventStreams {
    pub a: Vec<EventRecord>,
    pub b: Vec<EventRecord>,
}

impl EventStreams {
    pub fn len(&self) -> usize {
        self.a.len() + self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty() && self.b.is_empty()
    }

    /// Time from the earliest to the latest event on either side, in seconds.
    pub fn duration_s(&self) -> f64 {
        let times = self.a.iter().chain(&self.b).map(|e| e.time_ns);
        match (times.clone().min(), times.max()) {
            (Some(lo), Some(hi)) => (hi - lo) as f64 * 1e-9,
            _ => 0.0,
        }
    }
}

/// Event streams whose records carry the index of the pair that produced them.
#[derive(Debug, Clone, Default)]
pub struct LabeledStreams {
    pub a: Vec<(EventRecord, u64)>,
    pub b: Vec<(EventRecord, u64)>,
}

impl LabeledStreams {
    pub fn unlabeled(&self) -> EventStreams {
        EventStreams {
            a: self.a.iter().map(|(e, _)| *e).collect(),
            b: self.b.iter().map(|(e, _)| *e).collect(),
        }
    }
}

/// Like [`emit_event_streams`], keeping the ground-truth pair index of every
/// record.
pub fn emit_labeled<R: Rng + ?Sized>(
    config: &ExperimentConfig,
    pairs: &[PairOutcome],
    rng: &mut R,
) -> Result<LabeledStreams> {
    let gap = Exp::new(config.pair_rate_hz / 1e9)
        .map_err(|e| Error::Validation(format!("pair rate: {e}")))?;
    let jitter = config.jitter_ns;
    let mut out = LabeledStreams::default();
    let mut t = 0.0_f64;
    for (i, pair) in pairs.iter().enumerate() {
        t += gap.sample(rng);
        let emitted = t.round() as u64;
        let ja = rng.random_range(0..=jitter);
        let jb = rng.random_range(0..=jitter);
        let sides = [
            (Side::A, pair.a, config.analyzer_a.setting, ja),
            (Side::B, pair.b, config.analyzer_b.setting, jb),
        ];
        for (side, outcome, setting, jit) in sides {
            if let Outcome::Click(spin) = outcome {
                let rec = EventRecord {
                    time_ns: emitted + jit,
                    side,
                    setting,
                    outcome: spin,
                };
                match side {
                    Side::A => out.a.push((rec, i as u64)),
                    Side::B => out.b.push((rec, i as u64)),
                }
            }
        }
    }
    out.a.sort_by_key(|(e, _)| e.time_ns);
    out.b.sort_by_key(|(e, _)| e.time_ns);
    Ok(out)
}

/// Poisson emission times at `pair_rate_hz`, each click delayed by an
/// independent jitter uniform on `[0, jitter_ns]`; non-detections emit nothing.
/// Each side's stream is returned time-sorted.
pub fn emit_event_streams<R: Rng + ?Sized>(
    config: &ExperimentConfig,
    pairs: &[PairOutcome],
    rng: &mut R,
) -> Result<EventStreams> {
    Ok(emit_labeled(config, pairs, rng)?.unlabeled())
}

/// Outcome of coincidence matching.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoincidenceMatch {
    pub pairs: Vec<(EventRecord, EventRecord)>,
    /// Unmatched singles keyed by setting index.
    pub unmatched_a: BTreeMap<u8, u64>,
    pub unmatched_b: BTreeMap<u8, u64>,
}

impl CoincidenceMatch {
    pub fn n_unmatched_a(&self) -> u64 {
        self.unmatched_a.values().sum()
    }

    pub fn n_unmatched_b(&self) -> u64 {
        self.unmatched_b.values().sum()
    }

    /// Matched pairs grouped by `(setting_a, setting_b)`.
    pub fn by_settings(&self) -> BTreeMap<(u8, u8), Vec<PairOutcome>> {
        let mut groups: BTreeMap<(u8, u8), Vec<PairOutcome>> = BTreeMap::new();
        for (ea, eb) in &self.pairs {
            groups
                .entry((ea.setting, eb.setting))
                .or_default()
                .push(PairOutcome::new(ea.outcome, eb.outcome));
        }
        groups
    }

    pub fn pair_outcomes(&self) -> Vec<PairOutcome> {
        self.pairs
            .iter()
            .map(|(ea, eb)| PairOutcome::new(ea.outcome, eb.outcome))
            .collect()
    }
}

fn check_sorted(stream: &[EventRecord], side: Side) -> Result<()> {
    match stream.windows(2).position(|w| w[1].time_ns < w[0].time_ns) {
        Some(i) => Err(Error::UnsortedStream {
            side: side.as_char(),
            index: i + 1,
        }),
        None => Ok(()),
    }
}

/// Greedy earliest-first matching: walk both streams in time order and pair
/// the two current heads whenever `|t_A - t_B| <= window_ns`, otherwise drop
/// the earlier head as an unmatched single.
pub fn match_coincidences(
    stream_a: &[EventRecord],
    stream_b: &[EventRecord],
    window_ns: u64,
) -> Result<CoincidenceMatch> {
    check_sorted(stream_a, Side::A)?;
    check_sorted(stream_b, Side::B)?;
    let mut out = CoincidenceMatch::default();
    let (mut i, mut j) = (0, 0);
    while i < stream_a.len() && j < stream_b.len() {
        let (ea, eb) = (stream_a[i], stream_b[j]);
        if ea.time_ns.abs_diff(eb.time_ns) <= window_ns {
            out.pairs.push((ea, eb));
            i += 1;
            j += 1;
        } else if ea.time_ns < eb.time_ns {
            *out.unmatched_a.entry(ea.setting).or_default() += 1;
            i += 1;
        } else {
            *out.unmatched_b.entry(eb.setting).or_default() += 1;
            j += 1;
        }
    }
    for e in &stream_a[i..] {
        *out.unmatched_a.entry(e.setting).or_default() += 1;
    }
    for e in &stream_b[j..] {
        *out.unmatched_b.entry(e.setting).or_default() += 1;
    }
    Ok(out)
}

/// Everything produced by one simulated run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub pairs: Vec<PairOutcome>,
    pub streams: EventStreams,
    pub matched: CoincidenceMatch,
}

/// Pairs, event streams on the run's emission stream, and coincidences at the
/// configured window.
pub fn simulate_run(config: &ExperimentConfig) -> Result<RunOutput> {
    let pairs = run_experiment(config)?;
    let streams = emit_event_streams(config, &pairs, &mut config.emission_stream())?;
    let matched = match_coincidences(&streams.a, &streams.b, config.coincidence_window_ns)?;
    Ok(RunOutput {
        pairs,
        streams,
        matched,
    })
}
