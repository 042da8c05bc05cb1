//! TOML experiment configuration.
//!
//! A file describes either one run, with `[analyzer_a]` and `[analyzer_b]`
//! tables, or a CHSH campaign with a `[chsh]` table of four angles. Unknown
//! keys are rejected.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{CapSpec, Direction};
use crate::models::ModelId;
use crate::simulate::{Analyzer, ExperimentConfig, DEFAULT_PAIR_RATE_HZ, DEFAULT_WINDOW_NS};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: String,
    n_pairs: i64,
    seed: u64,
    run_id: Option<String>,
    efficiency_a: Option<f64>,
    efficiency_b: Option<f64>,
    window_ns: Option<i64>,
    jitter_ns: Option<i64>,
    pair_rate_hz: Option<f64>,
    /// Cap size for every analyzer that does not set its own.
    epsilon: Option<f64>,
    analyzer_a: Option<RawAnalyzer>,
    analyzer_b: Option<RawAnalyzer>,
    chsh: Option<RawChsh>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalyzer {
    /// Angle from +z towards +x, in degrees.
    angle_deg: Option<f64>,
    direction: Option<[f64; 3]>,
    epsilon: Option<f64>,
    setting: Option<u8>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChsh {
    a: f64,
    a_prime: f64,
    b: f64,
    b_prime: f64,
}

/// Four runs in the order `(a,b)`, `(a,b′)`, `(a′,b′)`, `(a′,b)`, sharing one
/// master seed. Primed settings carry setting index 2.
#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub runs: [ExperimentConfig; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigFile {
    Single(ExperimentConfig),
    Campaign(Campaign),
}

impl ConfigFile {
    pub fn runs(&self) -> Vec<&ExperimentConfig> {
        match self {
            ConfigFile::Single(c) => vec![c],
            ConfigFile::Campaign(c) => c.runs.iter().collect(),
        }
    }

    fn runs_mut(&mut self) -> Vec<&mut ExperimentConfig> {
        match self {
            ConfigFile::Single(c) => vec![c],
            ConfigFile::Campaign(c) => c.runs.iter_mut().collect(),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.runs()[0].master_seed
    }

    /// Replaces the seed and/or coincidence window of every run, then
    /// revalidates.
    pub fn apply_overrides(&mut self, seed: Option<u64>, window_ns: Option<u64>) -> Result<()> {
        for run in self.runs_mut() {
            if let Some(s) = seed {
                run.master_seed = s;
            }
            if let Some(w) = window_ns {
                run.coincidence_window_ns = w;
            }
            run.validate()?;
        }
        Ok(())
    }
}

pub fn parse_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text, &path.display().to_string())
}

/// Parses configuration text; `origin` names the source in diagnostics.
pub fn parse_config_str(text: &str, origin: &str) -> Result<ConfigFile> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        let message = match line {
            Some(l) => format!("line {l}: {}", e.message()),
            None => e.message().to_string(),
        };
        Error::Parse {
            path: origin.to_string(),
            message,
        }
    })?;
    build(raw)
}

fn non_negative(name: &str, v: i64) -> Result<u64> {
    u64::try_from(v).map_err(|_| Error::Validation(format!("{name} must be non-negative, got {v}")))
}

fn cap(direction: Direction, epsilon: f64) -> Result<CapSpec> {
    CapSpec::new(direction, epsilon).map_err(|e| Error::Validation(e.to_string()))
}

fn analyzer(raw: &RawAnalyzer, default_eps: f64, default_setting: u8, side: char) -> Result<Analyzer> {
    let direction = match (raw.angle_deg, raw.direction) {
        (Some(deg), None) => Direction::in_xz_plane(deg.to_radians()),
        (None, Some([x, y, z])) => Direction::new(x, y, z).map_err(|e| Error::Validation(e.to_string()))?,
        (None, None) => {
            return Err(Error::Validation(format!(
                "analyzer_{side} needs angle_deg or direction"
            )))
        }
        (Some(_), Some(_)) => {
            return Err(Error::Validation(format!(
                "analyzer_{side} sets both angle_deg and direction"
            )))
        }
    };
    Ok(Analyzer {
        cap: cap(direction, raw.epsilon.unwrap_or(default_eps))?,
        setting: raw.setting.unwrap_or(default_setting),
    })
}

fn build(raw: RawConfig) -> Result<ConfigFile> {
    let model: ModelId = raw.model.parse().map_err(|e: Error| Error::Validation(e.to_string()))?;
    if raw.n_pairs < 1 {
        return Err(Error::Validation(format!("n_pairs must be at least 1, got {}", raw.n_pairs)));
    }
    let eps = raw.epsilon.unwrap_or(0.0);
    let window = match raw.window_ns {
        Some(w) => non_negative("window_ns", w)?,
        None => DEFAULT_WINDOW_NS,
    };
    let jitter = match raw.jitter_ns {
        Some(j) => non_negative("jitter_ns", j)?,
        None => window / 4,
    };
    let make = |a: Analyzer, b: Analyzer, run_id: String| -> Result<ExperimentConfig> {
        let mut c = ExperimentConfig::new(model, a, b, raw.n_pairs as u64, raw.seed);
        c.efficiency_a = raw.efficiency_a.unwrap_or(1.0);
        c.efficiency_b = raw.efficiency_b.unwrap_or(1.0);
        c.pair_rate_hz = raw.pair_rate_hz.unwrap_or(DEFAULT_PAIR_RATE_HZ);
        c.coincidence_window_ns = window;
        c.jitter_ns = jitter;
        c.run_id = run_id;
        c.validate()?;
        Ok(c)
    };

    match (&raw.chsh, &raw.analyzer_a, &raw.analyzer_b) {
        (Some(angles), None, None) => {
            let prefix = raw.run_id.clone().unwrap_or_else(|| "chsh".into());
            let side = |deg: f64, setting: u8| -> Result<Analyzer> {
                Ok(Analyzer {
                    cap: cap(Direction::in_xz_plane(deg.to_radians()), eps)?,
                    setting,
                })
            };
            let (a, a2) = (side(angles.a, 1)?, side(angles.a_prime, 2)?);
            let (b, b2) = (side(angles.b, 1)?, side(angles.b_prime, 2)?);
            let runs = [(a, b), (a, b2), (a2, b2), (a2, b)].map(|(x, y)| {
                make(x, y, format!("{prefix}-a{}b{}", x.setting, y.setting))
            });
            let [r0, r1, r2, r3] = runs;
            Ok(ConfigFile::Campaign(Campaign {
                runs: [r0?, r1?, r2?, r3?],
            }))
        }
        (None, Some(ra), Some(rb)) => {
            let a = analyzer(ra, eps, 1, 'a')?;
            let b = analyzer(rb, eps, 1, 'b')?;
            Ok(ConfigFile::Single(make(a, b, raw.run_id.clone().unwrap_or_else(|| "run".into()))?))
        }
        (Some(_), _, _) => Err(Error::Validation(
            "a campaign file must not contain analyzer tables".into(),
        )),
        _ => Err(Error::Validation(
            "config needs both [analyzer_a] and [analyzer_b], or a [chsh] table".into(),
        )),
    }
}
