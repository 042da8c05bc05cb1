use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Time-ordered category labels in `[0, n_categories)`, optionally timestamped
/// in nanoseconds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CategoricalSeries {
    values: Vec<u32>,
    timestamps: Option<Vec<u64>>,
    n_categories: u32,
}

impl CategoricalSeries {
    pub fn new(values: Vec<u32>, n_categories: u32) -> Result<Self> {
        if let Some(v) = values.iter().find(|&&v| v >= n_categories) {
            return Err(Error::Domain(format!(
                "label {v} outside [0, {n_categories})"
            )));
        }
        Ok(CategoricalSeries {
            values,
            timestamps: None,
            n_categories,
        })
    }

    /// Timestamps must match the values in length and be non-decreasing.
    pub fn with_timestamps(values: Vec<u32>, timestamps: Vec<u64>, n_categories: u32) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(Error::Domain(format!(
                "{} timestamps for {} values",
                timestamps.len(),
                values.len()
            )));
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::Domain(format!("timestamps decrease at index {}", i + 1)));
        }
        let mut s = Self::new(values, n_categories)?;
        s.timestamps = Some(timestamps);
        Ok(s)
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn timestamps(&self) -> Option<&[u64]> {
        self.timestamps.as_deref()
    }

    pub fn n_categories(&self) -> u32 {
        self.n_categories
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Count of each category.
    pub fn tally(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.n_categories as usize];
        for &v in &self.values {
            counts[v as usize] += 1;
        }
        counts
    }

    /// Labels as ordinal values for the rank tests.
    pub fn as_ordinal(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }

    fn select(&self, keep: &[bool]) -> (CategoricalSeries, CategoricalSeries) {
        let mut kept = (Vec::new(), Vec::new());
        let mut dropped = (Vec::new(), Vec::new());
        for (i, (&v, &k)) in self.values.iter().zip(keep).enumerate() {
            let dst = if k { &mut kept } else { &mut dropped };
            dst.0.push(v);
            if let Some(ts) = &self.timestamps {
                dst.1.push(ts[i]);
            }
        }
        let build = |(values, ts): (Vec<u32>, Vec<u64>)| CategoricalSeries {
            values,
            timestamps: self.timestamps.as_ref().map(|_| ts),
            n_categories: self.n_categories,
        };
        (build(kept), build(dropped))
    }
}

/// Splits a timestamped series into consecutive half-open windows of width
/// `delta_t_ns`, starting at the first timestamp. Empty windows are dropped.
pub fn segment_by_time(series: &CategoricalSeries, delta_t_ns: u64) -> Result<Vec<CategoricalSeries>> {
    let ts = series.timestamps().ok_or(Error::MissingTimestamps)?;
    if delta_t_ns == 0 {
        return Err(Error::Domain("window width must be positive".into()));
    }
    let Some(&origin) = ts.first() else {
        return Ok(Vec::new());
    };
    let mut segments = Vec::new();
    let mut start = 0;
    while start < ts.len() {
        let window = (ts[start] - origin) / delta_t_ns;
        let end = start + ts[start..].partition_point(|&t| (t - origin) / delta_t_ns == window);
        segments.push(CategoricalSeries {
            values: series.values[start..end].to_vec(),
            timestamps: Some(ts[start..end].to_vec()),
            n_categories: series.n_categories,
        });
        start = end;
    }
    Ok(segments)
}

/// Beam-intensity reduction procedures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "parameter", rename_all = "kebab-case")]
pub enum Reduction {
    /// Keep each event independently with probability `p`.
    BernoulliThin(f64),
    /// Keep events `0, k, 2k, ...`.
    Decimate(usize),
    /// Keep the leading fraction of the time span (of the event count when the
    /// series has no timestamps).
    TimeTruncate(f64),
}

impl Reduction {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Reduction::BernoulliThin(p) => p > 0.0 && p <= 1.0,
            Reduction::Decimate(k) => k >= 1,
            Reduction::TimeTruncate(f) => f > 0.0 && f <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid reduction parameter in {self}")))
        }
    }
}

impl fmt::Display for Reduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reduction::BernoulliThin(p) => write!(f, "thin:{p}"),
            Reduction::Decimate(k) => write!(f, "decimate:{k}"),
            Reduction::TimeTruncate(x) => write!(f, "truncate:{x}"),
        }
    }
}

impl FromStr for Reduction {
    type Err = Error;

    /// Parses `thin:<p>`, `decimate:<k>` or `truncate:<fraction>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("cannot parse reduction `{s}`"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let r = match kind.trim() {
            "thin" => Reduction::BernoulliThin(arg.trim().parse().map_err(|_| bad())?),
            "decimate" => Reduction::Decimate(arg.trim().parse().map_err(|_| bad())?),
            "truncate" => Reduction::TimeTruncate(arg.trim().parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        r.validate()?;
        Ok(r)
    }
}

/// Applies a reduction and returns `(kept, discarded)`, both in original order.
pub fn split_by_procedure<R: Rng + ?Sized>(
    series: &CategoricalSeries,
    procedure: Reduction,
    rng: &mut R,
) -> Result<(CategoricalSeries, CategoricalSeries)> {
    procedure.validate()?;
    let n = series.len();
    let keep: Vec<bool> = match procedure {
        Reduction::BernoulliThin(p) => (0..n).map(|_| rng.random::<f64>() < p).collect(),
        Reduction::Decimate(k) => (0..n).map(|i| i % k == 0).collect(),
        Reduction::TimeTruncate(fraction) => match series.timestamps() {
            Some(ts) if !ts.is_empty() => {
                let (t0, t1) = (ts[0], ts[n - 1]);
                let cutoff = fraction * (t1 - t0) as f64;
                ts.iter().map(|&t| ((t - t0) as f64) <= cutoff).collect()
            }
            _ => {
                let m = (fraction * n as f64).ceil() as usize;
                (0..n).map(|i| i < m).collect()
            }
        },
    };
    Ok(series.select(&keep))
}

/// The kept part of [`split_by_procedure`].
pub fn reduce_intensity<R: Rng + ?Sized>(
    series: &CategoricalSeries,
    procedure: Reduction,
    rng: &mut R,
) -> Result<CategoricalSeries> {
    Ok(split_by_procedure(series, procedure, rng)?.0)
}
