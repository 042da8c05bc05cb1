//! Generative models of pair outcomes and their correlation functions.
//!
//! * `qt-ideal`: singlet statistics at the macroscopic analyzer directions.
//! * `qt-smeared`: singlet statistics at microscopic directions drawn from the
//!   analyzer caps.
//! * `lrhv-linear`: a shared hidden unit vector with deterministic local sign
//!   responses and a setting-independent distribution.
//! * `ctx-rejection`, `ctx-setting-lambda`: contextual reference models, see
//!   [`contextual`].

pub mod contextual;
pub mod lrhv;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{angle_between, sample_cap, CapSpec, Direction};

pub use contextual::{
    contextual_pair, ContextualModel, LocalHidden, Mechanism, RejectionModel, SettingLambdaModel,
};
pub use lrhv::{lrhv_correlation, quadrature_correlation, quadrature_correlations, BellLinearModel, LrhvModel};

/// A detected spin projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn value(self) -> i8 {
        match self {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }

    /// `+1` for non-negative arguments, `-1` otherwise.
    pub fn sign_of(x: f64) -> Spin {
        if x >= 0.0 {
            Spin::Up
        } else {
            Spin::Down
        }
    }

    pub fn flip(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

impl Serialize for Spin {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.value())
    }
}

/// Result on one side of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Click(Spin),
    NoDetect,
}

impl Outcome {
    pub fn spin(self) -> Option<Spin> {
        match self {
            Outcome::Click(s) => Some(s),
            Outcome::NoDetect => None,
        }
    }

    pub fn is_detected(self) -> bool {
        matches!(self, Outcome::Click(_))
    }
}

impl From<Spin> for Outcome {
    fn from(s: Spin) -> Self {
        Outcome::Click(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairOutcome {
    pub a: Outcome,
    pub b: Outcome,
}

impl PairOutcome {
    pub fn new(a: impl Into<Outcome>, b: impl Into<Outcome>) -> Self {
        PairOutcome {
            a: a.into(),
            b: b.into(),
        }
    }

    /// Both spins, if both sides clicked.
    pub fn coincidence(&self) -> Option<(Spin, Spin)> {
        Some((self.a.spin()?, self.b.spin()?))
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub n_samples: u64,
}

impl McEstimate {
    pub fn exact(value: f64) -> Self {
        McEstimate {
            estimate: value,
            stderr: 0.0,
            n_samples: 0,
        }
    }

    pub(crate) fn from_sums(sum: f64, sum_sq: f64, n: u64) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 {
            ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        McEstimate {
            estimate: mean,
            stderr: (var / nf).sqrt(),
            n_samples: n,
        }
    }
}

/// Joint outcome probabilities of one pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointProbs {
    pub p_pp: f64,
    pub p_pm: f64,
    pub p_mp: f64,
    pub p_mm: f64,
}

impl JointProbs {
    pub fn total(&self) -> f64 {
        self.p_pp + self.p_pm + self.p_mp + self.p_mm
    }

    /// `p_pp + p_mm - p_pm - p_mp`.
    pub fn correlation(&self) -> f64 {
        self.p_pp + self.p_mm - self.p_pm - self.p_mp
    }

    pub fn marginal_a_up(&self) -> f64 {
        self.p_pp + self.p_pm
    }

    pub fn marginal_b_up(&self) -> f64 {
        self.p_pp + self.p_mp
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Spin, Spin) {
        let u: f64 = rng.random();
        // Strict comparisons: an empty leading cell is never selected.
        if u < self.p_pp {
            (Spin::Up, Spin::Up)
        } else if u < self.p_pp + self.p_pm {
            (Spin::Up, Spin::Down)
        } else if u < self.p_pp + self.p_pm + self.p_mp {
            (Spin::Down, Spin::Up)
        } else {
            (Spin::Down, Spin::Down)
        }
    }
}

/// Singlet correlation `-cos θ_ab`.
pub fn qt_correlation(a: &Direction, b: &Direction) -> f64 {
    -a.dot(b).clamp(-1.0, 1.0)
}

/// Singlet outcome table at relative angle `theta`.
///
/// Uniform marginals plus `E = -cos θ` fix the table completely.
pub fn singlet_joint_probs(theta: f64) -> JointProbs {
    joint_probs_from_cos(theta.cos())
}

fn joint_probs_from_cos(cos_theta: f64) -> JointProbs {
    let c = cos_theta.clamp(-1.0, 1.0);
    let same = (1.0 - c) / 4.0;
    let diff = (1.0 + c) / 4.0;
    JointProbs {
        p_pp: same,
        p_pm: diff,
        p_mp: diff,
        p_mm: same,
    }
}

/// Monte Carlo estimate of the cap-smeared singlet correlation.
///
/// Two sharp caps short-circuit to the exact `-cos θ_AB` with zero error.
pub fn smeared_correlation<R: Rng + ?Sized>(
    a: &CapSpec,
    b: &CapSpec,
    n_samples: u64,
    rng: &mut R,
) -> Result<McEstimate> {
    if a.is_sharp() && b.is_sharp() {
        return Ok(McEstimate::exact(qt_correlation(&a.center(), &b.center())));
    }
    if n_samples < 1000 {
        return Err(Error::Domain(format!(
            "smeared correlation needs at least 1000 samples, got {n_samples}"
        )));
    }
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_samples {
        let da = sample_cap(a, rng);
        let db = sample_cap(b, rng);
        let v = qt_correlation(&da, &db);
        sum += v;
        sum_sq += v * v;
    }
    Ok(McEstimate::from_sums(sum, sum_sq, n_samples))
}

/// Closed form of the smeared correlation for solid-angle-uniform caps.
///
/// The cap mean is `(1 - ε/2)·center`, and the double integral of `-a·b`
/// factorises over independent caps.
pub fn smeared_correlation_closed_form(a: &CapSpec, b: &CapSpec) -> f64 {
    a.mean_projection() * b.mean_projection() * qt_correlation(&a.center(), &b.center())
}

/// Registry of generative models addressable from configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelId {
    QtIdeal,
    QtSmeared,
    LrhvLinear,
    CtxRejection,
    CtxSettingLambda,
}

impl ModelId {
    pub const ALL: [ModelId; 5] = [
        ModelId::QtIdeal,
        ModelId::QtSmeared,
        ModelId::LrhvLinear,
        ModelId::CtxRejection,
        ModelId::CtxSettingLambda,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::QtIdeal => "qt-ideal",
            ModelId::QtSmeared => "qt-smeared",
            ModelId::LrhvLinear => "lrhv-linear",
            ModelId::CtxRejection => "ctx-rejection",
            ModelId::CtxSettingLambda => "ctx-setting-lambda",
        }
    }

    /// Draws one pair for analyzers `a` and `b`. No efficiency thinning is applied.
    pub fn draw_pair<R: Rng + ?Sized>(self, a: &CapSpec, b: &CapSpec, rng: &mut R) -> PairOutcome {
        match self {
            ModelId::QtIdeal => {
                let theta = angle_between(&a.center(), &b.center());
                let (sa, sb) = singlet_joint_probs(theta).sample(rng);
                PairOutcome::new(sa, sb)
            }
            ModelId::QtSmeared => {
                let da = sample_cap(a, rng);
                let db = sample_cap(b, rng);
                let (sa, sb) = joint_probs_from_cos(da.dot(&db)).sample(rng);
                PairOutcome::new(sa, sb)
            }
            ModelId::LrhvLinear => {
                let model = BellLinearModel;
                let da = sample_cap(a, rng);
                let db = sample_cap(b, rng);
                let hidden = model.sample_hidden(rng);
                PairOutcome::new(model.response_a(&hidden, &da), model.response_b(&hidden, &db))
            }
            ModelId::CtxRejection => contextual_pair(&RejectionModel, a, b, rng),
            ModelId::CtxSettingLambda => contextual_pair(&SettingLambdaModel, a, b, rng),
        }
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ModelId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}
