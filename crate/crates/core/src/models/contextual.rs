//! Contextual local models.
//!
//! Each experiment `(A, B)` gets its own hidden-variable space: a pair
//! `(λ₁, λ₂)` travels to the two sides, microscopic analyzer directions are
//! drawn from the caps, and each side responds using only its own hidden value
//! and its own microscopic direction. Two mechanisms let such a model reach the
//! singlet correlations:
//!
//! * [`RejectionModel`]: the hidden pair is setting-independent, but side A
//!   fails to click with a probability that depends on `λ₁` and the local
//!   direction. Post-selecting coincidences restores `-cos θ`.
//! * [`SettingLambdaModel`]: the source draws `(λ₁, λ₂)` from a distribution
//!   that depends on the experiment's macroscopic settings, so the spaces of
//!   different experiments do not overlap.
//!
//! Both are reference constructions for exercising the CHSH machinery.

use rand::Rng;

use super::{Outcome, PairOutcome, Spin};
use crate::geometry::{sample_cap, sample_sphere, CapSpec, Direction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mechanism {
    SettingDependentLambda,
    DetectionRejection,
}

/// Hidden value carried to one side: an axis plus a uniform draw that fixes
/// any detection decision deterministically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalHidden {
    pub axis: Direction,
    pub detect_draw: f64,
}

pub trait ContextualModel: Sync {
    fn mechanism(&self) -> Mechanism;

    /// Draws `(λ₁, λ₂)` for the experiment with macroscopic analyzers
    /// `settings`. Setting-independent models ignore the argument.
    fn sample_hidden_pair<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        settings: (&CapSpec, &CapSpec),
    ) -> (LocalHidden, LocalHidden);

    fn response_a(&self, hidden: &LocalHidden, a: &Direction) -> Outcome;

    fn response_b(&self, hidden: &LocalHidden, b: &Direction) -> Outcome;
}

/// One pair from a contextual model; non-detections are kept.
pub fn contextual_pair<M: ContextualModel + ?Sized, R: Rng + ?Sized>(
    model: &M,
    a: &CapSpec,
    b: &CapSpec,
    rng: &mut R,
) -> PairOutcome {
    let (l1, l2) = model.sample_hidden_pair(rng, (a, b));
    let da = sample_cap(a, rng);
    let db = sample_cap(b, rng);
    PairOutcome {
        a: model.response_a(&l1, &da),
        b: model.response_b(&l2, &db),
    }
}

/// `λ` uniform on the sphere, shared as `(λ, -λ)`. Each side answers
/// `sign(λᵢ·x)`. Side A clicks only when its uniform draw falls below
/// `|λ₁·a|`; side B always clicks.
///
/// Conditioning on A's click reweights `λ` by `|λ·a|`, which turns the
/// coincidence correlation into exactly `-a·b`. A's singles efficiency is 1/2.
#[derive(Debug, Clone, Copy, Default)]
pub struct RejectionModel;

impl ContextualModel for RejectionModel {
    fn mechanism(&self) -> Mechanism {
        Mechanism::DetectionRejection
    }

    fn sample_hidden_pair<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        _settings: (&CapSpec, &CapSpec),
    ) -> (LocalHidden, LocalHidden) {
        let axis = sample_sphere(rng);
        let detect_draw = rng.random::<f64>();
        (
            LocalHidden { axis, detect_draw },
            LocalHidden {
                axis: axis.neg(),
                detect_draw: 0.0,
            },
        )
    }

    fn response_a(&self, hidden: &LocalHidden, a: &Direction) -> Outcome {
        let proj = hidden.axis.dot(a);
        if hidden.detect_draw < proj.abs() {
            Outcome::Click(Spin::sign_of(proj))
        } else {
            Outcome::NoDetect
        }
    }

    fn response_b(&self, hidden: &LocalHidden, b: &Direction) -> Outcome {
        Outcome::Click(Spin::sign_of(hidden.axis.dot(b)))
    }
}

/// The source knows the macroscopic settings `(A, B)`. It draws `λ₁` uniform,
/// predicts A's answer `x = sign(λ₁·A)`, then picks B's answer `y = -x` with
/// probability `(1 + cos θ_AB)/2` and encodes it as `λ₂ = y·B`. Each side
/// answers `sign(λᵢ·x)` with its microscopic direction and always clicks.
///
/// With sharp caps the correlation is exactly `-cos θ_AB`; B's answer is
/// reproduced faithfully whenever `ε_B < 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SettingLambdaModel;

impl ContextualModel for SettingLambdaModel {
    fn mechanism(&self) -> Mechanism {
        Mechanism::SettingDependentLambda
    }

    fn sample_hidden_pair<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        (a, b): (&CapSpec, &CapSpec),
    ) -> (LocalHidden, LocalHidden) {
        let l1 = sample_sphere(rng);
        let x = Spin::sign_of(l1.dot(&a.center()));
        let p_opposite = (1.0 + a.center().dot(&b.center()).clamp(-1.0, 1.0)) / 2.0;
        let y = if rng.random::<f64>() < p_opposite {
            x.flip()
        } else {
            x
        };
        let axis_b = match y {
            Spin::Up => b.center(),
            Spin::Down => b.center().neg(),
        };
        (
            LocalHidden {
                axis: l1,
                detect_draw: 0.0,
            },
            LocalHidden {
                axis: axis_b,
                detect_draw: 0.0,
            },
        )
    }

    fn response_a(&self, hidden: &LocalHidden, a: &Direction) -> Outcome {
        Outcome::Click(Spin::sign_of(hidden.axis.dot(a)))
    }

    fn response_b(&self, hidden: &LocalHidden, b: &Direction) -> Outcome {
        Outcome::Click(Spin::sign_of(hidden.axis.dot(b)))
    }
}
