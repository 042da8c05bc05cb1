//! Local realistic hidden-variable models.
//!
//! The hidden value is drawn independently of both analyzer directions and
//! fixes each side's ±1 response deterministically. Any such model, averaged
//! over a probability measure on hidden values, obeys the CHSH bound 2.

use std::f64::consts::TAU;

use rand::Rng;

use super::{McEstimate, Spin};
use crate::error::{Error, Result};
use crate::geometry::{sample_sphere, Direction};

pub trait LrhvModel: Sync {
    type Hidden;

    /// Draws a hidden value. Must not depend on any analyzer setting.
    fn sample_hidden<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Hidden;

    fn response_a(&self, hidden: &Self::Hidden, a: &Direction) -> Spin;

    fn response_b(&self, hidden: &Self::Hidden, b: &Direction) -> Spin;

    /// Positive weights summing to one that approximate the hidden-value
    /// distribution; finer with growing `resolution`.
    fn hidden_quadrature(&self, resolution: usize) -> Vec<(Self::Hidden, f64)>;
}

/// Bell's model: `λ` uniform on the sphere, `A = sign(λ·a)`, `B = -sign(λ·b)`.
///
/// Its correlation is `-1 + 2θ/π`, which meets the singlet curve at
/// `θ ∈ {0, π/2, π}` and saturates the CHSH bound at the optimal settings.
#[derive(Debug, Clone, Copy, Default)]
pub struct BellLinearModel;

impl BellLinearModel {
    pub fn correlation_closed_form(theta: f64) -> f64 {
        -1.0 + 2.0 * theta / std::f64::consts::PI
    }
}

impl LrhvModel for BellLinearModel {
    type Hidden = Direction;

    fn sample_hidden<R: Rng + ?Sized>(&self, rng: &mut R) -> Direction {
        sample_sphere(rng)
    }

    fn response_a(&self, hidden: &Direction, a: &Direction) -> Spin {
        Spin::sign_of(hidden.dot(a))
    }

    fn response_b(&self, hidden: &Direction, b: &Direction) -> Spin {
        Spin::sign_of(hidden.dot(b)).flip()
    }

    fn hidden_quadrature(&self, resolution: usize) -> Vec<(Direction, f64)> {
        sphere_grid(resolution.max(1), 2 * resolution.max(1))
    }
}

/// Equal-area midpoint grid on the sphere: `n_z` bands uniform in `cos θ`,
/// each cut into `n_phi` cells. Every node carries weight `1/(n_z·n_phi)`.
pub fn sphere_grid(n_z: usize, n_phi: usize) -> Vec<(Direction, f64)> {
    let w = 1.0 / (n_z * n_phi) as f64;
    let mut nodes = Vec::with_capacity(n_z * n_phi);
    for i in 0..n_z {
        let cos_theta = -1.0 + 2.0 * (i as f64 + 0.5) / n_z as f64;
        let theta = cos_theta.acos();
        // Staggering alternate bands breaks the alignment of cell edges with
        // great circles through the poles.
        let offset = if i % 2 == 0 { 0.5 } else { 0.0 };
        for j in 0..n_phi {
            let phi = TAU * (j as f64 + offset) / n_phi as f64;
            nodes.push((Direction::from_spherical(theta, phi), w));
        }
    }
    nodes
}

/// Empirical mean of `A(λ,a)·B(λ,b)` over `n_samples` independent hidden values.
pub fn lrhv_correlation<M: LrhvModel, R: Rng + ?Sized>(
    model: &M,
    a: &Direction,
    b: &Direction,
    n_samples: u64,
    rng: &mut R,
) -> Result<McEstimate> {
    if n_samples < 1000 {
        return Err(Error::Domain(format!(
            "hidden-variable correlation needs at least 1000 samples, got {n_samples}"
        )));
    }
    let mut sum = 0i64;
    for _ in 0..n_samples {
        let h = model.sample_hidden(rng);
        sum += (model.response_a(&h, a).value() * model.response_b(&h, b).value()) as i64;
    }
    // Products are ±1, so the sample variance follows from the mean alone.
    let sum = sum as f64;
    Ok(McEstimate::from_sums(sum, n_samples as f64, n_samples))
}

/// Correlation integrated against the model's hidden-value quadrature.
pub fn quadrature_correlation<M: LrhvModel>(
    model: &M,
    a: &Direction,
    b: &Direction,
    resolution: usize,
) -> f64 {
    quadrature_correlations(model, &[(*a, *b)], resolution)[0]
}

/// Several correlations sharing one quadrature pass.
pub fn quadrature_correlations<M: LrhvModel>(
    model: &M,
    settings: &[(Direction, Direction)],
    resolution: usize,
) -> Vec<f64> {
    let nodes = model.hidden_quadrature(resolution);
    let mut acc = vec![0.0; settings.len()];
    for (h, w) in &nodes {
        for (slot, (a, b)) in acc.iter_mut().zip(settings) {
            let prod = model.response_a(h, a).value() * model.response_b(h, b).value();
            *slot += w * prod as f64;
        }
    }
    acc
}
