//! Unit directions on the sphere and analyzer caps.
//!
//! An analyzer with macroscopic orientation `A` is modelled as a distribution of
//! microscopic directions `a` supported on the cap `{a : 1 - a·A <= epsilon}`.
//! The only shipped density is uniform by solid angle, under which the scalar
//! `1 - a·A` is uniform on `[0, epsilon]`.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

const UNIT_TOLERANCE: f64 = 1e-12;

/// A unit 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Direction {
    x: f64,
    y: f64,
    z: f64,
}

impl Direction {
    pub const X: Direction = Direction { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: Direction = Direction { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: Direction = Direction { x: 0.0, y: 0.0, z: 1.0 };

    /// Normalizes `(x, y, z)`; fails on zero-length or non-finite input.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidDirection(format!(
                "cannot normalize ({x}, {y}, {z})"
            )));
        }
        Ok(Self::normalized(x / norm, y / norm, z / norm))
    }

    // One extra Newton step on the norm brings |d| to within a few ulps of 1.
    fn normalized(x: f64, y: f64, z: f64) -> Self {
        let n2 = x * x + y * y + z * z;
        let scale = 1.5 - 0.5 * n2;
        Direction {
            x: x * scale,
            y: y * scale,
            z: z * scale,
        }
    }

    /// Direction at `angle` radians from +z, rotated towards +x.
    ///
    /// Analyzer settings given as a single angle live on this great circle.
    pub fn in_xz_plane(angle: f64) -> Self {
        Self::normalized(angle.sin(), 0.0, angle.cos())
    }

    /// Direction with polar angle `theta` from +z and azimuth `phi` from +x.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let s = theta.sin();
        Self::normalized(s * phi.cos(), s * phi.sin(), theta.cos())
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn neg(&self) -> Direction {
        Direction {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Two unit vectors completing `self` to a right-handed orthonormal frame.
    pub fn orthonormal_basis(&self) -> (Direction, Direction) {
        // Branchless frame construction (Duff et al.), stable for every input.
        let sign = 1.0_f64.copysign(self.z);
        let a = -1.0 / (sign + self.z);
        let b = self.x * self.y * a;
        let e1 = Direction::normalized(1.0 + sign * self.x * self.x * a, sign * b, -sign * self.x);
        let e2 = Direction::normalized(b, sign + self.y * self.y * a, -self.y);
        (e1, e2)
    }

    /// Azimuth of `self` around `axis`, in `[0, 2π)`, measured in the frame of
    /// [`Direction::orthonormal_basis`].
    pub fn azimuth_about(&self, axis: &Direction) -> f64 {
        let (e1, e2) = axis.orthonormal_basis();
        let phi = self.dot(&e2).atan2(self.dot(&e1));
        if phi < 0.0 {
            phi + TAU
        } else {
            phi
        }
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - 1.0).abs() <= UNIT_TOLERANCE
    }
}

/// Angle between two directions in `[0, π]`.
pub fn angle_between(a: &Direction, b: &Direction) -> f64 {
    a.dot(b).clamp(-1.0, 1.0).acos()
}

/// Isotropic direction on the whole sphere.
pub fn sample_sphere<R: Rng + ?Sized>(rng: &mut R) -> Direction {
    let cos_theta = 1.0 - 2.0 * rng.random::<f64>();
    let phi = TAU * rng.random::<f64>();
    let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
    Direction::normalized(sin_theta * phi.cos(), sin_theta * phi.sin(), cos_theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapDistribution {
    #[default]
    UniformSolidAngle,
}

/// Support and density of an analyzer's microscopic directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapSpec {
    center: Direction,
    epsilon: f64,
    distribution: CapDistribution,
}

impl CapSpec {
    pub fn new(center: Direction, epsilon: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&epsilon) {
            return Err(Error::InvalidCap(format!(
                "epsilon must lie in [0, 2], got {epsilon}"
            )));
        }
        Ok(CapSpec {
            center,
            epsilon,
            distribution: CapDistribution::UniformSolidAngle,
        })
    }

    /// A sharp analyzer: the delta distribution at `center`.
    pub fn sharp(center: Direction) -> Self {
        CapSpec {
            center,
            epsilon: 0.0,
            distribution: CapDistribution::UniformSolidAngle,
        }
    }

    pub fn center(&self) -> Direction {
        self.center
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn distribution(&self) -> CapDistribution {
        self.distribution
    }

    pub fn is_sharp(&self) -> bool {
        self.epsilon == 0.0
    }

    pub fn contains(&self, d: &Direction) -> bool {
        1.0 - d.dot(&self.center) <= self.epsilon + UNIT_TOLERANCE
    }

    /// Expected microscopic direction, `(1 - epsilon/2) * center`.
    pub fn mean_projection(&self) -> f64 {
        1.0 - self.epsilon / 2.0
    }

    /// Solid angle of the cap in steradians.
    pub fn solid_angle(&self) -> f64 {
        2.0 * PI * self.epsilon
    }
}

/// Draws one microscopic direction from the cap.
///
/// The polar cosine is uniform on `[1 - epsilon, 1]` and the azimuth uniform on
/// `[0, 2π)`; the result is rotated into the frame of the cap center.
pub fn sample_cap<R: Rng + ?Sized>(spec: &CapSpec, rng: &mut R) -> Direction {
    if spec.is_sharp() {
        return spec.center;
    }
    let t = spec.epsilon * rng.random::<f64>();
    let cos_theta = 1.0 - t;
    let sin_theta = (t * (2.0 - t)).max(0.0).sqrt();
    let phi = TAU * rng.random::<f64>();
    let (e1, e2) = spec.center.orthonormal_basis();
    let (c, s) = (phi.cos() * sin_theta, phi.sin() * sin_theta);
    let n = spec.center;
    Direction::normalized(
        cos_theta * n.x + c * e1.x + s * e2.x,
        cos_theta * n.y + c * e1.y + s * e2.y,
        cos_theta * n.z + c * e1.z + s * e2.z,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn angle_examples() {
        assert_eq!(angle_between(&Direction::Z, &Direction::Z), 0.0);
        assert!((angle_between(&Direction::Z, &Direction::Z.neg()) - PI).abs() < 1e-15);
        assert!((angle_between(&Direction::Z, &Direction::X) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn angle_is_symmetric_and_clamped() {
        let a = Direction::new(1.0, 1e-17, 0.0).unwrap();
        assert_eq!(angle_between(&a, &Direction::X), 0.0);
        let b = Direction::new(0.3, -0.2, 0.9).unwrap();
        assert_eq!(angle_between(&a, &b), angle_between(&b, &a));
    }

    #[test]
    fn rejects_zero_vector() {
        assert!(matches!(
            Direction::new(0.0, 0.0, 0.0),
            Err(Error::InvalidDirection(_))
        ));
        assert!(Direction::new(f64::NAN, 0.0, 1.0).is_err());
    }

    #[test]
    fn epsilon_domain() {
        assert!(CapSpec::new(Direction::Z, -0.1).is_err());
        assert!(CapSpec::new(Direction::Z, 2.1).is_err());
        assert!(CapSpec::new(Direction::Z, 2.0).is_ok());
    }

    #[test]
    fn delta_cap_returns_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = CapSpec::sharp(Direction::Z);
        for _ in 0..10 {
            assert_eq!(sample_cap(&spec, &mut rng), Direction::Z);
        }
    }

    #[test]
    fn basis_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let n = sample_sphere(&mut rng);
            let (e1, e2) = n.orthonormal_basis();
            assert!(e1.dot(&n).abs() < 1e-12);
            assert!(e2.dot(&n).abs() < 1e-12);
            assert!(e1.dot(&e2).abs() < 1e-12);
            assert!(e1.is_unit() && e2.is_unit());
        }
        for n in [Direction::Z, Direction::Z.neg(), Direction::X] {
            let (e1, e2) = n.orthonormal_basis();
            assert!(e1.dot(&n).abs() < 1e-15 && e2.dot(&n).abs() < 1e-15);
        }
    }

    #[test]
    fn samples_stay_in_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let center = Direction::new(0.2, -0.7, 0.4).unwrap();
        for eps in [1e-6, 0.01, 0.5, 1.0, 2.0] {
            let spec = CapSpec::new(center, eps).unwrap();
            for _ in 0..2000 {
                let d = sample_cap(&spec, &mut rng);
                assert!(d.is_unit());
                assert!(spec.contains(&d), "eps {eps}: {}", 1.0 - d.dot(&center));
            }
        }
    }
}
