use glam::DVec3;

use crate::{Error, Result};

/// A unit vector on the sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction(DVec3);

impl Direction {
    pub const X: Direction = Direction(DVec3::X);
    pub const NEG_X: Direction = Direction(DVec3::NEG_X);
    pub const Y: Direction = Direction(DVec3::Y);
    pub const NEG_Y: Direction = Direction(DVec3::NEG_Y);
    pub const Z: Direction = Direction(DVec3::Z);
    pub const NEG_Z: Direction = Direction(DVec3::NEG_Z);

    /// Normalizes `(x, y, z)`; fails on zero or non-finite input.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_vec(DVec3::new(x, y, z))
    }

    pub fn from_vec(v: DVec3) -> Result<Self> {
        let len = v.length();
        if len.is_finite() && len > 0.0 {
            Ok(Self(v / len))
        } else {
            Err(Error::InvalidArgument(format!("cannot normalize {v}")))
        }
    }

    /// Polar angle from `+y` and azimuth in the xz-plane.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self(DVec3::new(st * cp, ct, st * sp))
    }

    /// `(θ, φ)` with θ ∈ [0, π] and φ ∈ [0, 2π).
    pub fn to_spherical(self) -> (f64, f64) {
        let theta = self.0.y.clamp(-1.0, 1.0).acos();
        let mut phi = self.0.z.atan2(self.0.x);
        if phi < 0.0 {
            phi += std::f64::consts::TAU;
        }
        if phi >= std::f64::consts::TAU {
            phi = 0.0;
        }
        (theta, phi)
    }

    #[inline]
    pub fn vec(self) -> DVec3 {
        self.0
    }

    #[inline]
    pub fn dot(self, other: Direction) -> f64 {
        self.0.dot(other.0)
    }

    /// Mirror reflection of `self` about `normal`.
    pub fn reflect(self, normal: Direction) -> Direction {
        let n = normal.0;
        Direction::from_vec(self.0 - 2.0 * self.0.dot(n) * n).unwrap_or(normal)
    }

    pub fn x(self) -> f64 {
        self.0.x
    }
    pub fn y(self) -> f64 {
        self.0.y
    }
    pub fn z(self) -> f64 {
        self.0.z
    }
}

impl std::ops::Neg for Direction {
    type Output = Direction;
    fn neg(self) -> Direction {
        Direction(-self.0)
    }
}
