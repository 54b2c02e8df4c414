//! Soft-cube partition of unity.
//!
//! `bᵢ(ω) = max(⟨ω, cᵢ⟩, 0)^σ / Σⱼ max(⟨ω, cⱼ⟩, 0)^σ` over the six signed
//! axes. Every weight is non-negative and the six weights sum to one.

use super::{Direction, EnvironmentMap};
use crate::{Error, Result};

/// Face order used everywhere, including the `d0..d5` / `s0..s5` file names.
pub const CUBE_FACES: [Direction; 6] = [
    Direction::X,
    Direction::NEG_X,
    Direction::Y,
    Direction::NEG_Y,
    Direction::Z,
    Direction::NEG_Z,
];

pub const FACE_NAMES: [&str; 6] = ["+x", "-x", "+y", "-y", "+z", "-z"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SoftCubeBasis {
    sharpness: f64,
}

impl Default for SoftCubeBasis {
    fn default() -> Self {
        Self { sharpness: 20.0 }
    }
}

impl SoftCubeBasis {
    pub fn new(sharpness: f64) -> Result<Self> {
        if sharpness > 0.0 && sharpness.is_finite() {
            Ok(Self { sharpness })
        } else {
            Err(Error::InvalidArgument(format!(
                "soft-cube sharpness must be positive, got {sharpness}"
            )))
        }
    }

    pub fn sharpness(&self) -> f64 {
        self.sharpness
    }

    /// All six weights at `dir`.
    pub fn weights(&self, dir: Direction) -> [f64; 6] {
        let v = dir.vec();
        // Dot products with the signed axes are just the signed components.
        let comps = [v.x, -v.x, v.y, -v.y, v.z, -v.z];
        let raw = comps.map(|c| if c > 0.0 { c.powf(self.sharpness) } else { 0.0 });
        let total: f64 = raw.iter().sum();
        raw.map(|r| r / total)
    }
}

/// Weight of face `face` at `dir` for sharpness `sigma`.
pub fn eval_softcube(dir: Direction, face: usize, sigma: f64) -> Result<f64> {
    if face >= 6 {
        return Err(Error::InvalidArgument(format!("face index {face} out of range 0..6")));
    }
    Ok(SoftCubeBasis::new(sigma)?.weights(dir)[face])
}

/// `Lᵢ(ω) = L(ω)·bᵢ(ω)` per texel, in [`CUBE_FACES`] order.
pub fn split_envmap(env: &EnvironmentMap, basis: &SoftCubeBasis) -> [EnvironmentMap; 6] {
    std::array::from_fn(|i| env.map_texels(|d, l| {
        let w = basis.weights(d)[i];
        l.map(|c| c * w)
    }))
}
