//! Procedural HDR environment maps: a sky gradient plus a few bright
//! disk-shaped area lights.

use std::fmt;
use std::str::FromStr;

use glam::DVec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{Direction, EnvironmentMap};
use crate::Error;

/// Height of generated maps (width is twice this).
pub const ENV_HEIGHT: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvPreset {
    Indoor,
    Outdoor,
    Studio,
}

impl EnvPreset {
    pub const ALL: [EnvPreset; 3] = [EnvPreset::Indoor, EnvPreset::Outdoor, EnvPreset::Studio];

    pub fn name(self) -> &'static str {
        match self {
            EnvPreset::Indoor => "indoor",
            EnvPreset::Outdoor => "outdoor",
            EnvPreset::Studio => "studio",
        }
    }
}

impl fmt::Display for EnvPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        EnvPreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown environment preset '{s}'")))
    }
}

/// A disk light with a smooth rim.
#[derive(Clone, Copy, Debug)]
struct DiskLight {
    center: DVec3,
    cos_inner: f64,
    cos_outer: f64,
    radiance: [f64; 3],
}

impl DiskLight {
    fn new(center: DVec3, radius: f64, radiance: [f64; 3]) -> Self {
        Self {
            center,
            cos_inner: (0.7 * radius).cos(),
            cos_outer: radius.cos(),
            radiance,
        }
    }

    fn weight(&self, d: DVec3) -> f64 {
        let c = d.dot(self.center);
        if c >= self.cos_inner {
            1.0
        } else if c <= self.cos_outer {
            0.0
        } else {
            let t = (c - self.cos_outer) / (self.cos_inner - self.cos_outer);
            t * t * (3.0 - 2.0 * t)
        }
    }
}

fn random_upper_direction(rng: &mut impl Rng, min_elev: f64, max_elev: f64) -> DVec3 {
    let elev = rng.gen_range(min_elev..max_elev).to_radians();
    let az = rng.gen_range(0.0..std::f64::consts::TAU);
    DVec3::new(elev.cos() * az.cos(), elev.sin(), elev.cos() * az.sin())
}

fn tint(rng: &mut impl Rng, base: [f64; 3], spread: f64) -> [f64; 3] {
    base.map(|c| c * (1.0 + rng.gen_range(-spread..spread)))
}

fn lerp3(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    std::array::from_fn(|k| a[k] + (b[k] - a[k]) * t)
}

/// Identifier recorded in dataset metadata.
pub fn env_id(preset: EnvPreset, seed: u64) -> String {
    format!("{preset}-{seed:016x}")
}

/// Deterministic procedural map for `(preset, seed)`.
pub fn procedural_env(preset: EnvPreset, seed: u64, height: usize) -> EnvironmentMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_e7f0_0000_0000);
    let (zenith, horizon, ground, lights): ([f64; 3], [f64; 3], [f64; 3], Vec<DiskLight>) = match preset {
        EnvPreset::Outdoor => {
            let sun = DiskLight::new(
                random_upper_direction(&mut rng, 15.0, 70.0),
                rng.gen_range(2.0f64..4.0).to_radians(),
                tint(&mut rng, [60.0, 55.0, 45.0], 0.3),
            );
            (
                tint(&mut rng, [0.25, 0.45, 0.9], 0.2),
                tint(&mut rng, [0.9, 0.9, 0.95], 0.1),
                tint(&mut rng, [0.25, 0.2, 0.15], 0.3),
                vec![sun],
            )
        }
        EnvPreset::Indoor => {
            let n = rng.gen_range(2..=4);
            let lights = (0..n)
                .map(|_| {
                    DiskLight::new(
                        random_upper_direction(&mut rng, 10.0, 80.0),
                        rng.gen_range(8.0f64..20.0).to_radians(),
                        tint(&mut rng, [4.0, 3.6, 3.0], 0.4),
                    )
                })
                .collect();
            (
                tint(&mut rng, [0.5, 0.45, 0.4], 0.3),
                tint(&mut rng, [0.4, 0.38, 0.35], 0.3),
                tint(&mut rng, [0.2, 0.17, 0.14], 0.3),
                lights,
            )
        }
        EnvPreset::Studio => {
            let n = rng.gen_range(2..=3);
            let lights = (0..n)
                .map(|_| {
                    DiskLight::new(
                        random_upper_direction(&mut rng, 5.0, 60.0),
                        rng.gen_range(10.0f64..25.0).to_radians(),
                        tint(&mut rng, [8.0, 8.0, 8.0], 0.5),
                    )
                })
                .collect();
            ([0.05; 3], [0.08; 3], [0.04; 3], lights)
        }
    };
    EnvironmentMap::from_fn(height, |d: Direction| {
        let v = d.vec();
        let mut l = if v.y >= 0.0 {
            lerp3(horizon, zenith, v.y.sqrt())
        } else {
            lerp3(horizon, ground, (-v.y).sqrt().min(1.0) * 0.5 + 0.5)
        };
        for light in &lights {
            let w = light.weight(v);
            if w > 0.0 {
                for k in 0..3 {
                    l[k] += w * light.radiance[k];
                }
            }
        }
        l
    })
}
