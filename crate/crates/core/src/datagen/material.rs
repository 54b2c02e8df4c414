//! Material sampling.
//!
//! Half of the materials are "electric" (specular color equals the mean
//! diffuse color), half "dielectric" (uniform random grey specular). The
//! Phong exponent is `n = 3^(10ξ)` with `ξ ~ U[0, 1]`, i.e. `n ∈ [1, 59049]`.

use glam::DVec3;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Diffuse albedo pattern in object-local coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pattern", rename_all = "snake_case")]
pub enum Texture {
    Flat { color: [f64; 3] },
    /// 3-D checkerboard with cells of edge `period`.
    Checker { a: [f64; 3], b: [f64; 3], period: f64 },
    /// Horizontal bands of height `period`.
    Stripes { a: [f64; 3], b: [f64; 3], period: f64 },
}

impl Texture {
    pub fn eval(&self, local: DVec3) -> [f64; 3] {
        match *self {
            Texture::Flat { color } => color,
            Texture::Checker { a, b, period } => {
                let cell = (local / period).floor();
                if (cell.x + cell.y + cell.z) as i64 % 2 == 0 {
                    a
                } else {
                    b
                }
            }
            Texture::Stripes { a, b, period } => {
                if (local.y / period).floor() as i64 % 2 == 0 {
                    a
                } else {
                    b
                }
            }
        }
    }

    /// Spatial mean color per channel. Both two-color patterns cover equal
    /// areas, so their mean is the midpoint of the two colors.
    pub fn mean(&self) -> [f64; 3] {
        match *self {
            Texture::Flat { color } => color,
            Texture::Checker { a, b, .. } | Texture::Stripes { a, b, .. } => {
                std::array::from_fn(|k| 0.5 * (a[k] + b[k]))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaterialKind {
    Electric,
    Dielectric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialSample {
    pub albedo: Texture,
    pub specular: [f64; 3],
    /// The uniform variate the exponent was derived from.
    pub gloss_xi: f64,
    pub gloss: f64,
    pub kind: MaterialKind,
}

/// `3^(10ξ)`.
pub fn gloss_exponent(xi: f64) -> f64 {
    3.0f64.powf(10.0 * xi)
}

fn random_color(rng: &mut impl Rng) -> [f64; 3] {
    std::array::from_fn(|_| rng.gen::<f64>())
}

fn random_texture(rng: &mut impl Rng) -> Texture {
    match rng.gen_range(0..4) {
        0 | 1 => Texture::Flat {
            color: random_color(rng),
        },
        2 => Texture::Checker {
            a: random_color(rng),
            b: random_color(rng),
            period: rng.gen_range(0.1..0.4),
        },
        _ => Texture::Stripes {
            a: random_color(rng),
            b: random_color(rng),
            period: rng.gen_range(0.05..0.3),
        },
    }
}

impl MaterialSample {
    /// Builds a material from an albedo pattern, a kind, the dielectric grey
    /// level (ignored for electric) and ξ.
    pub fn new(albedo: Texture, kind: MaterialKind, grey: f64, xi: f64) -> Self {
        let specular = match kind {
            MaterialKind::Electric => albedo.mean(),
            MaterialKind::Dielectric => [grey; 3],
        };
        Self {
            albedo,
            specular,
            gloss_xi: xi,
            gloss: gloss_exponent(xi),
            kind,
        }
    }
}

pub fn sample_material(rng: &mut impl Rng) -> MaterialSample {
    let kind = if rng.gen_bool(0.5) {
        MaterialKind::Electric
    } else {
        MaterialKind::Dielectric
    };
    let albedo = random_texture(rng);
    let grey = rng.gen::<f64>();
    let xi = rng.gen::<f64>();
    MaterialSample::new(albedo, kind, grey, xi)
}
