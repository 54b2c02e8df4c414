//! Prefiltered environment maps.
//!
//! Diffuse shading uses the SH9 irradiance map (indexed by normal). Specular
//! shading uses a normalized Phong lobe
//! `P(r) = Σ L(ω) max(⟨ω,r⟩,0)ⁿ dω / Σ max(⟨ω,r⟩,0)ⁿ dω` (indexed by the
//! mirror direction), evaluated by direct texel summation.

use std::borrow::Cow;
use std::f64::consts::PI;

use glam::DVec3;
use rayon::prelude::*;

use crate::basis::{eval_irradiance_sh, project_sh9, Direction, EnvironmentMap};
use crate::imagio::ImageRgb;
use crate::{Error, Result};

/// Default prefiltered map resolution (width × height).
pub const DEFAULT_PREFILTER_SIZE: (usize, usize) = (64, 32);

/// Lobe weights below this fraction of the peak are skipped.
const LOBE_CUTOFF: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PrefilterKind {
    Irradiance,
    Glossy(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrefilteredMap {
    pub map: EnvironmentMap,
    pub kind: PrefilterKind,
}

impl PrefilteredMap {
    /// Bilinear lookup by normal (irradiance) or reflection direction (glossy).
    pub fn lookup(&self, dir: Direction) -> [f64; 3] {
        self.map.lookup_bilinear(dir)
    }
}

fn check_output(w: usize, h: usize) -> Result<()> {
    if h == 0 || w != 2 * h {
        return Err(Error::InvalidArgument(format!(
            "prefiltered map must be 2:1 and non-empty, got {w}x{h}"
        )));
    }
    Ok(())
}

fn build_map(w: usize, h: usize, f: impl Fn(Direction) -> [f64; 3] + Sync) -> EnvironmentMap {
    let rows: Vec<Vec<f32>> = (0..h)
        .into_par_iter()
        .map(|y| {
            (0..w)
                .flat_map(|x| {
                    let dir = texel_dir(w, h, x, y);
                    f(dir).map(|v| v.max(0.0) as f32)
                })
                .collect()
        })
        .collect();
    let image = ImageRgb::linear(w, h, rows.concat()).expect("finite prefilter output");
    EnvironmentMap::new(image).expect("valid prefilter output")
}

fn texel_dir(w: usize, h: usize, x: usize, y: usize) -> Direction {
    let theta = (y as f64 + 0.5) * PI / h as f64;
    let phi = (x as f64 + 0.5) * std::f64::consts::TAU / w as f64;
    Direction::from_spherical(theta, phi)
}

/// Irradiance map: each output texel is the SH9 irradiance at its direction.
pub fn irradiance_map(env: &EnvironmentMap, width: usize, height: usize) -> Result<PrefilteredMap> {
    check_output(width, height)?;
    let sh = project_sh9(env);
    Ok(PrefilteredMap {
        map: build_map(width, height, |n| eval_irradiance_sh(&sh, n)),
        kind: PrefilterKind::Irradiance,
    })
}

/// Brute-force `(1/π) Σ L(ω) max(⟨ω,n⟩,0) dω` over all texels.
pub fn brute_irradiance(env: &EnvironmentMap, normal: Direction) -> [f64; 3] {
    let mut acc = [0.0; 3];
    for (d, dw, l) in env.texels() {
        let c = d.dot(normal);
        if c > 0.0 {
            for k in 0..3 {
                acc[k] += l[k] * c * dw;
            }
        }
    }
    acc.map(|v| v / PI)
}

/// Texel data flattened for fast lobe summation.
struct TexelTable {
    width: usize,
    height: usize,
    dirs: Vec<DVec3>,
    radiance: Vec<[f64; 3]>,
    solid_angle: Vec<f64>,
}

impl TexelTable {
    fn new(env: &EnvironmentMap) -> Self {
        let (w, h) = (env.width(), env.height());
        let mut dirs = Vec::with_capacity(w * h);
        let mut radiance = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                dirs.push(env.texel_direction(x, y).vec());
                radiance.push(env.texel(x, y));
            }
        }
        Self {
            width: w,
            height: h,
            dirs,
            radiance,
            solid_angle: (0..h).map(|y| env.texel_solid_angle(y)).collect(),
        }
    }

    /// Normalized Phong-lobe average of the radiance around `r`.
    fn lobe_average(&self, r: Direction, exponent: f64) -> [f64; 3] {
        let cos_cut = (LOBE_CUTOFF.ln() / exponent).exp();
        // Rows whose polar band can contain directions within the cutoff cone.
        let (theta_r, _) = r.to_spherical();
        let reach = cos_cut.clamp(-1.0, 1.0).acos();
        let band = PI / self.height as f64;
        let y0 = (((theta_r - reach) / band).floor().max(0.0)) as usize;
        let y1 = ((((theta_r + reach) / band).ceil()) as usize).min(self.height);
        let rv = r.vec();
        let (st_r, ct_r) = theta_r.sin_cos();
        let (_, phi_r) = r.to_spherical();
        let step = std::f64::consts::TAU / self.width as f64;
        let mut num = [0.0f64; 3];
        let mut den = 0.0f64;
        for y in y0..y1 {
            // Azimuth half-width of the cutoff cone at this row's texel centers.
            let (st, ct) = ((y as f64 + 0.5) * band).sin_cos();
            let denom = st * st_r;
            let span = if denom <= 1e-12 {
                None
            } else {
                let cos_dphi = (cos_cut - ct * ct_r) / denom;
                if cos_dphi <= -1.0 {
                    None
                } else if cos_dphi > 1.0 {
                    continue;
                } else {
                    Some(cos_dphi.acos())
                }
            };
            let dw = self.solid_angle[y];
            let row = y * self.width;
            let mut accumulate = |x: usize| {
                let idx = row + x;
                let c = self.dirs[idx].dot(rv);
                if c > cos_cut {
                    let wgt = (exponent * c.ln()).exp() * dw;
                    let l = &self.radiance[idx];
                    num[0] += l[0] * wgt;
                    num[1] += l[1] * wgt;
                    num[2] += l[2] * wgt;
                    den += wgt;
                }
            };
            match span {
                Some(dphi) if 2.0 * dphi + 2.0 * step < std::f64::consts::TAU => {
                    let lo = ((phi_r - dphi) / step - 0.5).floor() as isize - 1;
                    let hi = ((phi_r + dphi) / step - 0.5).ceil() as isize + 1;
                    for xi in lo..=hi {
                        accumulate(xi.rem_euclid(self.width as isize) as usize);
                    }
                }
                _ => (0..self.width).for_each(&mut accumulate),
            }
        }
        if den > 0.0 {
            num.map(|v| v / den)
        } else {
            // Lobe narrower than every texel: fall back to the containing texel.
            let (w, h) = (self.width, self.height);
            let (theta, phi) = r.to_spherical();
            let x = ((phi / std::f64::consts::TAU * w as f64) as usize).min(w - 1);
            let y = ((theta / PI * h as f64) as usize).min(h - 1);
            self.radiance[y * w + x]
        }
    }
}

fn check_exponent(exponent: f64) -> Result<()> {
    if exponent >= 1.0 && exponent.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "gloss exponent must be >= 1, got {exponent}"
        )))
    }
}

/// Normalized Phong-lobe prefilter by direct summation over every texel of
/// `env` (lobe tails below 1e-9 of the peak are skipped).
pub fn glossy_prefilter(
    env: &EnvironmentMap,
    exponent: f64,
    width: usize,
    height: usize,
) -> Result<PrefilteredMap> {
    check_exponent(exponent)?;
    check_output(width, height)?;
    let table = TexelTable::new(env);
    Ok(PrefilteredMap {
        map: build_map(width, height, |r| table.lobe_average(r, exponent)),
        kind: PrefilterKind::Glossy(exponent),
    })
}

/// Coarsest level of `env` whose texels still resolve a lobe of exponent `n`:
/// the level height stays at least `3π√n` (three texels per lobe standard
/// deviation `1/√n`) and at least 16.
pub fn lobe_resolving_level(env: &EnvironmentMap, exponent: f64) -> Cow<'_, EnvironmentMap> {
    let target = (3.0 * PI * exponent.sqrt()).max(16.0);
    let mut level = Cow::Borrowed(env);
    while (level.height() / 2) as f64 >= target {
        match level.downsample() {
            Some(next) => level = Cow::Owned(next),
            None => break,
        }
    }
    level
}

/// The adaptive glossy prefilter evaluated at arbitrary directions, without
/// building a map. `eval(r)` is what an infinitely fine
/// [`glossy_prefilter_adaptive`] map would hold at `r`.
pub struct GlossyLobe {
    table: TexelTable,
    exponent: f64,
}

impl GlossyLobe {
    pub fn new(env: &EnvironmentMap, exponent: f64) -> Result<Self> {
        check_exponent(exponent)?;
        Ok(Self {
            table: TexelTable::new(&lobe_resolving_level(env, exponent)),
            exponent,
        })
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn eval(&self, r: Direction) -> [f64; 3] {
        self.table.lobe_average(r, self.exponent)
    }
}

/// [`glossy_prefilter`] on the [`lobe_resolving_level`] of `env`. Linear in
/// the map and a fixed point on constants, like the full-resolution version.
pub fn glossy_prefilter_adaptive(
    env: &EnvironmentMap,
    exponent: f64,
    width: usize,
    height: usize,
) -> Result<PrefilteredMap> {
    check_exponent(exponent)?;
    glossy_prefilter(&lobe_resolving_level(env, exponent), exponent, width, height)
}
