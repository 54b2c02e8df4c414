use std::f64::consts::{PI, TAU};

use super::Direction;
use crate::imagio::ImageRgb;
use crate::{Error, Result};

/// Lat-long HDR radiance map `L(ω)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentMap {
    image: ImageRgb,
}

impl EnvironmentMap {
    pub fn new(image: ImageRgb) -> Result<Self> {
        let (w, h) = image.dims();
        if w != 2 * h || h == 0 {
            return Err(Error::InvalidArgument(format!(
                "lat-long map must be 2:1, got {w}x{h}"
            )));
        }
        if let Some(i) = image.data().iter().position(|&v| v < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "negative radiance at sample {i}"
            )));
        }
        Ok(Self { image })
    }

    /// Samples `f` at every texel center.
    ///
    /// Panics if `height` is zero or `f` returns negative/non-finite radiance.
    pub fn from_fn(height: usize, mut f: impl FnMut(Direction) -> [f64; 3]) -> Self {
        assert!(height > 0);
        let width = 2 * height;
        let image = ImageRgb::from_fn(width, height, |x, y| {
            let v = f(texel_direction(width, height, x, y));
            assert!(v.iter().all(|c| *c >= 0.0), "negative radiance {v:?}");
            v.map(|c| c as f32)
        });
        Self { image }
    }

    pub fn constant(height: usize, rgb: [f32; 3]) -> Self {
        Self::new(ImageRgb::filled(2 * height, height, rgb)).expect("valid constant map")
    }

    pub fn image(&self) -> &ImageRgb {
        &self.image
    }

    pub fn into_image(self) -> ImageRgb {
        self.image
    }

    pub fn width(&self) -> usize {
        self.image.width()
    }

    pub fn height(&self) -> usize {
        self.image.height()
    }

    #[inline]
    pub fn texel(&self, x: usize, y: usize) -> [f64; 3] {
        self.image.get(x, y).map(f64::from)
    }

    pub fn texel_direction(&self, x: usize, y: usize) -> Direction {
        texel_direction(self.width(), self.height(), x, y)
    }

    /// Exact solid angle of one texel in row `y`: `(2π/W)(cos θ₀ − cos θ₁)`.
    pub fn texel_solid_angle(&self, y: usize) -> f64 {
        texel_solid_angle(self.width(), self.height(), y)
    }

    /// Iterates `(direction, solid angle, radiance)` over all texels.
    pub fn texels(&self) -> impl Iterator<Item = (Direction, f64, [f64; 3])> + '_ {
        let (w, h) = (self.width(), self.height());
        (0..h).flat_map(move |y| {
            let dw = self.texel_solid_angle(y);
            (0..w).map(move |x| (self.texel_direction(x, y), dw, self.texel(x, y)))
        })
    }

    /// Texel containing `dir`.
    pub fn lookup_nearest(&self, dir: Direction) -> [f64; 3] {
        let (theta, phi) = dir.to_spherical();
        let (w, h) = (self.width(), self.height());
        let x = ((phi / TAU * w as f64) as usize).min(w - 1);
        let y = ((theta / PI * h as f64) as usize).min(h - 1);
        self.texel(x, y)
    }

    /// Bilinear interpolation between texel centers; wraps in azimuth and
    /// clamps at the poles.
    pub fn lookup_bilinear(&self, dir: Direction) -> [f64; 3] {
        let (theta, phi) = dir.to_spherical();
        let (w, h) = (self.width(), self.height());
        let u = phi / TAU * w as f64 - 0.5;
        let v = (theta / PI * h as f64 - 0.5).clamp(0.0, (h - 1) as f64);
        let x0f = u.floor();
        let fx = u - x0f;
        let x0 = (x0f as isize).rem_euclid(w as isize) as usize;
        let x1 = (x0 + 1) % w;
        let y0 = v.floor() as usize;
        let y1 = (y0 + 1).min(h - 1);
        let fy = v - y0 as f64;
        let (a, b, c, d) = (self.texel(x0, y0), self.texel(x1, y0), self.texel(x0, y1), self.texel(x1, y1));
        std::array::from_fn(|k| {
            (1.0 - fy) * ((1.0 - fx) * a[k] + fx * b[k]) + fy * ((1.0 - fx) * c[k] + fx * d[k])
        })
    }

    /// Halves the resolution, averaging each 2×2 block weighted by solid angle.
    /// Total radiant power `Σ L·dω` is preserved up to rounding.
    pub fn downsample(&self) -> Option<EnvironmentMap> {
        let (w, h) = (self.width(), self.height());
        if h < 2 || h % 2 != 0 {
            return None;
        }
        let (cw, ch) = (w / 2, h / 2);
        let image = ImageRgb::from_fn(cw, ch, |x, y| {
            let mut acc = [0.0f64; 3];
            let mut weight = 0.0;
            for fy in [2 * y, 2 * y + 1] {
                let dw = self.texel_solid_angle(fy);
                for fx in [2 * x, 2 * x + 1] {
                    let t = self.texel(fx, fy);
                    for k in 0..3 {
                        acc[k] += t[k] * dw;
                    }
                    weight += dw;
                }
            }
            acc.map(|a| (a / weight) as f32)
        });
        Some(Self { image })
    }

    /// Applies `f(direction, radiance)` per texel.
    pub fn map_texels(&self, mut f: impl FnMut(Direction, [f64; 3]) -> [f64; 3]) -> Self {
        let (w, h) = (self.width(), self.height());
        let image = ImageRgb::from_fn(w, h, |x, y| {
            let v = f(self.texel_direction(x, y), self.texel(x, y));
            assert!(v.iter().all(|c| *c >= 0.0), "negative radiance {v:?}");
            v.map(|c| c as f32)
        });
        Self { image }
    }

    /// Per-channel maximum radiance.
    pub fn max_radiance(&self) -> [f64; 3] {
        self.image.pixels().fold([0.0; 3], |m, p| {
            std::array::from_fn(|k| m[k].max(p[k] as f64))
        })
    }
}

pub(crate) fn texel_direction(w: usize, h: usize, x: usize, y: usize) -> Direction {
    let theta = (y as f64 + 0.5) * PI / h as f64;
    let phi = (x as f64 + 0.5) * TAU / w as f64;
    Direction::from_spherical(theta, phi)
}

pub(crate) fn texel_solid_angle(w: usize, h: usize, y: usize) -> f64 {
    let t0 = y as f64 * PI / h as f64;
    let t1 = (y + 1) as f64 * PI / h as f64;
    TAU / w as f64 * (t0.cos() - t1.cos())
}
