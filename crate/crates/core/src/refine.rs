//! Energy-conserving upsampling of layer decompositions.
//!
//! Every high-resolution pixel is refined on its own. Starting from the
//! bilinearly upsampled layers, each iteration solves, in the order S, I, ρ,
//! O, for one layer given the color and the other three, and blends the
//! solution into the current value with a small weight. The irradiance keeps
//! the chroma of its initial value, and all layers are clamped back into the
//! unit cube. An optional final unblended S solve makes the layers compose
//! to the input exactly.

use rayon::prelude::*;

use crate::imagio::{luminance, Encoding, ImageRgb, ImageScalar};
use crate::model::{compose_pixel, LayerSet, RESIDUAL_EPSILON};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefineConfig {
    pub iterations: usize,
    pub blend_weight: f64,
    /// Guard for divisions by O, I and ρ.
    pub epsilon: f64,
    /// Finish with an unblended, unclamped S solve.
    pub exact_finalize: bool,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            iterations: 100,
            blend_weight: 0.001,
            epsilon: RESIDUAL_EPSILON,
            exact_finalize: true,
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("iterations must be >= 1".into()));
        }
        if !(self.blend_weight > 0.0 && self.blend_weight <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "blend weight must be in (0, 1], got {}",
                self.blend_weight
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// The four layer values of one pixel.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PixelLayers {
    pub o: f64,
    pub i: [f64; 3],
    pub rho: [f64; 3],
    pub s: [f64; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerKind {
    Specular,
    Irradiance,
    Albedo,
    Occlusion,
}

/// Solve order used by the refinement loop.
pub const SOLVE_ORDER: [LayerKind; 4] = [
    LayerKind::Specular,
    LayerKind::Irradiance,
    LayerKind::Albedo,
    LayerKind::Occlusion,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LayerValue {
    Scalar(f64),
    Rgb([f64; 3]),
}

impl PixelLayers {
    pub fn compose(&self) -> [f64; 3] {
        std::array::from_fn(|k| self.o * (self.i[k] * self.rho[k] + self.s[k]))
    }

    fn set(&mut self, which: LayerKind, value: LayerValue) {
        match (which, value) {
            (LayerKind::Occlusion, LayerValue::Scalar(v)) => self.o = v,
            (LayerKind::Irradiance, LayerValue::Rgb(v)) => self.i = v,
            (LayerKind::Albedo, LayerValue::Rgb(v)) => self.rho = v,
            (LayerKind::Specular, LayerValue::Rgb(v)) => self.s = v,
            _ => unreachable!("layer kind and value shape disagree"),
        }
    }
}

fn guard(v: f64, eps: f64) -> f64 {
    if v.abs() < eps {
        eps.copysign(v)
    } else {
        v
    }
}

/// Closed-form solve for `which` given color `c` and the other three layers.
///
/// `S = C/O − Iρ`, `ρ = (C/O − S)/I`, `I = (C/O − S)/ρ` per channel, and the
/// scalar `O = ⟨C, Iρ+S⟩ / ⟨Iρ+S, Iρ+S⟩`. Divisors smaller than `eps` in
/// magnitude are replaced by `±eps`. The O solve keeps the current value if
/// `Iρ+S` vanishes.
pub fn solve_layer(c: [f64; 3], px: &PixelLayers, which: LayerKind, eps: f64) -> LayerValue {
    let o = guard(px.o, eps);
    match which {
        LayerKind::Specular => LayerValue::Rgb(std::array::from_fn(|k| c[k] / o - px.i[k] * px.rho[k])),
        LayerKind::Albedo => {
            LayerValue::Rgb(std::array::from_fn(|k| (c[k] / o - px.s[k]) / guard(px.i[k], eps)))
        }
        LayerKind::Irradiance => {
            LayerValue::Rgb(std::array::from_fn(|k| (c[k] / o - px.s[k]) / guard(px.rho[k], eps)))
        }
        LayerKind::Occlusion => {
            let v: [f64; 3] = std::array::from_fn(|k| px.i[k] * px.rho[k] + px.s[k]);
            let vv: f64 = v.iter().map(|x| x * x).sum();
            if vv > 0.0 {
                LayerValue::Scalar((0..3).map(|k| c[k] * v[k]).sum::<f64>() / vv)
            } else {
                LayerValue::Scalar(px.o)
            }
        }
    }
}

/// `reference` rescaled to the luminance of `candidate`. Returns `candidate`
/// unchanged if the reference has no positive luminance.
pub fn project_chroma(candidate: [f64; 3], reference: [f64; 3]) -> [f64; 3] {
    let lr = luminance(reference);
    if lr > 0.0 {
        let f = luminance(candidate) / lr;
        reference.map(|v| v * f)
    } else {
        candidate
    }
}

fn clamp_unit(v: [f64; 3]) -> [f64; 3] {
    v.map(|x| x.clamp(0.0, 1.0))
}

/// `true` if the f32 layers already compose to `c` up to rounding.
fn consistent(c: [f32; 3], px: &PixelLayers) -> bool {
    let composed = px.compose();
    (0..3).all(|k| {
        let c = c[k] as f64;
        (c - composed[k]).abs() <= 2.0 * f32::EPSILON as f64 * c.abs().max(1.0)
    })
}

/// Refines one pixel. Consistent pixels are returned unchanged.
pub fn refine_pixel(c: [f32; 3], init: PixelLayers, cfg: &RefineConfig) -> PixelLayers {
    if consistent(c, &init) {
        return init;
    }
    let cd = c.map(f64::from);
    let w = cfg.blend_weight;
    let mix = |old: f64, new: f64| (1.0 - w) * old + w * new;
    let mut px = init;
    for _ in 0..cfg.iterations {
        for which in SOLVE_ORDER {
            let solved = solve_layer(cd, &px, which, cfg.epsilon);
            let next = match (which, solved) {
                (LayerKind::Occlusion, LayerValue::Scalar(v)) => {
                    LayerValue::Scalar(mix(px.o, v).clamp(0.0, 1.0))
                }
                (LayerKind::Irradiance, LayerValue::Rgb(v)) => {
                    let locked = project_chroma(v, init.i);
                    LayerValue::Rgb(clamp_unit(std::array::from_fn(|k| mix(px.i[k], locked[k]))))
                }
                (LayerKind::Albedo, LayerValue::Rgb(v)) => {
                    LayerValue::Rgb(clamp_unit(std::array::from_fn(|k| mix(px.rho[k], v[k]))))
                }
                (LayerKind::Specular, LayerValue::Rgb(v)) => {
                    LayerValue::Rgb(clamp_unit(std::array::from_fn(|k| mix(px.s[k], v[k]))))
                }
                _ => unreachable!(),
            };
            px.set(which, next);
        }
    }
    if cfg.exact_finalize {
        if let LayerValue::Rgb(s) = solve_layer(cd, &px, LayerKind::Specular, cfg.epsilon) {
            px.s = s;
        }
    }
    px
}

fn sample_bilinear(data: &[f32], w: usize, h: usize, ch: usize, fx: f64, fy: f64) -> Vec<f64> {
    let x = fx.clamp(0.0, (w - 1) as f64);
    let y = fy.clamp(0.0, (h - 1) as f64);
    let (x0, y0) = (x.floor() as usize, y.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
    let (tx, ty) = (x - x0 as f64, y - y0 as f64);
    (0..ch)
        .map(|k| {
            let at = |xx: usize, yy: usize| data[(yy * w + xx) * ch + k] as f64;
            let top = at(x0, y0) * (1.0 - tx) + at(x1, y0) * tx;
            let bottom = at(x0, y1) * (1.0 - tx) + at(x1, y1) * tx;
            top * (1.0 - ty) + bottom * ty
        })
        .collect()
}

/// Bilinear resampling with pixel centers at half-integer coordinates and
/// clamped borders.
pub fn bilinear_upsample(layers: &LayerSet, width: usize, height: usize) -> LayerSet {
    let (w, h) = layers.dims();
    let sx = w as f64 / width as f64;
    let sy = h as f64 / height as f64;
    let src = |x: usize, y: usize| ((x as f64 + 0.5) * sx - 0.5, (y as f64 + 0.5) * sy - 0.5);
    let rgb = |img: &ImageRgb| {
        ImageRgb::from_fn(width, height, |x, y| {
            let (fx, fy) = src(x, y);
            let v = sample_bilinear(img.data(), w, h, 3, fx, fy);
            [v[0] as f32, v[1] as f32, v[2] as f32]
        })
    };
    let occ = ImageScalar::from_fn(width, height, |x, y| {
        let (fx, fy) = src(x, y);
        sample_bilinear(layers.occlusion().data(), w, h, 1, fx, fy)[0] as f32
    });
    LayerSet::new(occ, rgb(layers.irradiance()), rgb(layers.albedo()), rgb(layers.specular()))
        .expect("resampled layers share dimensions")
}

fn check_linear(c: &ImageRgb) -> Result<()> {
    match c.encoding() {
        Encoding::Linear => Ok(()),
        Encoding::Gamma(_) => Err(Error::InvalidArgument(
            "color image must be decoded to linear before refinement".into(),
        )),
    }
}

/// Refines `init` so that it composes to `c` (same resolution).
pub fn refine_layers(init: &LayerSet, c: &ImageRgb, cfg: &RefineConfig) -> Result<LayerSet> {
    cfg.validate()?;
    check_linear(c)?;
    let (w, h) = init.dims();
    if c.dims() != (w, h) {
        return Err(Error::DimensionMismatch(format!(
            "color image is {}x{}, layers are {w}x{h}",
            c.width(),
            c.height()
        )));
    }
    let out: Vec<PixelLayers> = (0..w * h)
        .into_par_iter()
        .map(|idx| {
            let f = |v: [f32; 3]| v.map(f64::from);
            let px = PixelLayers {
                o: init.occlusion().data()[idx] as f64,
                i: f(init.irradiance().pixel(idx)),
                rho: f(init.albedo().pixel(idx)),
                s: f(init.specular().pixel(idx)),
            };
            refine_pixel(c.pixel(idx), px, cfg)
        })
        .collect();
    let rgb = |g: fn(&PixelLayers) -> [f64; 3]| {
        ImageRgb::linear(w, h, out.iter().flat_map(|p| g(p).map(|v| v as f32)).collect())
    };
    LayerSet::new(
        ImageScalar::new(w, h, out.iter().map(|p| p.o as f32).collect())?,
        rgb(|p| p.i)?,
        rgb(|p| p.rho)?,
        rgb(|p| p.s)?,
    )
}

/// Lifts `layers` to the resolution of `c_hd` and refines them against it.
pub fn upsample_layers(layers: &LayerSet, c_hd: &ImageRgb, cfg: &RefineConfig) -> Result<LayerSet> {
    cfg.validate()?;
    check_linear(c_hd)?;
    let (w, h) = layers.dims();
    if c_hd.width() < w || c_hd.height() < h {
        return Err(Error::DimensionMismatch(format!(
            "color image {}x{} is smaller than the layers {w}x{h}",
            c_hd.width(),
            c_hd.height()
        )));
    }
    let init = bilinear_upsample(layers, c_hd.width(), c_hd.height());
    refine_layers(&init, c_hd, cfg)
}

/// The bilinear initialization composed, i.e. the target of the fixed point.
pub fn compose_initialization(layers: &LayerSet, width: usize, height: usize) -> ImageRgb {
    let init = bilinear_upsample(layers, width, height);
    ImageRgb::from_fn(width, height, |x, y| {
        compose_pixel(
            init.occlusion().get(x, y),
            init.irradiance().get(x, y),
            init.albedo().get(x, y),
            init.specular().get(x, y),
        )
    })
}
