//! Per-layer ground-truth rendering by primary ray casting.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::camera::Camera;
use super::mix_seed;
use super::occlusion::{occlusion, DEFAULT_OCCLUSION_SAMPLES};
use super::scene::Scene;
use crate::basis::{eval_irradiance_sh, project_sh9, split_envmap, Direction, EnvironmentMap, Sh9, SoftCubeBasis};
use crate::imagio::{ImageRgb, ImageScalar};
use crate::model::{DirectionalLayerSet, LayerSet};
use crate::prefilter::GlossyLobe;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RenderSettings {
    pub width: usize,
    pub height: usize,
    pub occlusion_samples: usize,
    /// Seeds the per-pixel occlusion streams.
    pub seed: u64,
    pub directional: bool,
    pub basis: SoftCubeBasis,
}

impl Default for RenderSettings {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            occlusion_samples: DEFAULT_OCCLUSION_SAMPLES,
            seed: 0,
            directional: false,
            basis: SoftCubeBasis::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RenderOutput {
    pub layers: LayerSet,
    pub directional: Option<DirectionalLayerSet>,
}

/// Precomputed illumination for one environment map (or one split of it).
struct Lighting {
    sh: Sh9,
    /// Keyed by the exponent's bit pattern.
    lobes: BTreeMap<u64, GlossyLobe>,
}

impl Lighting {
    fn new(env: &EnvironmentMap, exponents: &[f64]) -> Result<Self> {
        let mut lobes = BTreeMap::new();
        for &n in exponents {
            if let std::collections::btree_map::Entry::Vacant(e) = lobes.entry(n.to_bits()) {
                e.insert(GlossyLobe::new(env, n)?);
            }
        }
        Ok(Self { sh: project_sh9(env), lobes })
    }

    fn irradiance(&self, n: Direction) -> [f64; 3] {
        eval_irradiance_sh(&self.sh, n).map(|v| v.max(0.0))
    }

    fn glossy(&self, exponent: f64, r: Direction) -> [f64; 3] {
        self.lobes[&exponent.to_bits()].eval(r)
    }
}

#[derive(Clone, Copy, Default)]
struct Sample {
    o: f32,
    irr: [f32; 3],
    albedo: [f32; 3],
    spec: [f32; 3],
    diffuse: [[f32; 3]; 6],
    spec_dir: [[f32; 3]; 6],
}

fn to_f32(v: [f64; 3]) -> [f32; 3] {
    v.map(|x| x as f32)
}

/// Per-channel ceiling for background radiance: the brightest irradiance
/// the map produces, i.e. what a white diffuse surface could reflect.
fn background_ceiling(lighting: &Lighting) -> [f64; 3] {
    let (w, h) = (64, 32);
    let mut ceil = [0.0f64; 3];
    for y in 0..h {
        for x in 0..w {
            let theta = (y as f64 + 0.5) * std::f64::consts::PI / h as f64;
            let phi = (x as f64 + 0.5) * std::f64::consts::TAU / w as f64;
            let e = lighting.irradiance(Direction::from_spherical(theta, phi));
            for k in 0..3 {
                ceil[k] = ceil[k].max(e[k]);
            }
        }
    }
    ceil
}

/// Renders the layers of `scene` lit by `env` as seen from `camera`.
///
/// Surfaces: `O` from hemisphere ray sampling, `I` the SH irradiance at the
/// normal, `ρ` the albedo texture, `S = k_s ⊙ P_n(r)` the glossy prefilter
/// at the mirror direction. Background: `O = 1`, `I = ρ = 0` and `S` the
/// environment radiance along the view ray, clamped per channel to the
/// brightest irradiance. The directional variant lights with the soft-cube
/// splits of `env`; its diffuse layers are rescaled to sum to `I`.
pub fn render_layers(
    scene: &Scene,
    env: &EnvironmentMap,
    camera: &Camera,
    settings: &RenderSettings,
) -> Result<RenderOutput> {
    let (w, h) = (settings.width, settings.height);
    if w == 0 || h == 0 {
        return Err(Error::InvalidArgument("render resolution must be non-zero".into()));
    }
    let frame = camera.frame()?;
    if scene.contains(frame.origin()) {
        return Err(Error::CameraInsideGeometry);
    }
    let exponents: Vec<f64> = scene
        .primitives()
        .iter()
        .filter(|p| p.material.specular.iter().any(|&k| k > 0.0))
        .map(|p| p.material.gloss)
        .collect();
    let full = Lighting::new(env, &exponents)?;
    let ceiling = background_ceiling(&full);
    let splits = if settings.directional {
        let maps = split_envmap(env, &settings.basis);
        Some(maps.iter().map(|m| Lighting::new(m, &exponents)).collect::<Result<Vec<_>>>()?)
    } else {
        None
    };

    let shade = |x: usize, y: usize| -> Sample {
        let view = frame.ray(x, y, w, h);
        let Some(hit) = scene.intersect(frame.origin(), view, 0.0, f64::INFINITY) else {
            let view_dir = Direction::from_vec(view).expect("unit view ray");
            let l = env.lookup_bilinear(view_dir);
            let bg: [f64; 3] = std::array::from_fn(|k| l[k].min(ceiling[k]));
            let mut s = Sample { o: 1.0, spec: to_f32(bg), ..Sample::default() };
            if settings.directional {
                let b = settings.basis.weights(view_dir);
                for i in 0..6 {
                    s.spec_dir[i] = to_f32(bg.map(|v| v * b[i]));
                }
            }
            return s;
        };
        let prim = &scene.primitives()[hit.primitive];
        let mat = &prim.material;
        let normal = if hit.normal.vec().dot(view) > 0.0 { -hit.normal } else { hit.normal };
        let pixel_index = (y * w + x) as u64;
        let o = occlusion(
            scene,
            hit.point,
            normal,
            settings.occlusion_samples,
            mix_seed(settings.seed, pixel_index),
        );
        let reflected = Direction::from_vec(view).expect("unit view ray").reflect(normal);
        let glossy = mat.specular.iter().any(|&k| k > 0.0);
        let irr = full.irradiance(normal);
        let spec: [f64; 3] = if glossy {
            let p = full.glossy(mat.gloss, reflected);
            std::array::from_fn(|k| mat.specular[k] * p[k])
        } else {
            [0.0; 3]
        };
        let mut s = Sample {
            o: o as f32,
            irr: to_f32(irr),
            albedo: to_f32(mat.albedo.eval(hit.point)),
            spec: to_f32(spec),
            ..Sample::default()
        };
        if let Some(splits) = &splits {
            let parts: Vec<[f64; 3]> = splits.iter().map(|l| l.irradiance(normal)).collect();
            for k in 0..3 {
                let total: f64 = parts.iter().map(|p| p[k]).sum();
                for i in 0..6 {
                    s.diffuse[i][k] = if total > 0.0 {
                        (parts[i][k] * irr[k] / total) as f32
                    } else {
                        (irr[k] / 6.0) as f32
                    };
                }
            }
            if glossy {
                for (i, l) in splits.iter().enumerate() {
                    let p = l.glossy(mat.gloss, reflected);
                    s.spec_dir[i] = to_f32(std::array::from_fn(|k| mat.specular[k] * p[k]));
                }
            }
        }
        s
    };

    let samples: Vec<Sample> = (0..h)
        .into_par_iter()
        .flat_map_iter(|y| (0..w).map(|x| shade(x, y)).collect::<Vec<_>>())
        .collect();

    let rgb = |f: &dyn Fn(&Sample) -> [f32; 3]| {
        ImageRgb::linear(w, h, samples.iter().flat_map(f).collect()).expect("finite render")
    };
    let occ = ImageScalar::new(w, h, samples.iter().map(|s| s.o).collect())?;
    let albedo = rgb(&|s| s.albedo);
    let layers = LayerSet::new(occ.clone(), rgb(&|s| s.irr), albedo.clone(), rgb(&|s| s.spec))?;
    let directional = if settings.directional {
        let diffuse = std::array::from_fn(|i| rgb(&|s| s.diffuse[i]));
        let specular = std::array::from_fn(|i| rgb(&|s| s.spec_dir[i]));
        Some(DirectionalLayerSet::new(occ, albedo, diffuse, specular)?)
    } else {
        None
    };
    Ok(RenderOutput { layers, directional })
}
