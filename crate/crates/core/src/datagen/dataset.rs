//! Dataset generation: records, metadata and the manifest.

use std::fs;
use std::io::Write;
use std::path::Path;

use glam::DVec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::camera::{random_camera, Camera};
use super::envgen::{env_id, procedural_env, EnvPreset, ENV_HEIGHT};
use super::mix_seed;
use super::occlusion::DEFAULT_OCCLUSION_SAMPLES;
use super::render::{render_layers, RenderSettings};
use super::scene::{random_scene, Primitive, Scene};
use crate::basis::SoftCubeBasis;
use crate::imagio::{exposure_normalize, gamma_encode, write_png, ImageRgb, LayerFile, LayerStem, STORAGE_GAMMA};
use crate::model::{compose, DirectionalLayerSet, LayerSet};
use crate::{Error, Result};

/// Exposure percentile of the composite.
pub const EXPOSURE_PERCENTILE: f64 = 0.95;

pub const MANIFEST_FILE: &str = "manifest.jsonl";

/// Generation parameters, loadable from TOML. Missing keys take defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub count: usize,
    pub seed: u64,
    /// Square render resolution.
    pub resolution: usize,
    pub env_height: usize,
    pub occlusion_samples: usize,
    pub directional: bool,
    pub presets: Vec<EnvPreset>,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            count: 10,
            seed: 0,
            resolution: 256,
            env_height: ENV_HEIGHT,
            occlusion_samples: DEFAULT_OCCLUSION_SAMPLES,
            directional: false,
            presets: EnvPreset::ALL.to_vec(),
        }
    }
}

impl DatasetConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.resolution == 0 {
            return fail("resolution must be positive");
        }
        if self.env_height < 2 {
            return fail("env_height must be at least 2");
        }
        if self.presets.is_empty() {
            return fail("presets must not be empty");
        }
        Ok(())
    }
}

/// Everything needed to reproduce or interpret a record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub index: usize,
    pub seed: u64,
    /// Factor applied to the linear composite before gamma encoding.
    pub exposure_scale: f64,
    pub env_id: String,
    pub env_preset: EnvPreset,
    pub resolution: usize,
    pub directional: bool,
    pub camera: Camera,
    pub occlusion_range: f64,
    pub primitives: Vec<Primitive>,
}

impl RecordMeta {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// The `exposure_scale` field of any JSON metadata file, if present.
    pub fn exposure_scale_of(path: impl AsRef<Path>) -> Result<Option<f64>> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        match value.get("exposure_scale") {
            None => Ok(None),
            Some(v) => v
                .as_f64()
                .filter(|s| s.is_finite() && *s > 0.0)
                .map(Some)
                .ok_or_else(|| Error::Config(format!("{}: exposure_scale must be a positive number", path.display()))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DatasetRecord {
    pub meta: RecordMeta,
    /// Unscaled linear layers.
    pub layers: LayerSet,
    pub directional: Option<DirectionalLayerSet>,
    /// Exposure-scaled, gamma-encoded composite.
    pub composed: ImageRgb,
}

impl DatasetRecord {
    pub fn stem_name(index: usize) -> String {
        format!("rec{index:05}")
    }

    /// Writes all files of the record under `dir`; returns their names.
    pub fn write(&self, dir: &Path) -> Result<Vec<String>> {
        let stem = LayerStem::new(dir.join(Self::stem_name(self.meta.index)));
        write_png(stem.path(LayerFile::Composed), &self.composed)?;
        self.layers.write(&stem)?;
        let mut files = vec![LayerFile::Composed, LayerFile::Occlusion, LayerFile::Irradiance, LayerFile::Albedo, LayerFile::Specular];
        if let Some(d) = &self.directional {
            d.write(&stem)?;
            files.extend((0..6).map(LayerFile::Diffuse));
            files.extend((0..6).map(LayerFile::SpecularDir));
        }
        let meta_path = stem.path(LayerFile::Meta);
        let mut json = serde_json::to_string_pretty(&self.meta)?;
        json.push('\n');
        fs::write(&meta_path, json).map_err(|e| Error::io(&meta_path, e))?;
        files.push(LayerFile::Meta);
        Ok(files.into_iter().map(|f| format!("{}.{f}", stem.name())).collect())
    }
}

fn scene_sphere(scene: &Scene) -> (DVec3, f64) {
    let (lo, hi) = scene.bounds().unwrap_or((DVec3::splat(-1.0), DVec3::splat(1.0)));
    (0.5 * (lo + hi), 0.5 * lo.distance(hi))
}

/// Generates record `index` of `config` in memory. Pure in its arguments.
pub fn generate_record(config: &DatasetConfig, index: usize) -> Result<DatasetRecord> {
    config.validate()?;
    let seed = mix_seed(config.seed, index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let preset = config.presets[rng.gen_range(0..config.presets.len())];
    let env_seed: u64 = rng.gen();
    let scene = random_scene(&mut rng);
    let (center, radius) = scene_sphere(&scene);
    let camera = random_camera(&mut rng, center, radius);
    let env = procedural_env(preset, env_seed, config.env_height);
    let settings = RenderSettings {
        width: config.resolution,
        height: config.resolution,
        occlusion_samples: config.occlusion_samples,
        seed,
        directional: config.directional,
        basis: SoftCubeBasis::default(),
    };
    let out = render_layers(&scene, &env, &camera, &settings)?;
    let exposure = exposure_normalize(&compose(&out.layers), EXPOSURE_PERCENTILE)?;
    let composed = gamma_encode(&exposure.image, STORAGE_GAMMA)?;
    Ok(DatasetRecord {
        meta: RecordMeta {
            index,
            seed,
            exposure_scale: exposure.scale,
            env_id: env_id(preset, env_seed),
            env_preset: preset,
            resolution: config.resolution,
            directional: config.directional,
            camera,
            occlusion_range: scene.occlusion_range(),
            primitives: scene.primitives().to_vec(),
        },
        layers: out.layers,
        directional: out.directional,
        composed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: usize,
    pub stem: String,
    pub seed: u64,
    pub exposure_scale: f64,
    pub env_id: String,
    pub files: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    /// One JSON object per line.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let entries = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_jsonl(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Generates `config.count` records into `out_dir` (records in parallel on
/// the current rayon pool) and writes `manifest.jsonl`.
pub fn generate_dataset(config: &DatasetConfig, out_dir: &Path) -> Result<Manifest> {
    config.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let entries = (0..config.count)
        .into_par_iter()
        .map(|i| {
            let rec = generate_record(config, i)?;
            let files = rec.write(out_dir)?;
            Ok(ManifestEntry {
                index: i,
                stem: DatasetRecord::stem_name(i),
                seed: rec.meta.seed,
                exposure_scale: rec.meta.exposure_scale,
                env_id: rec.meta.env_id,
                files,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest { entries };
    let path = out_dir.join(MANIFEST_FILE);
    let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    f.write_all(manifest.to_jsonl()?.as_bytes()).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
