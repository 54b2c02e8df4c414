use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use lightlayers::basis::{split_envmap, EnvironmentMap, SoftCubeBasis};
use lightlayers::datagen::{generate_dataset, DatasetConfig, EnvPreset, RecordMeta};
use lightlayers::imagio::{
    gamma_decode, gamma_encode, read_pfm, read_pfm_rgb, read_png, write_pfm, write_png, Encoding, ImageRgb,
    LayerFile, LayerStem, PfmImage, STORAGE_GAMMA,
};
use lightlayers::metrics::{evaluate_batch, EvalItem, EvalOptions, NrmseNorm};
use lightlayers::model::{compose, compose_directional, DirectionalLayerSet, LayerSet};
use lightlayers::prefilter::{glossy_prefilter, glossy_prefilter_adaptive, irradiance_map};
use lightlayers::refine::{upsample_layers, RefineConfig};

use crate::args::*;

/// An invalid flag combination detected after parsing; exits like a parse error.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub struct RunContext {
    pub seed: Option<u64>,
    pub verbose: bool,
}

impl RunContext {
    fn note(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("{}", msg.as_ref());
        }
    }
}

pub fn dispatch(cmd: &Command, ctx: &RunContext) -> Result<()> {
    match cmd {
        Command::GenData(a) => gen_data(a, ctx),
        Command::Compose(a) => compose_cmd(a, false, ctx),
        Command::ComposeDir(a) => compose_cmd(a, true, ctx),
        Command::SplitEnv(a) => split_env(a, ctx),
        Command::Prefilter(a) => prefilter(a, ctx),
        Command::Upsample(a) => upsample(a, ctx),
        Command::Eval(a) => eval(a, ctx),
        Command::Inspect(a) => inspect(a),
    }
}

fn extension(path: &Path) -> String {
    path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase()
}

fn require_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        bail!("input file {} does not exist", path.display());
    }
    Ok(())
}

/// Fails early if `path` cannot be created because its directory is missing.
fn require_out_dir(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => {
            bail!("output directory {} does not exist", dir.display())
        }
        _ => Ok(()),
    }
}

fn require_image_ext(path: &Path, allowed: &[&str]) -> Result<()> {
    let ext = extension(path);
    if !allowed.contains(&ext.as_str()) {
        return Err(usage(format!("{}: expected one of .{}", path.display(), allowed.join(", ."))));
    }
    Ok(())
}

fn preset(p: PresetArg) -> EnvPreset {
    match p {
        PresetArg::Indoor => EnvPreset::Indoor,
        PresetArg::Outdoor => EnvPreset::Outdoor,
        PresetArg::Studio => EnvPreset::Studio,
    }
}

fn gen_data(a: &GenDataArgs, ctx: &RunContext) -> Result<()> {
    let mut cfg = match &a.config {
        Some(path) => DatasetConfig::load(path)?,
        None => DatasetConfig::default(),
    };
    if let Some(seed) = ctx.seed {
        cfg.seed = seed;
    }
    if let Some(v) = a.count {
        cfg.count = v;
    }
    if let Some(v) = a.resolution {
        cfg.resolution = v;
    }
    if let Some(v) = a.env_height {
        cfg.env_height = v;
    }
    if let Some(v) = a.occlusion_samples {
        cfg.occlusion_samples = v;
    }
    if a.directional {
        cfg.directional = true;
    }
    if let Some(p) = &a.presets {
        cfg.presets = p.iter().copied().map(preset).collect();
    }
    cfg.validate()?;
    ctx.note(format!(
        "generating {} records at {}x{} (seed {}) into {}",
        cfg.count,
        cfg.resolution,
        cfg.resolution,
        cfg.seed,
        a.out.display()
    ));
    let manifest = generate_dataset(&cfg, &a.out)?;
    ctx.note(format!("wrote {} records", manifest.entries.len()));
    Ok(())
}

/// `--scale`, else the stem's `meta.json` exposure scale, else 1.
fn resolve_scale(stem: &LayerStem, flag: Option<f64>) -> Result<f64> {
    if let Some(s) = flag {
        if !(s.is_finite() && s > 0.0) {
            bail!("scale must be positive, got {s}");
        }
        return Ok(s);
    }
    let meta = stem.path(LayerFile::Meta);
    if meta.is_file() {
        Ok(RecordMeta::exposure_scale_of(&meta)?.unwrap_or(1.0))
    } else {
        Ok(1.0)
    }
}

fn scaled(img: &ImageRgb, scale: f64) -> ImageRgb {
    img.map_pixels(|p| p.map(|v| (v as f64 * scale) as f32))
}

fn write_color(path: &Path, linear: &ImageRgb) -> Result<()> {
    match extension(path).as_str() {
        "png" => write_png(path, &gamma_encode(linear, STORAGE_GAMMA)?)?,
        _ => write_pfm(path, &PfmImage::from(linear.clone()))?,
    }
    Ok(())
}

fn read_color(path: &Path) -> Result<ImageRgb> {
    Ok(match extension(path).as_str() {
        "png" => gamma_decode(&read_png(path)?, STORAGE_GAMMA)?,
        _ => read_pfm_rgb(path)?,
    })
}

fn compose_cmd(a: &ComposeArgs, directional: bool, ctx: &RunContext) -> Result<()> {
    require_image_ext(&a.out, &["png", "pfm"])?;
    require_out_dir(&a.out)?;
    let stem = LayerStem::new(&a.layers);
    let scale = resolve_scale(&stem, a.scale)?;
    let c = if directional {
        compose_directional(&DirectionalLayerSet::read(&stem)?)
    } else {
        compose(&LayerSet::read(&stem)?)
    };
    ctx.note(format!("composing {} with exposure scale {scale}", stem.prefix().display()));
    write_color(&a.out, &scaled(&c, scale))
}

fn read_env(path: &Path) -> Result<EnvironmentMap> {
    require_file(path)?;
    let img = read_pfm_rgb(path)?;
    EnvironmentMap::new(img).with_context(|| format!("{} is not a lat-long map", path.display()))
}

fn split_env(a: &SplitEnvArgs, ctx: &RunContext) -> Result<()> {
    let basis = SoftCubeBasis::new(a.sharpness)?;
    let stem = LayerStem::new(&a.out);
    require_out_dir(&stem.path(LayerFile::Env(0)))?;
    let env = read_env(&a.env)?;
    for (i, part) in split_envmap(&env, &basis).into_iter().enumerate() {
        let path = stem.path(LayerFile::Env(i));
        write_pfm(&path, &PfmImage::from(part.into_image()))?;
        ctx.note(format!("wrote {}", path.display()));
    }
    Ok(())
}

fn prefilter(a: &PrefilterArgs, ctx: &RunContext) -> Result<()> {
    require_out_dir(&a.out)?;
    let (w, h) = (2 * a.height, a.height);
    let map = match (a.kind, a.n) {
        (PrefilterKindArg::Irr, None) => irradiance_map(&read_env(&a.env)?, w, h)?,
        (PrefilterKindArg::Irr, Some(_)) => return Err(usage("--n only applies to --kind gloss")),
        (PrefilterKindArg::Gloss, None) => return Err(usage("--kind gloss requires --n")),
        (PrefilterKindArg::Gloss, Some(n)) => {
            let env = read_env(&a.env)?;
            if a.adaptive {
                glossy_prefilter_adaptive(&env, n, w, h)?
            } else {
                glossy_prefilter(&env, n, w, h)?
            }
        }
    };
    ctx.note(format!("prefiltered {:?} into {w}x{h}", map.kind));
    write_pfm(&a.out, &PfmImage::from(map.map.into_image()))?;
    Ok(())
}

fn upsample(a: &UpsampleArgs, ctx: &RunContext) -> Result<()> {
    require_file(&a.hd)?;
    require_image_ext(&a.hd, &["png", "pfm"])?;
    let out = LayerStem::new(&a.out);
    require_out_dir(&out.path(LayerFile::Occlusion))?;
    let cfg = RefineConfig {
        iterations: a.iterations,
        blend_weight: a.blend_weight,
        epsilon: a.epsilon,
        exact_finalize: !a.no_finalize,
    };
    cfg.validate()?;
    let stem = LayerStem::new(&a.layers);
    let scale = resolve_scale(&stem, a.scale)?;
    let layers = LayerSet::read(&stem)?.scale_radiance(scale);
    let hd = read_color(&a.hd)?;
    ctx.note(format!(
        "refining {}x{} layers to {}x{} ({} iterations)",
        layers.dims().0,
        layers.dims().1,
        hd.width(),
        hd.height(),
        cfg.iterations
    ));
    upsample_layers(&layers, &hd, &cfg)?.write(&out)?;
    Ok(())
}

fn eval(a: &EvalArgs, ctx: &RunContext) -> Result<()> {
    if a.pred.len() != a.gt.len() {
        return Err(usage(format!("got {} --pred stems but {} --gt stems", a.pred.len(), a.gt.len())));
    }
    require_out_dir(&a.report)?;
    let load = |p: &PathBuf| LayerSet::read(&LayerStem::new(p));
    let preds = a.pred.iter().map(load).collect::<Result<Vec<_>, _>>()?;
    let gts = a.gt.iter().map(load).collect::<Result<Vec<_>, _>>()?;
    let items: Vec<EvalItem> = preds.iter().zip(&gts).map(|(p, g)| (p, g, None)).collect();
    let opts = EvalOptions {
        composite: None,
        reference_residuals: a.reference_residuals,
        nrmse_norm: match a.nrmse_norm {
            NormArg::Euclidean => NrmseNorm::Euclidean,
            NormArg::Minmax => NrmseNorm::MinMax,
        },
    };
    let text = evaluate_batch(&items, opts)?.to_text();
    fs::write(&a.report, &text).with_context(|| format!("writing {}", a.report.display()))?;
    ctx.note(format!("evaluated {} records", items.len()));
    print!("{text}");
    Ok(())
}

fn inspect(a: &InspectArgs) -> Result<()> {
    for path in &a.files {
        require_file(path)?;
        let line = match extension(path).as_str() {
            "pfm" => match read_pfm(path)? {
                PfmImage::Rgb(img) => describe(img.dims(), 3, img.encoding(), img.min_max()),
                PfmImage::Scalar(img) => describe(img.dims(), 1, Encoding::Linear, img.min_max()),
            },
            "png" => {
                let img = read_png(path)?;
                describe(img.dims(), 3, img.encoding(), img.min_max())
            }
            other => bail!("{}: unsupported file type '.{other}'", path.display()),
        };
        println!("{}: {line}", path.display());
    }
    Ok(())
}

fn describe(dims: (usize, usize), channels: usize, enc: Encoding, (lo, hi): (f32, f32)) -> String {
    let enc = match enc {
        Encoding::Linear => "linear".to_string(),
        Encoding::Gamma(g) => format!("gamma({g})"),
    };
    format!("{}x{} channels={channels} encoding={enc} min={lo} max={hi}", dims.0, dims.1)
}
