use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Light-transport layer toolkit: synthesize layered data, compose, split
/// and prefilter environment maps, refine and evaluate decompositions.
#[derive(Debug, Parser)]
#[command(name = "lightlayers", version)]
pub struct Cli {
    /// Master random seed (overrides the config file seed)
    #[arg(long, global = true, value_name = "N", display_order = 100)]
    pub seed: Option<u64>,

    /// Worker threads for batch work
    #[arg(long, global = true, value_name = "N", default_value_t = 1, display_order = 101,
          value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: u16,

    /// Print progress to stderr
    #[arg(short, long, global = true, display_order = 102)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset of layered records
    GenData(GenDataArgs),
    /// Compose a non-directional layer set into an image
    Compose(ComposeArgs),
    /// Compose a directional layer set into an image
    ComposeDir(ComposeArgs),
    /// Split an environment map into six soft-cube maps
    SplitEnv(SplitEnvArgs),
    /// Prefilter an environment map (irradiance or glossy lobe)
    Prefilter(PrefilterArgs),
    /// Refine low-resolution layers against a high-resolution image
    Upsample(UpsampleArgs),
    /// Score predicted layers against ground truth
    Eval(EvalArgs),
    /// Print size, range and encoding of image files
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Output directory (created if missing)
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// TOML config; flags take precedence over its values
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Number of records
    #[arg(long, value_name = "N")]
    pub count: Option<usize>,
    /// Square render resolution in pixels
    #[arg(long, value_name = "PX")]
    pub resolution: Option<usize>,
    /// Environment map height in texels (width is twice this)
    #[arg(long, value_name = "PX")]
    pub env_height: Option<usize>,
    /// Occlusion rays per pixel
    #[arg(long, value_name = "N")]
    pub occlusion_samples: Option<usize>,
    /// Also write the six-direction layers
    #[arg(long)]
    pub directional: bool,
    /// Environment presets to draw from
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub presets: Option<Vec<PresetArg>>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PresetArg {
    Indoor,
    Outdoor,
    Studio,
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    /// Layer stem, e.g. data/rec00000
    #[arg(long, value_name = "STEM")]
    pub layers: PathBuf,
    /// Output image (.png is exposure-scaled and gamma-encoded, .pfm stays linear)
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Exposure scale; defaults to the stem's meta.json value, else 1
    #[arg(long, value_name = "X")]
    pub scale: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SplitEnvArgs {
    /// Lat-long environment map (.pfm)
    #[arg(long, value_name = "FILE")]
    pub env: PathBuf,
    /// Output stem; writes STEM.env0.pfm .. STEM.env5.pfm (+x -x +y -y +z -z)
    #[arg(long, value_name = "STEM")]
    pub out: PathBuf,
    /// Soft-cube sharpening exponent
    #[arg(long, value_name = "S", default_value_t = 20.0)]
    pub sharpness: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PrefilterKindArg {
    Irr,
    Gloss,
}

#[derive(Debug, Args)]
pub struct PrefilterArgs {
    /// Lat-long environment map (.pfm)
    #[arg(long, value_name = "FILE")]
    pub env: PathBuf,
    /// Irradiance (cosine lobe) or glossy (normalized Phong lobe)
    #[arg(long, value_enum)]
    pub kind: PrefilterKindArg,
    /// Phong exponent, required for --kind gloss
    #[arg(long, value_name = "EXP")]
    pub n: Option<f64>,
    /// Output map (.pfm)
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Output height in texels (width is twice this)
    #[arg(long, value_name = "PX", default_value_t = 32)]
    pub height: usize,
    /// Sum over the coarsest mip level that resolves the lobe
    #[arg(long)]
    pub adaptive: bool,
}

#[derive(Debug, Args)]
pub struct UpsampleArgs {
    /// Low-resolution layer stem
    #[arg(long, value_name = "STEM")]
    pub layers: PathBuf,
    /// High-resolution image (.png decoded with gamma 2.0, or linear .pfm)
    #[arg(long, value_name = "FILE")]
    pub hd: PathBuf,
    /// Output layer stem
    #[arg(long, value_name = "STEM")]
    pub out: PathBuf,
    /// Exposure scale applied to the input layers' I and S; defaults to the stem's meta.json value, else 1
    #[arg(long, value_name = "X")]
    pub scale: Option<f64>,
    /// Refinement iterations per pixel
    #[arg(long, value_name = "N", default_value_t = 100)]
    pub iterations: usize,
    /// Blend weight of each solve
    #[arg(long, value_name = "W", default_value_t = 0.001)]
    pub blend_weight: f64,
    /// Division guard
    #[arg(long, value_name = "E", default_value_t = 1e-4)]
    pub epsilon: f64,
    /// Skip the final exact specular solve
    #[arg(long)]
    pub no_finalize: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum NormArg {
    Euclidean,
    Minmax,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted layer stem (repeat for a batch)
    #[arg(long, value_name = "STEM", required = true)]
    pub pred: Vec<PathBuf>,
    /// Ground-truth layer stem (repeat, matching --pred)
    #[arg(long, value_name = "STEM", required = true)]
    pub gt: Vec<PathBuf>,
    /// Report file (key = value lines)
    #[arg(long, value_name = "FILE")]
    pub report: PathBuf,
    /// Use the ground truth's O and S in the r2/r3 residuals
    #[arg(long)]
    pub reference_residuals: bool,
    /// NRMSE normalization
    #[arg(long, value_enum, default_value = "euclidean")]
    pub nrmse_norm: NormArg,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Image files (.pfm or .png)
    #[arg(required = true, value_name = "FILE")]
    pub files: Vec<PathBuf>,
}
