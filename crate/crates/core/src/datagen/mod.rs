//! Synthetic layered training data: procedural scenes and environment maps,
//! per-layer ground truth, exposure-normalized LDR composites.

pub mod camera;
pub mod dataset;
pub mod envgen;
pub mod material;
pub mod occlusion;
pub mod render;
pub mod scene;

pub use camera::{random_camera, Camera};
pub use dataset::{
    generate_dataset, generate_record, DatasetConfig, DatasetRecord, Manifest, ManifestEntry, RecordMeta,
};
pub use envgen::{env_id, procedural_env, EnvPreset, ENV_HEIGHT};
pub use material::{gloss_exponent, sample_material, MaterialKind, MaterialSample, Texture};
pub use occlusion::{analytic_cap_visibility, occlusion, occlusion_with, DEFAULT_OCCLUSION_SAMPLES};
pub use render::{render_layers, RenderOutput, RenderSettings};
pub use scene::{random_scene, Hit, Primitive, Scene, Shape};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent seed for sub-stream `stream` of `seed`.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}
