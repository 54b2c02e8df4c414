//! Ray-sampled hemisphere visibility.
//!
//! `O` is the cosine-weighted fraction of hemisphere directions around the
//! normal whose ray does not hit the scene within the occlusion range.

use glam::DVec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scene::Scene;
use crate::basis::Direction;

pub const DEFAULT_OCCLUSION_SAMPLES: usize = 256;

/// Cosine-weighted direction for the unit-square sample `(u1, u2)`, in the
/// frame `(t, b, n)`.
fn cosine_direction(u1: f64, u2: f64, t: DVec3, b: DVec3, n: DVec3) -> DVec3 {
    let r = u1.sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    t * (r * c) + b * (r * s) + n * (1.0 - u1).max(0.0).sqrt()
}

/// Fractional part of the golden ratio.
const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Monte-Carlo visibility with `samples` rays on a golden-ratio lattice
/// `((i + ½)/N, i·φ mod 1)` under one random toroidal shift, so the estimate
/// is unbiased while the points stay evenly spread.
pub fn occlusion_with(scene: &Scene, point: DVec3, normal: Direction, samples: usize, rng: &mut impl Rng) -> f64 {
    if samples == 0 {
        return 1.0;
    }
    let n = normal.vec();
    let (t, b) = n.any_orthonormal_pair();
    let origin = point + n * (1e-7 * (1.0 + point.abs().max_element()));
    let range = scene.occlusion_range();
    let (s1, s2): (f64, f64) = (rng.gen(), rng.gen());
    let visible = (0..samples)
        .filter(|&i| {
            let u1 = ((i as f64 + 0.5) / samples as f64 + s1).fract();
            let u2 = (i as f64 * GOLDEN + s2).fract();
            !scene.occluded(origin, cosine_direction(u1, u2, t, b, n), 0.0, range)
        })
        .count();
    visible as f64 / samples as f64
}

/// [`occlusion_with`] driven by a ChaCha8 stream seeded with `seed`.
pub fn occlusion(scene: &Scene, point: DVec3, normal: Direction, samples: usize, seed: u64) -> f64 {
    occlusion_with(scene, point, normal, samples, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Exact visibility at a point on a plane with normal `n` under a sphere of
/// angular radius `alpha` whose center is `beta` away from `n`, entirely
/// within range and above the horizon (`alpha + beta ≤ π/2`): the projected
/// solid angle of a cap is `π sin²α cos β`.
pub fn analytic_cap_visibility(alpha: f64, beta: f64) -> f64 {
    1.0 - alpha.sin().powi(2) * beta.cos()
}
