//! Procedural scenes: spheres, axis-aligned boxes and half-space planes.

use glam::DVec3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::material::{sample_material, MaterialSample};
use crate::basis::Direction;
use crate::{Error, Result};

/// Range used for occlusion rays when a scene has no bounded primitive.
pub const UNBOUNDED_OCCLUSION_RANGE: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    Sphere { center: [f64; 3], radius: f64 },
    /// Axis-aligned box between two corners.
    Cuboid { min: [f64; 3], max: [f64; 3] },
    /// Solid half-space `⟨p, normal⟩ ≤ offset`; the boundary faces `normal`.
    Plane { normal: [f64; 3], offset: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    #[serde(flatten)]
    pub shape: Shape,
    pub material: MaterialSample,
}

#[derive(Clone, Copy, Debug)]
pub struct Hit {
    pub t: f64,
    pub point: DVec3,
    pub normal: Direction,
    pub primitive: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    primitives: Vec<Primitive>,
    occlusion_range: f64,
}

fn v(a: [f64; 3]) -> DVec3 {
    DVec3::from_array(a)
}

impl Shape {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            Shape::Sphere { center, radius } => {
                center.iter().all(|c| c.is_finite()) && radius.is_finite() && *radius > 0.0
            }
            Shape::Cuboid { min, max } => (0..3).all(|k| min[k].is_finite() && max[k].is_finite() && max[k] > min[k]),
            Shape::Plane { normal, offset } => {
                offset.is_finite() && Direction::from_vec(v(*normal)).is_ok()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("degenerate primitive {self:?}")))
        }
    }

    /// Bounding box, `None` for unbounded shapes.
    fn bounds(&self) -> Option<(DVec3, DVec3)> {
        match self {
            Shape::Sphere { center, radius } => Some((v(*center) - *radius, v(*center) + *radius)),
            Shape::Cuboid { min, max } => Some((v(*min), v(*max))),
            Shape::Plane { .. } => None,
        }
    }

    /// Strictly inside the solid.
    fn contains(&self, p: DVec3) -> bool {
        match self {
            Shape::Sphere { center, radius } => p.distance_squared(v(*center)) < radius * radius,
            Shape::Cuboid { min, max } => (0..3).all(|k| p[k] > min[k] && p[k] < max[k]),
            Shape::Plane { normal, offset } => p.dot(v(*normal).normalize()) < *offset,
        }
    }

    /// Nearest intersection with `t` in `(t_min, t_max)` and the outward normal.
    fn intersect(&self, origin: DVec3, dir: DVec3, t_min: f64, t_max: f64) -> Option<(f64, DVec3)> {
        match self {
            Shape::Sphere { center, radius } => {
                let oc = origin - v(*center);
                let b = oc.dot(dir);
                let c = oc.length_squared() - radius * radius;
                let disc = b * b - c;
                if disc < 0.0 {
                    return None;
                }
                let sq = disc.sqrt();
                [-b - sq, -b + sq]
                    .into_iter()
                    .find(|&t| t > t_min && t < t_max)
                    .map(|t| (t, (origin + dir * t - v(*center)) / radius))
            }
            Shape::Cuboid { min, max } => {
                let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
                let (mut n0, mut n1) = (DVec3::ZERO, DVec3::ZERO);
                for k in 0..3 {
                    let axis = DVec3::AXES[k];
                    if dir[k] == 0.0 {
                        if origin[k] < min[k] || origin[k] > max[k] {
                            return None;
                        }
                        continue;
                    }
                    let inv = 1.0 / dir[k];
                    let (mut a, mut b) = ((min[k] - origin[k]) * inv, (max[k] - origin[k]) * inv);
                    let (mut na, mut nb) = (-axis, axis);
                    if a > b {
                        std::mem::swap(&mut a, &mut b);
                        std::mem::swap(&mut na, &mut nb);
                    }
                    if a > t0 {
                        t0 = a;
                        n0 = na;
                    }
                    if b < t1 {
                        t1 = b;
                        n1 = nb;
                    }
                }
                if t0 > t1 {
                    return None;
                }
                if t0 > t_min && t0 < t_max {
                    Some((t0, n0))
                } else if t1 > t_min && t1 < t_max {
                    Some((t1, n1))
                } else {
                    None
                }
            }
            Shape::Plane { normal, offset } => {
                let n = v(*normal).normalize();
                let denom = n.dot(dir);
                if denom == 0.0 {
                    return None;
                }
                let t = (offset - n.dot(origin)) / denom;
                (t > t_min && t < t_max).then_some((t, n))
            }
        }
    }
}

impl Scene {
    /// Occlusion range defaults to half the diameter of the bounded
    /// primitives' bounding box.
    pub fn new(primitives: Vec<Primitive>) -> Result<Self> {
        if primitives.is_empty() {
            return Err(Error::InvalidArgument("scene needs at least one primitive".into()));
        }
        for p in &primitives {
            p.shape.validate()?;
        }
        let range = bounding_box(&primitives)
            .map(|(lo, hi)| 0.5 * lo.distance(hi))
            .unwrap_or(UNBOUNDED_OCCLUSION_RANGE);
        Ok(Self {
            primitives,
            occlusion_range: range,
        })
    }

    pub fn with_occlusion_range(mut self, range: f64) -> Result<Self> {
        if !(range > 0.0) {
            return Err(Error::InvalidArgument(format!("occlusion range must be > 0, got {range}")));
        }
        self.occlusion_range = range;
        Ok(self)
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn occlusion_range(&self) -> f64 {
        self.occlusion_range
    }

    /// Bounding box of all bounded primitives.
    pub fn bounds(&self) -> Option<(DVec3, DVec3)> {
        bounding_box(&self.primitives)
    }

    pub fn contains(&self, p: DVec3) -> bool {
        self.primitives.iter().any(|prim| prim.shape.contains(p))
    }

    /// Closest hit along a unit-length ray.
    pub fn intersect(&self, origin: DVec3, dir: DVec3, t_min: f64, t_max: f64) -> Option<Hit> {
        let mut best: Option<Hit> = None;
        for (i, prim) in self.primitives.iter().enumerate() {
            let limit = best.map_or(t_max, |h| h.t);
            if let Some((t, n)) = prim.shape.intersect(origin, dir, t_min, limit) {
                best = Some(Hit {
                    t,
                    point: origin + dir * t,
                    normal: Direction::from_vec(n).expect("nonzero normal"),
                    primitive: i,
                });
            }
        }
        best
    }

    pub fn occluded(&self, origin: DVec3, dir: DVec3, t_min: f64, t_max: f64) -> bool {
        self.primitives
            .iter()
            .any(|p| p.shape.intersect(origin, dir, t_min, t_max).is_some())
    }
}

fn bounding_box(prims: &[Primitive]) -> Option<(DVec3, DVec3)> {
    prims
        .iter()
        .filter_map(|p| p.shape.bounds())
        .reduce(|(a0, a1), (b0, b1)| (a0.min(b0), a1.max(b1)))
}

/// One to three spheres/boxes resting on `y = 0` near the origin, plus a
/// ground plane with probability 1/2.
pub fn random_scene(rng: &mut impl Rng) -> Scene {
    let count = rng.gen_range(1..=3);
    let mut prims = Vec::with_capacity(count + 1);
    for i in 0..count {
        let angle = i as f64 * std::f64::consts::TAU / count as f64 + rng.gen_range(-0.4..0.4);
        let dist = if count == 1 { 0.0 } else { rng.gen_range(0.6..0.9) };
        let (cx, cz) = (dist * angle.cos(), dist * angle.sin());
        let shape = if rng.gen_bool(0.5) {
            let r = rng.gen_range(0.25..0.5);
            Shape::Sphere { center: [cx, r, cz], radius: r }
        } else {
            let half = [rng.gen_range(0.15..0.4), rng.gen_range(0.15..0.5), rng.gen_range(0.15..0.4)];
            Shape::Cuboid {
                min: [cx - half[0], 0.0, cz - half[2]],
                max: [cx + half[0], 2.0 * half[1], cz + half[2]],
            }
        };
        prims.push(Primitive { shape, material: sample_material(rng) });
    }
    if rng.gen_bool(0.5) {
        prims.push(Primitive {
            shape: Shape::Plane { normal: [0.0, 1.0, 0.0], offset: 0.0 },
            material: sample_material(rng),
        });
    }
    Scene::new(prims).expect("generated primitives are valid")
}
