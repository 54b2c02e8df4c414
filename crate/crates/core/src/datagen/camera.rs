//! Pinhole camera.

use glam::DVec3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub position: [f64; 3],
    pub target: [f64; 3],
    /// Vertical field of view in degrees.
    pub fov_deg: f64,
}

/// Orthonormal frame of a camera: right, up, forward.
#[derive(Clone, Copy, Debug)]
pub struct CameraFrame {
    origin: DVec3,
    right: DVec3,
    up: DVec3,
    forward: DVec3,
    tan_half: f64,
}

impl Camera {
    pub fn look_at(position: [f64; 3], target: [f64; 3], fov_deg: f64) -> Result<Self> {
        let cam = Self { position, target, fov_deg };
        cam.frame()?;
        Ok(cam)
    }

    pub fn frame(&self) -> Result<CameraFrame> {
        let origin = DVec3::from_array(self.position);
        let forward = (DVec3::from_array(self.target) - origin).normalize_or_zero();
        let right = forward.cross(DVec3::Y).normalize_or_zero();
        if forward == DVec3::ZERO || right == DVec3::ZERO || !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return Err(Error::InvalidArgument(format!("degenerate camera {self:?}")));
        }
        Ok(CameraFrame {
            origin,
            right,
            up: right.cross(forward),
            forward,
            tan_half: (self.fov_deg.to_radians() * 0.5).tan(),
        })
    }
}

impl CameraFrame {
    pub fn origin(&self) -> DVec3 {
        self.origin
    }

    /// Unit direction through the center of pixel `(x, y)` of a `w × h`
    /// image, `y` growing downwards.
    pub fn ray(&self, x: usize, y: usize, w: usize, h: usize) -> DVec3 {
        let aspect = w as f64 / h as f64;
        let sx = (2.0 * (x as f64 + 0.5) / w as f64 - 1.0) * self.tan_half * aspect;
        let sy = (1.0 - 2.0 * (y as f64 + 0.5) / h as f64) * self.tan_half;
        (self.forward + self.right * sx + self.up * sy).normalize()
    }
}

/// Camera on a circle around the scene, looking slightly down at its center.
pub fn random_camera(rng: &mut impl Rng, center: DVec3, radius: f64) -> Camera {
    let azimuth = rng.gen_range(0.0..std::f64::consts::TAU);
    let elevation = rng.gen_range(15f64..35.0).to_radians();
    let fov: f64 = 40.0;
    // Fit the bounding sphere into the vertical field of view with a margin.
    let dist = 1.2 * radius / (fov.to_radians() * 0.5).sin();
    let dir = DVec3::new(elevation.cos() * azimuth.cos(), elevation.sin(), elevation.cos() * azimuth.sin());
    Camera {
        position: (center + dir * dist).to_array(),
        target: center.to_array(),
        fov_deg: fov,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_ray_is_forward() {
        let cam = Camera::look_at([0.0, 0.0, -5.0], [0.0; 3], 40.0).unwrap();
        let f = cam.frame().unwrap();
        let d = f.ray(50, 50, 101, 101);
        assert!((d - DVec3::Z).length() < 1e-12);
        // Top-left pixel looks up and to the left of the image.
        let tl = f.ray(0, 0, 101, 101);
        assert!(tl.y > 0.0);
        assert!(tl.dot(f.right) < 0.0);
    }

    #[test]
    fn corner_rays_span_fov() {
        let cam = Camera::look_at([0.0, 0.0, -5.0], [0.0; 3], 60.0).unwrap();
        let f = cam.frame().unwrap();
        // Edge of a 2-pixel-high image: pixel centers at ±1/2 of the half-height.
        let top = f.ray(0, 0, 1, 2);
        let expect = (0.5 * (30f64).to_radians().tan()).atan();
        assert!((top.y.asin() - expect).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cameras_rejected() {
        assert!(Camera::look_at([0.0; 3], [0.0; 3], 40.0).is_err());
        assert!(Camera::look_at([0.0, 1.0, 0.0], [0.0; 3], 40.0).is_err());
        assert!(Camera::look_at([0.0, 0.0, 1.0], [0.0; 3], 0.0).is_err());
    }
}
