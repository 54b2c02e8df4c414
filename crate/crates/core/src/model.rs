//! Image-formation models.
//!
//! Non-directional: `C = O · (ρ · I + S)` per pixel and channel, where `O` is
//! the unoccluded (visible) fraction of the upper hemisphere.
//!
//! Directional: `C = O · (ρ · Σᵢ Dᵢ + Σᵢ Sᵢ)` over the six soft-cube faces.

use crate::imagio::{
    read_pfm_rgb, read_pfm_scalar, write_pfm, ImageRgb, ImageScalar, LayerFile, LayerStem,
};
use crate::{Error, Result};

/// Division guard for `C / O` in the residuals.
pub const RESIDUAL_EPSILON: f64 = 1e-4;

/// Occlusion, irradiance, albedo and specular layers of one image.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerSet {
    occlusion: ImageScalar,
    irradiance: ImageRgb,
    albedo: ImageRgb,
    specular: ImageRgb,
}

/// Occlusion, albedo and six per-face diffuse and specular layers.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionalLayerSet {
    occlusion: ImageScalar,
    albedo: ImageRgb,
    diffuse: [ImageRgb; 6],
    specular: [ImageRgb; 6],
}

/// Classic intrinsic-image pair: shading `O·I` and reflectance `ρ`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntrinsicPair {
    pub shading: ImageRgb,
    pub reflectance: ImageRgb,
}

fn same_dims(what: &str, expected: (usize, usize), got: (usize, usize)) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{what} is {}x{}, expected {}x{}",
            got.0, got.1, expected.0, expected.1
        )))
    }
}

/// `O · (ρ·I + S)` for one pixel, evaluated in f64 and rounded once.
#[inline]
pub fn compose_pixel(o: f32, irradiance: [f32; 3], albedo: [f32; 3], specular: [f32; 3]) -> [f32; 3] {
    let o = o as f64;
    std::array::from_fn(|k| {
        (o * (albedo[k] as f64 * irradiance[k] as f64 + specular[k] as f64)) as f32
    })
}

impl LayerSet {
    /// Fails unless all four layers share dimensions.
    pub fn new(
        occlusion: ImageScalar,
        irradiance: ImageRgb,
        albedo: ImageRgb,
        specular: ImageRgb,
    ) -> Result<Self> {
        let dims = occlusion.dims();
        same_dims("irradiance", dims, irradiance.dims())?;
        same_dims("albedo", dims, albedo.dims())?;
        same_dims("specular", dims, specular.dims())?;
        Ok(Self {
            occlusion,
            irradiance,
            albedo,
            specular,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.occlusion.dims()
    }

    pub fn occlusion(&self) -> &ImageScalar {
        &self.occlusion
    }

    pub fn irradiance(&self) -> &ImageRgb {
        &self.irradiance
    }

    pub fn albedo(&self) -> &ImageRgb {
        &self.albedo
    }

    pub fn specular(&self) -> &ImageRgb {
        &self.specular
    }

    pub fn into_parts(self) -> (ImageScalar, ImageRgb, ImageRgb, ImageRgb) {
        (self.occlusion, self.irradiance, self.albedo, self.specular)
    }

    /// Checks the value ranges: `O, ρ ∈ [0, 1]`, `I, S ≥ 0`.
    pub fn check_ranges(&self) -> Result<()> {
        let bad = |what: &str, v: f32| {
            Err(Error::InvalidArgument(format!("{what} value {v} out of range")))
        };
        if let Some(&v) = self.occlusion.data().iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return bad("occlusion", v);
        }
        if let Some(&v) = self.albedo.data().iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return bad("albedo", v);
        }
        if let Some(&v) = self.irradiance.data().iter().find(|v| **v < 0.0) {
            return bad("irradiance", v);
        }
        if let Some(&v) = self.specular.data().iter().find(|v| **v < 0.0) {
            return bad("specular", v);
        }
        Ok(())
    }

    /// Multiplies the radiometric layers `I` and `S` by `scale`, which scales
    /// the composite by the same factor.
    pub fn scale_radiance(&self, scale: f64) -> LayerSet {
        let s = |p: [f32; 3]| p.map(|v| (v as f64 * scale) as f32);
        LayerSet {
            occlusion: self.occlusion.clone(),
            irradiance: self.irradiance.map_pixels(s),
            albedo: self.albedo.clone(),
            specular: self.specular.map_pixels(s),
        }
    }

    /// The same layers with the specular term set to zero.
    pub fn without_specular(&self) -> LayerSet {
        let (w, h) = self.dims();
        LayerSet {
            specular: ImageRgb::filled(w, h, [0.0; 3]),
            ..self.clone()
        }
    }

    /// Replaces the albedo layer.
    pub fn with_albedo(&self, albedo: ImageRgb) -> Result<LayerSet> {
        LayerSet::new(
            self.occlusion.clone(),
            self.irradiance.clone(),
            albedo,
            self.specular.clone(),
        )
    }

    pub fn write(&self, stem: &LayerStem) -> Result<()> {
        write_pfm(stem.path(LayerFile::Occlusion), &self.occlusion.clone().into())?;
        write_pfm(stem.path(LayerFile::Irradiance), &self.irradiance.clone().into())?;
        write_pfm(stem.path(LayerFile::Albedo), &self.albedo.clone().into())?;
        write_pfm(stem.path(LayerFile::Specular), &self.specular.clone().into())
    }

    pub fn read(stem: &LayerStem) -> Result<Self> {
        LayerSet::new(
            read_pfm_scalar(stem.path(LayerFile::Occlusion))?,
            read_pfm_rgb(stem.path(LayerFile::Irradiance))?,
            read_pfm_rgb(stem.path(LayerFile::Albedo))?,
            read_pfm_rgb(stem.path(LayerFile::Specular))?,
        )
    }
}

impl DirectionalLayerSet {
    pub fn new(
        occlusion: ImageScalar,
        albedo: ImageRgb,
        diffuse: [ImageRgb; 6],
        specular: [ImageRgb; 6],
    ) -> Result<Self> {
        let dims = occlusion.dims();
        same_dims("albedo", dims, albedo.dims())?;
        for (i, (d, s)) in diffuse.iter().zip(&specular).enumerate() {
            same_dims(&format!("diffuse layer {i}"), dims, d.dims())?;
            same_dims(&format!("specular layer {i}"), dims, s.dims())?;
        }
        Ok(Self {
            occlusion,
            albedo,
            diffuse,
            specular,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.occlusion.dims()
    }

    pub fn occlusion(&self) -> &ImageScalar {
        &self.occlusion
    }

    pub fn albedo(&self) -> &ImageRgb {
        &self.albedo
    }

    pub fn diffuse(&self) -> &[ImageRgb; 6] {
        &self.diffuse
    }

    pub fn specular(&self) -> &[ImageRgb; 6] {
        &self.specular
    }

    /// Sums the per-face layers into a non-directional [`LayerSet`].
    pub fn collapse(&self) -> LayerSet {
        LayerSet {
            occlusion: self.occlusion.clone(),
            irradiance: sum_layers(&self.diffuse),
            albedo: self.albedo.clone(),
            specular: sum_layers(&self.specular),
        }
    }

    /// Writes `occ`, `alb`, `d0..d5` and `s0..s5`.
    pub fn write(&self, stem: &LayerStem) -> Result<()> {
        write_pfm(stem.path(LayerFile::Occlusion), &self.occlusion.clone().into())?;
        write_pfm(stem.path(LayerFile::Albedo), &self.albedo.clone().into())?;
        for i in 0..6 {
            write_pfm(stem.path(LayerFile::Diffuse(i)), &self.diffuse[i].clone().into())?;
            write_pfm(stem.path(LayerFile::SpecularDir(i)), &self.specular[i].clone().into())?;
        }
        Ok(())
    }

    pub fn read(stem: &LayerStem) -> Result<Self> {
        let mut diffuse = Vec::with_capacity(6);
        let mut specular = Vec::with_capacity(6);
        for i in 0..6 {
            diffuse.push(read_pfm_rgb(stem.path(LayerFile::Diffuse(i)))?);
            specular.push(read_pfm_rgb(stem.path(LayerFile::SpecularDir(i)))?);
        }
        DirectionalLayerSet::new(
            read_pfm_scalar(stem.path(LayerFile::Occlusion))?,
            read_pfm_rgb(stem.path(LayerFile::Albedo))?,
            diffuse.try_into().expect("six layers"),
            specular.try_into().expect("six layers"),
        )
    }
}

fn sum_layers(layers: &[ImageRgb; 6]) -> ImageRgb {
    let (w, h) = layers[0].dims();
    let mut acc = vec![0.0f64; w * h * 3];
    for layer in layers {
        for (a, &v) in acc.iter_mut().zip(layer.data()) {
            *a += v as f64;
        }
    }
    ImageRgb::linear(w, h, acc.into_iter().map(|v| v as f32).collect())
        .expect("sum of finite layers")
}

/// `C = O · (ρ · I + S)`.
pub fn compose(layers: &LayerSet) -> ImageRgb {
    let (w, h) = layers.dims();
    let o = layers.occlusion.data();
    ImageRgb::from_fn(w, h, |x, y| {
        let idx = y * w + x;
        compose_pixel(
            o[idx],
            layers.irradiance.pixel(idx),
            layers.albedo.pixel(idx),
            layers.specular.pixel(idx),
        )
    })
}

/// `C = O · (ρ · Σᵢ Dᵢ + Σᵢ Sᵢ)`.
pub fn compose_directional(layers: &DirectionalLayerSet) -> ImageRgb {
    let (w, h) = layers.dims();
    let o = layers.occlusion.data();
    ImageRgb::from_fn(w, h, |x, y| {
        let idx = y * w + x;
        let rho = layers.albedo.pixel(idx);
        let mut diffuse = [0.0f64; 3];
        let mut specular = [0.0f64; 3];
        for i in 0..6 {
            let (d, s) = (layers.diffuse[i].pixel(idx), layers.specular[i].pixel(idx));
            for k in 0..3 {
                diffuse[k] += d[k] as f64;
                specular[k] += s[k] as f64;
            }
        }
        let o = o[idx] as f64;
        std::array::from_fn(|k| (o * (rho[k] as f64 * diffuse[k] + specular[k])) as f32)
    })
}

/// Intrinsic reduction: shading `O·I`, reflectance `ρ`. Ignores `S`.
pub fn shading_intrinsic(layers: &LayerSet) -> IntrinsicPair {
    let (w, h) = layers.dims();
    let o = layers.occlusion.data();
    let shading = ImageRgb::from_fn(w, h, |x, y| {
        let idx = y * w + x;
        layers.irradiance.pixel(idx).map(|v| (o[idx] as f64 * v as f64) as f32)
    });
    IntrinsicPair {
        shading,
        reflectance: layers.albedo.clone(),
    }
}

impl IntrinsicPair {
    /// `shading · reflectance`.
    pub fn recompose(&self) -> ImageRgb {
        let (w, h) = self.shading.dims();
        ImageRgb::from_fn(w, h, |x, y| {
            let (s, r) = (self.shading.get(x, y), self.reflectance.get(x, y));
            std::array::from_fn(|k| (s[k] as f64 * r[k] as f64) as f32)
        })
    }
}

/// Which occlusion/specular the "explain without AO" residuals divide by.
#[derive(Clone, Copy, Debug, Default)]
pub enum ResidualSource<'a> {
    /// Use the layers under test.
    #[default]
    Predicted,
    /// Use a reference decomposition's `O` (and `S` for r₃).
    Reference(&'a LayerSet),
}

/// Signed recombination residual images.
#[derive(Clone, Debug, PartialEq)]
pub struct Residuals {
    /// `C − O(Iρ + S)`
    pub r1: ImageRgb,
    /// `C/O − (Iρ + S)`
    pub r2: ImageRgb,
    /// `C/O − S − Iρ`
    pub r3: ImageRgb,
}

/// The three recombination residuals with `O` guarded by [`RESIDUAL_EPSILON`].
///
/// With [`ResidualSource::Predicted`], r₂ and r₃ are evaluated as
/// `r₁ / max(O, ε)`; this equals `C/O − (Iρ + S)` whenever `O ≥ ε` and keeps
/// the residual exactly zero for consistent layers even where `O < ε`.
pub fn recombination_residuals(
    layers: &LayerSet,
    composite: &ImageRgb,
    source: ResidualSource<'_>,
) -> Result<Residuals> {
    let (w, h) = layers.dims();
    same_dims("composite", (w, h), composite.dims())?;
    if let ResidualSource::Reference(r) = source {
        same_dims("reference layers", (w, h), r.dims())?;
    }
    let n = w * h;
    let (mut r1, mut r2, mut r3) = (
        Vec::with_capacity(n * 3),
        Vec::with_capacity(n * 3),
        Vec::with_capacity(n * 3),
    );
    let o = layers.occlusion.data();
    for idx in 0..n {
        let c = composite.pixel(idx);
        let irr = layers.irradiance.pixel(idx);
        let rho = layers.albedo.pixel(idx);
        let s = layers.specular.pixel(idx);
        let recomposed = compose_pixel(o[idx], irr, rho, s);
        let e1: [f64; 3] = std::array::from_fn(|k| c[k] as f64 - recomposed[k] as f64);
        r1.extend(e1.map(|v| v as f32));
        match source {
            ResidualSource::Predicted => {
                let guard = (o[idx] as f64).max(RESIDUAL_EPSILON);
                let e2 = e1.map(|v| (v / guard) as f32);
                r2.extend(e2);
                r3.extend(e2);
            }
            ResidualSource::Reference(reference) => {
                let guard = (reference.occlusion.data()[idx] as f64).max(RESIDUAL_EPSILON);
                let s_ref = reference.specular.pixel(idx);
                for k in 0..3 {
                    let c_over_o = c[k] as f64 / guard;
                    let diffuse = irr[k] as f64 * rho[k] as f64;
                    r2.push((c_over_o - (diffuse + s[k] as f64)) as f32);
                    r3.push((c_over_o - s_ref[k] as f64 - diffuse) as f32);
                }
            }
        }
    }
    Ok(Residuals {
        r1: ImageRgb::linear(w, h, r1)?,
        r2: ImageRgb::linear(w, h, r2)?,
        r3: ImageRgb::linear(w, h, r3)?,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pixel_layers(o: f32, i: [f32; 3], rho: [f32; 3], s: [f32; 3]) -> LayerSet {
        LayerSet::new(
            ImageScalar::filled(1, 1, o),
            ImageRgb::filled(1, 1, i),
            ImageRgb::filled(1, 1, rho),
            ImageRgb::filled(1, 1, s),
        )
        .unwrap()
    }

    pub(crate) fn random_layers(rng: &mut ChaCha8Rng, w: usize, h: usize) -> LayerSet {
        let mut rgb = |lo: f32, hi: f32| {
            ImageRgb::linear(w, h, (0..w * h * 3).map(|_| rng.gen_range(lo..hi)).collect()).unwrap()
        };
        let irr = rgb(0.0, 2.0);
        let alb = rgb(0.0, 1.0);
        let spec = rgb(0.0, 0.5);
        let occ = ImageScalar::new(w, h, (0..w * h).map(|_| rng.gen_range(0.01..1.0)).collect()).unwrap();
        LayerSet::new(occ, irr, alb, spec).unwrap()
    }

    #[test]
    fn compose_examples() {
        let c = compose(&pixel_layers(1.0, [1.0; 3], [0.3, 0.6, 0.9], [0.0; 3]));
        assert_eq!(c.data(), &[0.3, 0.6, 0.9]);
        let c = compose(&pixel_layers(0.0, [5.0; 3], [0.3, 0.6, 0.9], [2.0; 3]));
        assert_eq!(c.data(), &[0.0; 3]);
        let c = compose(&pixel_layers(0.5, [1.0; 3], [0.4; 3], [0.2; 3]));
        for v in c.data() {
            assert!((v - 0.3).abs() < 1e-7);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let err = LayerSet::new(
            ImageScalar::filled(2, 2, 1.0),
            ImageRgb::filled(2, 2, [1.0; 3]),
            ImageRgb::filled(2, 3, [1.0; 3]),
            ImageRgb::filled(2, 2, [1.0; 3]),
        );
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
        let layers = pixel_layers(1.0, [1.0; 3], [1.0; 3], [0.0; 3]);
        assert!(recombination_residuals(&layers, &ImageRgb::filled(2, 1, [0.0; 3]), ResidualSource::Predicted).is_err());
    }

    #[test]
    fn check_ranges_flags_out_of_range_layers() {
        assert!(pixel_layers(1.0, [2.0; 3], [1.0; 3], [0.0; 3]).check_ranges().is_ok());
        assert!(pixel_layers(1.2, [1.0; 3], [1.0; 3], [0.0; 3]).check_ranges().is_err());
        assert!(pixel_layers(1.0, [1.0; 3], [1.1; 3], [0.0; 3]).check_ranges().is_err());
        assert!(pixel_layers(1.0, [1.0; 3], [1.0; 3], [-0.1; 3]).check_ranges().is_err());
    }

    fn directional(o: f32, rho: [f32; 3], d: [[f32; 3]; 6], s: [[f32; 3]; 6]) -> DirectionalLayerSet {
        DirectionalLayerSet::new(
            ImageScalar::filled(1, 1, o),
            ImageRgb::filled(1, 1, rho),
            d.map(|v| ImageRgb::filled(1, 1, v)),
            s.map(|v| ImageRgb::filled(1, 1, v)),
        )
        .unwrap()
    }

    #[test]
    fn compose_directional_examples() {
        let rho = [0.2, 0.5, 0.7];
        let c = compose_directional(&directional(1.0, rho, [[1.0 / 6.0; 3]; 6], [[0.0; 3]; 6]));
        for k in 0..3 {
            assert!((c.data()[k] - rho[k]).abs() < 1e-7);
        }
        let mut d = [[0.0; 3]; 6];
        d[0] = [1.0; 3];
        let c = compose_directional(&directional(1.0, [0.5; 3], d, [[0.0; 3]; 6]));
        assert_eq!(c.data(), &[0.5; 3]);
    }

    #[test]
    fn sixths_of_a_layer_set_compose_identically() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let layers = random_layers(&mut rng, 6, 5);
        let sixth = |img: &ImageRgb| img.map_pixels(|p| p.map(|v| v / 6.0));
        let dir = DirectionalLayerSet::new(
            layers.occlusion().clone(),
            layers.albedo().clone(),
            std::array::from_fn(|_| sixth(layers.irradiance())),
            std::array::from_fn(|_| sixth(layers.specular())),
        )
        .unwrap();
        let (a, b) = (compose(&layers), compose_directional(&dir));
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() <= 1e-6 * x.abs().max(1.0));
        }
    }

    #[test]
    fn intrinsic_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let layers = random_layers(&mut rng, 4, 4);
        let (o, irr, alb, spec) = layers.clone().into_parts();
        let visible = LayerSet::new(ImageScalar::filled(4, 4, 1.0), irr.clone(), alb.clone(), spec.clone()).unwrap();
        assert_eq!(shading_intrinsic(&visible).shading, irr);
        let white = LayerSet::new(o.clone(), ImageRgb::filled(4, 4, [1.0; 3]), alb, spec).unwrap();
        assert_eq!(shading_intrinsic(&white).shading, o.to_rgb());
    }

    #[test]
    fn intrinsic_recomposes_diffuse_part() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let layers = random_layers(&mut rng, 8, 8);
        let pair = shading_intrinsic(&layers);
        // Oracle: elementwise O·ρ·I straight from the layers.
        let o = layers.occlusion().data();
        for idx in 0..64 {
            let (i, r) = (layers.irradiance().pixel(idx), layers.albedo().pixel(idx));
            let got = pair.recompose().pixel(idx);
            let via_compose = compose(&layers.without_specular()).pixel(idx);
            for k in 0..3 {
                let want = o[idx] as f64 * i[k] as f64 * r[k] as f64;
                assert!((got[k] as f64 - want).abs() <= 2.0 * f32::EPSILON as f64 * want.max(1e-30));
                assert!((got[k] - via_compose[k]).abs() <= 2.0 * f32::EPSILON * via_compose[k].abs());
            }
        }
    }

    #[test]
    fn residuals_vanish_on_consistent_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut layers = random_layers(&mut rng, 7, 3);
        // Include a fully occluded pixel to exercise the guard.
        let mut occ = layers.occlusion().data().to_vec();
        occ[0] = 0.0;
        let (_, i, a, s) = layers.into_parts();
        layers = LayerSet::new(ImageScalar::new(7, 3, occ).unwrap(), i, a, s).unwrap();
        let c = compose(&layers);
        let r = recombination_residuals(&layers, &c, ResidualSource::Predicted).unwrap();
        for img in [&r.r1, &r.r2, &r.r3] {
            assert!(img.data().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn specular_perturbation_shows_up_linearly() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let layers = random_layers(&mut rng, 5, 5);
        let c = compose(&layers);
        let delta = 0.125f32;
        let (o, i, a, s) = layers.clone().into_parts();
        let perturbed = LayerSet::new(o.clone(), i, a, s.map_pixels(|p| p.map(|v| v + delta))).unwrap();
        let r = recombination_residuals(&perturbed, &c, ResidualSource::Predicted).unwrap();
        for idx in 0..25 {
            for k in 0..3 {
                let want = -(o.data()[idx] as f64) * delta as f64;
                assert!((r.r1.pixel(idx)[k] as f64 - want).abs() < 1e-6);
                assert!((r.r2.pixel(idx)[k] as f64 + delta as f64).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn residuals_match_scalar_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pred = random_layers(&mut rng, 6, 6);
        let gt = random_layers(&mut rng, 6, 6);
        let c = ImageRgb::linear(6, 6, (0..108).map(|_| rng.gen_range(0.0..2.0)).collect()).unwrap();
        let rp = recombination_residuals(&pred, &c, ResidualSource::Predicted).unwrap();
        let rg = recombination_residuals(&pred, &c, ResidualSource::Reference(&gt)).unwrap();
        for idx in 0..36 {
            let o = pred.occlusion().data()[idx] as f64;
            let og = (gt.occlusion().data()[idx] as f64).max(RESIDUAL_EPSILON);
            for k in 0..3 {
                let cc = c.pixel(idx)[k] as f64;
                let i = pred.irradiance().pixel(idx)[k] as f64;
                let rho = pred.albedo().pixel(idx)[k] as f64;
                let s = pred.specular().pixel(idx)[k] as f64;
                let sg = gt.specular().pixel(idx)[k] as f64;
                let tol = |v: f64| 1e-5 * v.abs().max(1.0);
                let r1 = cc - o * (i * rho + s);
                let r2 = cc / o.max(RESIDUAL_EPSILON) - (i * rho + s);
                assert!((rp.r1.pixel(idx)[k] as f64 - r1).abs() < tol(r1));
                assert!((rp.r2.pixel(idx)[k] as f64 - r2).abs() < tol(r2));
                assert!((rp.r3.pixel(idx)[k] as f64 - (cc / o - s - i * rho)).abs() < tol(r2));
                let g2 = cc / og - (i * rho + s);
                let g3 = cc / og - sg - i * rho;
                assert!((rg.r2.pixel(idx)[k] as f64 - g2).abs() < tol(g2));
                assert!((rg.r3.pixel(idx)[k] as f64 - g3).abs() < tol(g3));
            }
        }
    }

    #[test]
    fn layer_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let stem = LayerStem::new(dir.path().join("x"));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let layers = random_layers(&mut rng, 4, 3);
        layers.write(&stem).unwrap();
        assert_eq!(LayerSet::read(&stem).unwrap(), layers);
        let dl = DirectionalLayerSet::new(
            layers.occlusion().clone(),
            layers.albedo().clone(),
            std::array::from_fn(|i| layers.irradiance().map_pixels(|p| p.map(|v| v * i as f32))),
            std::array::from_fn(|i| layers.specular().map_pixels(|p| p.map(|v| v + i as f32))),
        )
        .unwrap();
        dl.write(&stem).unwrap();
        assert_eq!(DirectionalLayerSet::read(&stem).unwrap(), dl);
    }

    proptest! {
        #[test]
        fn compose_is_monotone_in_occlusion(
            o1 in 0.0f32..1.0, bump in 0.0f32..1.0,
            i in proptest::array::uniform3(0.0f32..4.0),
            rho in proptest::array::uniform3(0.0f32..1.0),
            s in proptest::array::uniform3(0.0f32..2.0),
        ) {
            let o2 = (o1 + bump).min(1.0);
            let lo = compose(&pixel_layers(o1, i, rho, s));
            let hi = compose(&pixel_layers(o2, i, rho, s));
            for k in 0..3 {
                prop_assert!(hi.data()[k] >= lo.data()[k]);
            }
        }

        #[test]
        fn shading_ignores_specular(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let layers = random_layers(&mut rng, 3, 3);
            let other = layers.without_specular();
            prop_assert_eq!(shading_intrinsic(&layers), shading_intrinsic(&other));
        }

        #[test]
        fn residuals_zero_for_any_consistent_layers(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let layers = random_layers(&mut rng, 4, 4);
            let r = recombination_residuals(&layers, &compose(&layers), ResidualSource::Predicted).unwrap();
            prop_assert!(r.r1.data().iter().chain(r.r2.data()).chain(r.r3.data()).all(|&v| v == 0.0));
        }
    }
}
