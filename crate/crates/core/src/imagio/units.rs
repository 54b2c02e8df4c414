//! Gamma and exposure conventions.

use super::image::{Encoding, ImageRgb};
use crate::{Error, Result};

/// Gamma used for every stored LDR composite.
pub const STORAGE_GAMMA: f32 = 2.0;

const REC709: [f64; 3] = [0.2126, 0.7152, 0.0722];

/// Rec.709 luminance of a linear RGB triple.
#[inline]
pub fn luminance(rgb: [f64; 3]) -> f64 {
    REC709[0] * rgb[0] + REC709[1] * rgb[1] + REC709[2] * rgb[2]
}

fn check_gamma(gamma: f32) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")))
    }
}

/// Clamps linear values to `[0, 1]` and applies `v ↦ v^(1/γ)`.
pub fn gamma_encode(img: &ImageRgb, gamma: f32) -> Result<ImageRgb> {
    check_gamma(gamma)?;
    let inv = 1.0 / gamma as f64;
    Ok(img
        .map_pixels(|p| p.map(|v| (v.clamp(0.0, 1.0) as f64).powf(inv) as f32))
        .with_encoding(Encoding::Gamma(gamma)))
}

/// Applies `v ↦ v^γ`, producing a linear image.
pub fn gamma_decode(img: &ImageRgb, gamma: f32) -> Result<ImageRgb> {
    check_gamma(gamma)?;
    let g = gamma as f64;
    Ok(img
        .map_pixels(|p| p.map(|v| (v.max(0.0) as f64).powf(g) as f32))
        .with_encoding(Encoding::Linear))
}

/// Nearest-rank quantile: the element at 0-based index `⌈p·N⌉ − 1` of the
/// sorted values. `values` is sorted in place.
pub fn nearest_rank_quantile(values: &mut [f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty set");
    values.sort_by(f64::total_cmp);
    let rank = (p * values.len() as f64).ceil() as usize;
    values[rank.clamp(1, values.len()) - 1]
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExposureResult {
    pub image: ImageRgb,
    pub scale: f64,
}

/// Scales a linear image so that its `percentile` luminance maps to 1.
///
/// The quantile is taken over all pixels. If that quantile is zero while some
/// pixel is lit, the quantile over the lit pixels is used instead.
pub fn exposure_normalize(img: &ImageRgb, percentile: f64) -> Result<ExposureResult> {
    if !(percentile > 0.0 && percentile <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "percentile must be in (0, 1], got {percentile}"
        )));
    }
    let mut lum: Vec<f64> = img
        .pixels()
        .map(|p| luminance(p.map(f64::from)))
        .collect();
    if !lum.iter().any(|&l| l > 0.0) {
        return Err(Error::NoPositiveLuminance);
    }
    let mut q = nearest_rank_quantile(&mut lum, percentile);
    if q <= 0.0 {
        let mut lit: Vec<f64> = lum.into_iter().filter(|&l| l > 0.0).collect();
        q = nearest_rank_quantile(&mut lit, percentile);
    }
    let scale = 1.0 / q;
    let image = img.map_pixels(|p| p.map(|v| (v as f64 * scale) as f32));
    Ok(ExposureResult { image, scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn px(v: f32) -> ImageRgb {
        ImageRgb::filled(1, 1, [v; 3])
    }

    #[test]
    fn gamma_examples() {
        let enc = gamma_encode(&px(0.25), 2.0).unwrap();
        assert!((enc.data()[0] - 0.5).abs() < 1e-7);
        assert_eq!(enc.encoding(), Encoding::Gamma(2.0));
        for g in [0.5, 1.0, 2.0, 2.2, 7.0] {
            assert_eq!(gamma_encode(&px(1.0), g).unwrap().data()[0], 1.0);
        }
        let half = gamma_encode(&px(0.5), 2.0).unwrap().data()[0];
        assert!((half - std::f32::consts::FRAC_1_SQRT_2).abs() < 1e-6);
        assert!(gamma_encode(&px(0.5), 0.0).is_err());
        assert!(gamma_decode(&px(0.5), -1.0).is_err());
    }

    #[test]
    fn gamma_encode_clamps_hdr() {
        assert_eq!(gamma_encode(&px(4.0), 2.0).unwrap().data()[0], 1.0);
        assert_eq!(gamma_encode(&px(-0.1), 2.0).unwrap().data()[0], 0.0);
    }

    #[test]
    fn exposure_constant_image() {
        let r = exposure_normalize(&ImageRgb::filled(4, 4, [2.0; 3]), 0.95).unwrap();
        assert!((r.scale - 0.5).abs() < 1e-12);
        assert!(r.image.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn exposure_unit_quantile_is_unchanged() {
        let img = ImageRgb::from_fn(10, 10, |x, y| {
            let v = if x + 10 * y < 95 { (x + 10 * y) as f32 / 94.0 } else { 3.0 };
            [v; 3]
        });
        let r = exposure_normalize(&img, 0.95).unwrap();
        assert!((r.scale - 1.0).abs() < 1e-12);
        assert_eq!(r.image, img);
    }

    #[test]
    fn exposure_ramp_matches_sort_oracle() {
        let n = 10_000;
        let img = ImageRgb::from_fn(100, 100, |x, y| [((y * 100 + x) as f32) / (n - 1) as f32; 3]);
        // Oracle: sort luminances independently, take index ceil(0.95 n) - 1.
        let mut lums: Vec<f64> = img.pixels().map(|p| p[0] as f64 * (0.2126 + 0.7152 + 0.0722)).collect();
        lums.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected = 1.0 / lums[9499];
        let r = exposure_normalize(&img, 0.95).unwrap();
        assert!((r.scale - expected).abs() < 1e-9 * expected);
        assert!((r.scale - 1.0 / 0.95).abs() < 1e-3);
    }

    #[test]
    fn exposure_errors() {
        assert!(matches!(
            exposure_normalize(&ImageRgb::filled(3, 3, [0.0; 3]), 0.95),
            Err(Error::NoPositiveLuminance)
        ));
        assert!(exposure_normalize(&px(1.0), 0.0).is_err());
    }

    #[test]
    fn exposure_falls_back_to_lit_pixels() {
        let img = ImageRgb::from_fn(10, 10, |x, y| if x == 0 && y == 0 { [4.0; 3] } else { [0.0; 3] });
        let r = exposure_normalize(&img, 0.95).unwrap();
        assert!((r.scale - 0.25).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn gamma_round_trip(v in 0.0f32..=1.0, g in 0.2f32..5.0) {
            let back = gamma_decode(&gamma_encode(&px(v), g).unwrap(), g).unwrap();
            prop_assert!((back.data()[0] - v).abs() < 1e-6);
        }

        #[test]
        fn exposure_is_idempotent(vals in proptest::collection::vec(0.0f32..50.0, 3 * 64)) {
            prop_assume!(vals.iter().any(|&v| v > 1e-3));
            let img = ImageRgb::linear(8, 8, vals).unwrap();
            let first = exposure_normalize(&img, 0.95).unwrap();
            let second = exposure_normalize(&first.image, 0.95).unwrap();
            prop_assert!((second.scale - 1.0).abs() < 1e-6);
        }

        #[test]
        fn luminance_non_negative(r in 0.0f64..10.0, g in 0.0f64..10.0, b in 0.0f64..10.0) {
            prop_assert!(luminance([r, g, b]) >= 0.0);
        }
    }
}
