//! Structural similarity with an 11×11 Gaussian window (σ = 1.5),
//! `K₁ = 0.01`, `K₂ = 0.03`, dynamic range 1, over the valid region.

use crate::imagio::ImageRgb;
use crate::{Error, Result};

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

pub(crate) fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let half = (SSIM_WINDOW / 2) as f64;
    let mut k: [f64; SSIM_WINDOW] =
        std::array::from_fn(|i| (-((i as f64 - half).powi(2)) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp());
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Separable "valid" filtering of a `w × h` plane.
fn filter_valid(plane: &[f64], w: usize, h: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = w - SSIM_WINDOW + 1;
    let oh = h - SSIM_WINDOW + 1;
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        for x in 0..ow {
            rows[y * ow + x] = (0..SSIM_WINDOW).map(|i| k[i] * plane[y * w + x + i]).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = (0..SSIM_WINDOW).map(|i| k[i] * rows[(y + i) * ow + x]).sum();
        }
    }
    out
}

fn channel_ssim(a: &[f64], b: &[f64], w: usize, h: usize) -> f64 {
    let k = gaussian_kernel();
    let c1 = K1 * K1;
    let c2 = K2 * K2;
    let prod = |f: fn(f64, f64) -> f64| -> Vec<f64> { a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect() };
    let mu_a = filter_valid(a, w, h, &k);
    let mu_b = filter_valid(b, w, h, &k);
    let aa = filter_valid(&prod(|x, _| x * x), w, h, &k);
    let bb = filter_valid(&prod(|_, y| y * y), w, h, &k);
    let ab = filter_valid(&prod(|x, y| x * y), w, h, &k);
    let n = mu_a.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = aa[i] - ma * ma;
            let vb = bb[i] - mb * mb;
            let cov = ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
        })
        .sum();
    total / n as f64
}

/// Mean SSIM averaged over the three channels.
pub fn ssim(a: &ImageRgb, b: &ImageRgb) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let (w, h) = a.dims();
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::InvalidArgument(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {w}x{h}"
        )));
    }
    let plane = |img: &ImageRgb, c: usize| -> Vec<f64> { img.data().iter().skip(c).step_by(3).map(|&v| v as f64).collect() };
    let sum: f64 = (0..3).map(|c| channel_ssim(&plane(a, c), &plane(b, c), w, h)).sum();
    Ok(sum / 3.0)
}

/// Structural dissimilarity `(1 − SSIM) / 2`.
pub fn dssim(a: &ImageRgb, b: &ImageRgb) -> Result<f64> {
    Ok((1.0 - ssim(a, b)?) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(rng: &mut impl Rng, w: usize, h: usize) -> ImageRgb {
        ImageRgb::from_fn(w, h, |_, _| std::array::from_fn(|_| rng.gen::<f32>()))
    }

    /// Direct evaluation: explicit 2-D Gaussian weights at every window.
    fn ssim_direct(a: &ImageRgb, b: &ImageRgb) -> f64 {
        let (w, h) = a.dims();
        let s = SSIM_SIGMA;
        let mut wts = [[0.0f64; SSIM_WINDOW]; SSIM_WINDOW];
        let mut total = 0.0;
        for (i, row) in wts.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let (di, dj) = (i as f64 - 5.0, j as f64 - 5.0);
                *v = (-(di * di + dj * dj) / (2.0 * s * s)).exp();
                total += *v;
            }
        }
        let (c1, c2) = (0.0001, 0.0009);
        let mut acc = 0.0;
        let mut count = 0;
        for c in 0..3 {
            for y in 0..=h - SSIM_WINDOW {
                for x in 0..=w - SSIM_WINDOW {
                    let (mut ma, mut mb) = (0.0, 0.0);
                    for i in 0..SSIM_WINDOW {
                        for j in 0..SSIM_WINDOW {
                            let wt = wts[i][j] / total;
                            ma += wt * a.get(x + j, y + i)[c] as f64;
                            mb += wt * b.get(x + j, y + i)[c] as f64;
                        }
                    }
                    let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
                    for i in 0..SSIM_WINDOW {
                        for j in 0..SSIM_WINDOW {
                            let wt = wts[i][j] / total;
                            let da = a.get(x + j, y + i)[c] as f64 - ma;
                            let db = b.get(x + j, y + i)[c] as f64 - mb;
                            va += wt * da * da;
                            vb += wt * db * db;
                            cov += wt * da * db;
                        }
                    }
                    acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                    count += 1;
                }
            }
        }
        acc / count as f64
    }

    #[test]
    fn kernel_is_normalized_gaussian() {
        let k = gaussian_kernel();
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((k[5] / k[6] - (1.0 / (2.0 * 2.25f64)).exp()).abs() < 1e-12);
    }

    #[test]
    fn identical_images_have_zero_dssim() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_image(&mut rng, 20, 16);
        assert!(dssim(&a, &a).unwrap().abs() < 1e-12);
    }

    #[test]
    fn matches_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_image(&mut rng, 17, 14);
        let b = a.map_pixels(|p| p.map(|v| (0.7 * v + 0.1 * rng.gen::<f32>()).min(1.0)));
        let fast = ssim(&a, &b).unwrap();
        assert!((fast - ssim_direct(&a, &b)).abs() < 1e-10);
    }

    #[test]
    fn inverted_binary_image_approaches_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = ImageRgb::from_fn(32, 32, |_, _| [if rng.gen_bool(0.5) { 1.0 } else { 0.0 }; 3]);
        let inv = a.map_pixels(|p| p.map(|v| 1.0 - v));
        let d = dssim(&a, &inv).unwrap();
        assert!((d - (1.0 - ssim_direct(&a, &inv)) / 2.0).abs() < 1e-10);
        assert!(d > 0.95, "{d}");
    }

    #[test]
    fn too_small_or_mismatched() {
        let a = ImageRgb::filled(10, 20, [0.5; 3]);
        assert!(dssim(&a, &a).is_err());
        let b = ImageRgb::filled(12, 12, [0.5; 3]);
        let c = ImageRgb::filled(12, 13, [0.5; 3]);
        assert!(matches!(dssim(&b, &c), Err(Error::DimensionMismatch(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn symmetric_and_bounded(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_image(&mut rng, 13, 12);
            let b = random_image(&mut rng, 13, 12);
            let ab = dssim(&a, &b).unwrap();
            let ba = dssim(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&ab));
        }
    }
}
