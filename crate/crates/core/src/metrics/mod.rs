//! Error metrics and decomposition reports.
//!
//! Layer L2 losses are taken in linear units. The albedo comparison (DSSIM
//! and NRMSE) is done on gamma-encoded albedo, like stored composites.

mod ssim;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::imagio::{gamma_encode, ImageRgb, ImageScalar, STORAGE_GAMMA};
use crate::model::{compose, recombination_residuals, LayerSet, ResidualSource};
use crate::{Error, Result};

pub use ssim::{dssim, ssim, SSIM_SIGMA, SSIM_WINDOW};

/// Images that can be compared value by value.
pub trait ImageValues {
    fn dims(&self) -> (usize, usize);
    fn values(&self) -> &[f32];
}

impl ImageValues for ImageRgb {
    fn dims(&self) -> (usize, usize) {
        ImageRgb::dims(self)
    }

    fn values(&self) -> &[f32] {
        self.data()
    }
}

impl ImageValues for ImageScalar {
    fn dims(&self) -> (usize, usize) {
        ImageScalar::dims(self)
    }

    fn values(&self) -> &[f32] {
        self.data()
    }
}

fn check_dims<I: ImageValues>(a: &I, b: &I) -> Result<()> {
    if a.dims() == b.dims() {
        Ok(())
    } else {
        let ((aw, ah), (bw, bh)) = (a.dims(), b.dims());
        Err(Error::DimensionMismatch(format!("{aw}x{ah} vs {bw}x{bh}")))
    }
}

/// Mean squared difference over all pixels and channels.
pub fn l2_loss<I: ImageValues>(a: &I, b: &I) -> Result<f64> {
    check_dims(a, b)?;
    let (va, vb) = (a.values(), b.values());
    if va.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = va.iter().zip(vb).map(|(&x, &y)| (x as f64 - y as f64).powi(2)).sum();
    Ok(sum / va.len() as f64)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NrmseNorm {
    /// `‖pred − ref‖₂ / ‖ref‖₂`
    #[default]
    Euclidean,
    /// `RMSE / (max(ref) − min(ref))`
    MinMax,
}

/// [`nrmse_with`] under Euclidean normalization.
pub fn nrmse<I: ImageValues>(pred: &I, reference: &I) -> Result<f64> {
    nrmse_with(pred, reference, NrmseNorm::Euclidean)
}

pub fn nrmse_with<I: ImageValues>(pred: &I, reference: &I, norm: NrmseNorm) -> Result<f64> {
    check_dims(pred, reference)?;
    let (p, r) = (pred.values(), reference.values());
    let err: f64 = p.iter().zip(r).map(|(&x, &y)| (x as f64 - y as f64).powi(2)).sum();
    match norm {
        NrmseNorm::Euclidean => {
            let den: f64 = r.iter().map(|&y| (y as f64).powi(2)).sum();
            if den == 0.0 {
                return Err(Error::InvalidArgument("NRMSE reference has zero norm".into()));
            }
            Ok((err / den).sqrt())
        }
        NrmseNorm::MinMax => {
            let (lo, hi) = r.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v as f64), hi.max(v as f64))
            });
            if !(hi > lo) {
                return Err(Error::InvalidArgument("NRMSE reference has zero range".into()));
            }
            Ok((err / r.len() as f64).sqrt() / (hi - lo))
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LayerL2 {
    pub occlusion: f64,
    pub irradiance: f64,
    pub albedo: f64,
    pub specular: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub records: usize,
    pub per_layer_l2: LayerL2,
    /// Mean squared r₁, r₂, r₃ per channel.
    pub recombination: [f64; 3],
    pub dssim: MeanStd,
    pub nrmse: MeanStd,
    pub nrmse_norm: NrmseNorm,
}

/// Options for [`evaluate_decomposition`].
#[derive(Clone, Copy, Debug, Default)]
pub struct EvalOptions<'a> {
    /// Input image; defaults to `compose(gt)`.
    pub composite: Option<&'a ImageRgb>,
    /// Use the ground truth's O and S in r₂, r₃ instead of the prediction's.
    pub reference_residuals: bool,
    pub nrmse_norm: NrmseNorm,
}

fn mean_square(img: &ImageRgb) -> f64 {
    let d = img.data();
    d.iter().map(|&v| (v as f64).powi(2)).sum::<f64>() / d.len().max(1) as f64
}

/// Scores one predicted decomposition against ground truth.
pub fn evaluate_decomposition(pred: &LayerSet, gt: &LayerSet, opts: EvalOptions<'_>) -> Result<EvalReport> {
    let dims = gt.dims();
    if pred.dims() != dims {
        return Err(Error::DimensionMismatch(format!(
            "prediction is {}x{}, ground truth {}x{}",
            pred.dims().0,
            pred.dims().1,
            dims.0,
            dims.1
        )));
    }
    let owned;
    let composite = match opts.composite {
        Some(c) => c,
        None => {
            owned = compose(gt);
            &owned
        }
    };
    let source = if opts.reference_residuals {
        ResidualSource::Reference(gt)
    } else {
        ResidualSource::Predicted
    };
    let res = recombination_residuals(pred, composite, source)?;
    let pa = gamma_encode(pred.albedo(), STORAGE_GAMMA)?;
    let ga = gamma_encode(gt.albedo(), STORAGE_GAMMA)?;
    Ok(EvalReport {
        records: 1,
        per_layer_l2: LayerL2 {
            occlusion: l2_loss(pred.occlusion(), gt.occlusion())?,
            irradiance: l2_loss(pred.irradiance(), gt.irradiance())?,
            albedo: l2_loss(pred.albedo(), gt.albedo())?,
            specular: l2_loss(pred.specular(), gt.specular())?,
        },
        recombination: [mean_square(&res.r1), mean_square(&res.r2), mean_square(&res.r3)],
        dssim: MeanStd::of(&[dssim(&pa, &ga)?]),
        nrmse: MeanStd::of(&[nrmse_with(&pa, &ga, opts.nrmse_norm)?]),
        nrmse_norm: opts.nrmse_norm,
    })
}

/// One prediction to score: `(pred, gt, composite)`.
pub type EvalItem<'a> = (&'a LayerSet, &'a LayerSet, Option<&'a ImageRgb>);

/// Scores each item in parallel and aggregates: L2 and recombination terms
/// are averaged over records; DSSIM and NRMSE are reported as mean ± std.
pub fn evaluate_batch(items: &[EvalItem<'_>], opts: EvalOptions<'_>) -> Result<EvalReport> {
    if items.is_empty() {
        return Err(Error::InvalidArgument("nothing to evaluate".into()));
    }
    let reports = items
        .par_iter()
        .map(|&(pred, gt, c)| evaluate_decomposition(pred, gt, EvalOptions { composite: c, ..opts }))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(&reports))
}

/// Combines single-record reports.
pub fn aggregate(reports: &[EvalReport]) -> EvalReport {
    let n = reports.len().max(1) as f64;
    let avg = |f: &dyn Fn(&EvalReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    let dssims: Vec<f64> = reports.iter().map(|r| r.dssim.mean).collect();
    let nrmses: Vec<f64> = reports.iter().map(|r| r.nrmse.mean).collect();
    EvalReport {
        records: reports.len(),
        per_layer_l2: LayerL2 {
            occlusion: avg(&|r| r.per_layer_l2.occlusion),
            irradiance: avg(&|r| r.per_layer_l2.irradiance),
            albedo: avg(&|r| r.per_layer_l2.albedo),
            specular: avg(&|r| r.per_layer_l2.specular),
        },
        recombination: std::array::from_fn(|k| avg(&|r| r.recombination[k])),
        dssim: MeanStd::of(&dssims),
        nrmse: MeanStd::of(&nrmses),
        nrmse_norm: reports.first().map_or(NrmseNorm::Euclidean, |r| r.nrmse_norm),
    }
}

impl EvalReport {
    /// `key = value` lines after a `#` header.
    pub fn to_text(&self) -> String {
        let norm = match self.nrmse_norm {
            NrmseNorm::Euclidean => "euclidean",
            NrmseNorm::MinMax => "minmax",
        };
        let mut s = String::new();
        s.push_str("# layer L2 and recombination residuals in linear units\n");
        s.push_str("# albedo DSSIM and NRMSE on gamma-encoded albedo (gamma 2.0)\n");
        let mut kv = |k: &str, v: f64| writeln!(s, "{k} = {v:.9e}").expect("write to string");
        kv("records", self.records as f64);
        kv("l2.occlusion", self.per_layer_l2.occlusion);
        kv("l2.irradiance", self.per_layer_l2.irradiance);
        kv("l2.albedo", self.per_layer_l2.albedo);
        kv("l2.specular", self.per_layer_l2.specular);
        for (i, r) in self.recombination.iter().enumerate() {
            kv(&format!("recombination.r{}", i + 1), *r);
        }
        kv("albedo.dssim.mean", self.dssim.mean);
        kv("albedo.dssim.std", self.dssim.std);
        kv("albedo.nrmse.mean", self.nrmse.mean);
        kv("albedo.nrmse.std", self.nrmse.std);
        writeln!(s, "albedo.nrmse.norm = {norm}").expect("write to string");
        s
    }
}

/// Parses the numeric `key = value` lines of a report.
pub fn parse_report(text: &str) -> BTreeMap<String, f64> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .filter_map(|l| l.split_once('='))
        .filter_map(|(k, v)| Some((k.trim().to_string(), v.trim().parse::<f64>().ok()?)))
        .collect()
}
