//! Separation-quality measures and PSNR.
//!
//! `M(Ĥ)(T) = ‖g∗H - g∗B_{T·max Ĥ}(Ĥ)‖₂ / ‖g∗H‖₂` with `g` a unit-sum
//! Gaussian and `H` the ground truth binarized at half its maximum.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::image::{convolve_periodic, RasterImage};

/// Reported instead of +∞ for identical images.
pub const PSNR_CAP_DB: f64 = 200.0;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeasureConfig {
    pub gaussian_sigma: f64,
    pub thresholds: Vec<f64>,
}

impl Default for MeasureConfig {
    /// `σ = 2` px; thresholds `0.01, 0.02, …, 0.99`.
    fn default() -> Self {
        Self {
            gaussian_sigma: 2.0,
            thresholds: (1..100).map(|i| i as f64 / 100.0).collect(),
        }
    }
}

impl MeasureConfig {
    pub fn with_sigma(gaussian_sigma: f64) -> Self {
        Self {
            gaussian_sigma,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gaussian_sigma > 0.0) || !self.gaussian_sigma.is_finite() {
            return Err(invalid("gaussian_sigma", "must be positive"));
        }
        if self.thresholds.is_empty() {
            return Err(invalid("thresholds", "at least one threshold is required"));
        }
        if let Some(t) = self.thresholds.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(invalid("thresholds", alloc::format!("{t} is not inside (0, 1)")));
        }
        Ok(())
    }

    pub fn kernel_radius(&self) -> usize {
        libm::ceil(3.0 * self.gaussian_sigma) as usize
    }
}

/// `(2R+1)²` Gaussian with `R = ⌈3σ⌉`, normalized to unit sum.
pub fn gaussian_kernel(sigma: f64) -> Result<RasterImage> {
    let cfg = MeasureConfig::with_sigma(sigma);
    cfg.validate()?;
    let radius = cfg.kernel_radius();
    let n = 2 * radius + 1;
    let k = RasterImage::from_fn(n, n, |r, c| {
        let dy = r as f64 - radius as f64;
        let dx = c as f64 - radius as f64;
        libm::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma))
    })?;
    let s = k.sum();
    Ok(k.scale(1.0 / s))
}

/// `g ∗ img` (periodic).
pub fn smooth(img: &RasterImage, sigma: f64) -> Result<RasterImage> {
    let k = gaussian_kernel(sigma)?;
    if k.height() > img.height() || k.width() > img.width() {
        return Err(invalid("gaussian_sigma", "kernel larger than the image"));
    }
    convolve_periodic(img, &k)
}

/// Indicator of `img >= t_abs`.
pub fn binarize(img: &RasterImage, t_abs: f64) -> RasterImage {
    img.map(|v| if v >= t_abs { 1.0 } else { 0.0 })
}

/// `B_{T·max}(img)`; an image whose maximum is not positive gives an empty mask.
pub fn relative_mask(img: &RasterImage, t: f64) -> RasterImage {
    let peak = img.max();
    if peak > 0.0 {
        binarize(img, t * peak)
    } else {
        img.map(|_| 0.0)
    }
}

/// Smoothed ground truth, reusable across thresholds.
#[derive(Debug, Clone)]
pub struct SmoothedTruth {
    field: RasterImage,
    norm: f64,
    sigma: f64,
}

impl SmoothedTruth {
    pub fn new(truth: &RasterImage, cfg: &MeasureConfig) -> Result<Self> {
        cfg.validate()?;
        let peak = truth.max();
        if !(peak > 0.0) {
            return Err(Error::UndefinedMeasure("ground truth has no positive values"));
        }
        let field = smooth(&binarize(truth, 0.5 * peak), cfg.gaussian_sigma)?;
        let norm = field.norm_l2();
        if !(norm > 0.0) {
            return Err(Error::UndefinedMeasure("smoothed ground truth vanishes"));
        }
        Ok(Self {
            field,
            norm,
            sigma: cfg.gaussian_sigma,
        })
    }

    pub fn measure(&self, estimate: &RasterImage, t: f64) -> Result<f64> {
        self.field.ensure_same_dims(estimate)?;
        if !(t > 0.0 && t < 1.0) {
            return Err(invalid("threshold", alloc::format!("{t} is not inside (0, 1)")));
        }
        let est = smooth(&relative_mask(estimate, t), self.sigma)?;
        Ok(self.field.sub(&est)?.norm_l2() / self.norm)
    }
}

fn measure(truth: &RasterImage, estimate: &RasterImage, t: f64, cfg: &MeasureConfig) -> Result<f64> {
    truth.ensure_same_dims(estimate)?;
    SmoothedTruth::new(truth, cfg)?.measure(estimate, t)
}

/// `M_p(P̂)(T)`.
pub fn measure_points(truth: &RasterImage, estimate: &RasterImage, t: f64, cfg: &MeasureConfig) -> Result<f64> {
    measure(truth, estimate, t, cfg)
}

/// `M_c(Ĉ)(T)`.
pub fn measure_curves(truth: &RasterImage, estimate: &RasterImage, t: f64, cfg: &MeasureConfig) -> Result<f64> {
    measure(truth, estimate, t, cfg)
}

/// `(T, M(T))` over the configured threshold grid.
pub fn measure_over_thresholds(
    truth: &RasterImage,
    estimate: &RasterImage,
    cfg: &MeasureConfig,
) -> Result<Vec<(f64, f64)>> {
    truth.ensure_same_dims(estimate)?;
    let smoothed = SmoothedTruth::new(truth, cfg)?;
    cfg.thresholds
        .iter()
        .map(|&t| Ok((t, smoothed.measure(estimate, t)?)))
        .collect()
}

/// One row of the points / curves measure table.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeasureRow {
    pub t: f64,
    pub m_p: f64,
    pub m_c: f64,
}

pub fn measure_table(
    truth_points: &RasterImage,
    truth_curves: &RasterImage,
    est_points: &RasterImage,
    est_curves: &RasterImage,
    cfg: &MeasureConfig,
) -> Result<Vec<MeasureRow>> {
    let p = measure_over_thresholds(truth_points, est_points, cfg)?;
    let c = measure_over_thresholds(truth_curves, est_curves, cfg)?;
    Ok(p.into_iter()
        .zip(c)
        .map(|((t, m_p), (_, m_c))| MeasureRow { t, m_p, m_c })
        .collect())
}

/// `10 log₁₀(peak² / MSE)` with `peak = max(reference)`, capped at 200 dB.
pub fn psnr(reference: &RasterImage, estimate: &RasterImage) -> Result<f64> {
    reference.ensure_same_dims(estimate)?;
    let peak = reference.max();
    if !(peak > 0.0) {
        return Err(Error::UndefinedMeasure("reference peak is not positive"));
    }
    let mse = reference
        .data()
        .iter()
        .zip(estimate.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / reference.len() as f64;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * libm::log10(peak * peak / mse)).min(PSNR_CAP_DB))
}
