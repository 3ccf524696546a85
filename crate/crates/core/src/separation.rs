//! Block-relaxation solver for the reduced problem
//! `min ‖Φ₁ᵀW‖₁ + ‖Φ₂ᵀS‖₁ + λ‖f̃ - W - S‖²₂`.
//!
//! Each iteration soft-thresholds the analysis coefficients of `W + r` in
//! the wavelet frame and of `S + r` in the shearlet frame, `r` being the
//! current residual, with a threshold that decreases from `λ_max` to
//! `λ_min`. Lowpass planes are never thresholded.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::image::RasterImage;
use crate::shearlets::{
    build_filter_bank, compute_dual_bank, shearlet_directional_l1, shearlet_forward, shearlet_map,
    ShearletCoefficients, ShearletFilterBank, ShearletSpec,
};
use crate::subband::{build_subband_family, decompose, preprocess, SubbandFamily, Weights};
use crate::wavelets::{uwt_forward, uwt_inverse, Orientation, WaveletCoefficients, WaveletSpec};

/// `sign(x)·max(|x| - λ, 0)`.
#[inline]
pub fn soft_threshold(x: f64, lambda: f64) -> f64 {
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        0.0
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda", alloc::format!("{lambda} is not a finite nonnegative number")));
    }
    Ok(())
}

fn shrink(data: &mut [f64], lambda: f64) {
    for v in data {
        *v = soft_threshold(*v, lambda);
    }
}

/// Soft thresholding of a coefficient stack; lowpass planes pass unchanged.
pub trait SoftThreshold: Sized {
    fn soft_threshold(&self, lambda: f64) -> Result<Self>;
}

impl SoftThreshold for WaveletCoefficients {
    fn soft_threshold(&self, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let mut out = self.clone();
        for p in out.details_mut() {
            shrink(p.data_mut(), lambda);
        }
        Ok(out)
    }
}

impl SoftThreshold for ShearletCoefficients {
    fn soft_threshold(&self, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let mut out = self.clone();
        let lowpass: Vec<bool> = out.indices().iter().map(|i| i.is_lowpass()).collect();
        for (p, low) in out.planes_mut().iter_mut().zip(lowpass) {
            if !low {
                shrink(p.data_mut(), lambda);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ScheduleKind {
    #[default]
    Linear,
    Exponential,
}

/// Floor applied to both endpoints of a geometric schedule.
pub const GEOMETRIC_FLOOR: f64 = 1e-12;

/// Non-increasing thresholds from `lambda_max` to `lambda_min`.
pub fn threshold_schedule(lambda_max: f64, lambda_min: f64, iterations: usize, kind: ScheduleKind) -> Result<Vec<f64>> {
    if iterations == 0 {
        return Err(invalid("iterations", "at least one iteration is required"));
    }
    check_lambda(lambda_min)?;
    check_lambda(lambda_max)?;
    if lambda_min > lambda_max {
        return Err(invalid(
            "lambda_min",
            alloc::format!("{lambda_min} exceeds lambda_max {lambda_max}"),
        ));
    }
    if iterations == 1 {
        return Ok(alloc::vec![lambda_max]);
    }
    let last = (iterations - 1) as f64;
    let mut out: Vec<f64> = match kind {
        ScheduleKind::Linear => (0..iterations)
            .map(|t| lambda_max - (lambda_max - lambda_min) * t as f64 / last)
            .collect(),
        ScheduleKind::Exponential => {
            let hi = lambda_max.max(GEOMETRIC_FLOOR);
            let lo = lambda_min.max(GEOMETRIC_FLOOR);
            let ratio = lo / hi;
            (0..iterations)
                .map(|t| hi * libm::pow(ratio, t as f64 / last))
                .collect()
        }
    };
    let (first, end) = match kind {
        ScheduleKind::Linear => (lambda_max, lambda_min),
        ScheduleKind::Exponential => (lambda_max.max(GEOMETRIC_FLOOR), lambda_min.max(GEOMETRIC_FLOOR)),
    };
    out[0] = first;
    out[iterations - 1] = end;
    // rounding must not break monotonicity
    for t in 1..iterations {
        if out[t] > out[t - 1] {
            out[t] = out[t - 1];
        }
    }
    Ok(out)
}

/// How the smallest threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LambdaMin {
    /// `3σ̂`, σ̂ = MAD of the finest diagonal wavelet band / 0.6745.
    Auto,
    Fixed(f64),
}

/// Relative weighting of the shearlet threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Calibration {
    /// ratio of the medians of the top 1% analysis magnitudes
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub iterations: usize,
    pub lambda_max_factor: f64,
    pub lambda_min: LambdaMin,
    pub schedule: ScheduleKind,
    pub calibration: Calibration,
    pub wavelet: WaveletSpec,
    pub shearlet: ShearletSpec,
    pub subband_levels: usize,
    pub weights: Weights,
}

pub const DEFAULT_ITERATIONS: usize = 15;
pub const DEFAULT_SCALES: usize = 4;
pub const DEFAULT_SUBBAND_LEVELS: usize = 3;

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            iterations: DEFAULT_ITERATIONS,
            lambda_max_factor: 1.0,
            lambda_min: LambdaMin::Auto,
            schedule: ScheduleKind::Linear,
            calibration: Calibration::Auto,
            wavelet: WaveletSpec::cdf97(DEFAULT_SCALES).expect("built-in filters"),
            shearlet: ShearletSpec::with_scales(DEFAULT_SCALES).expect("built-in filters"),
            subband_levels: DEFAULT_SUBBAND_LEVELS,
            weights: Weights::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(invalid("iterations", "at least one iteration is required"));
        }
        if !(self.lambda_max_factor > 0.0 && self.lambda_max_factor <= 1.0) {
            return Err(invalid("lambda_max_factor", "must lie in (0, 1]"));
        }
        if let LambdaMin::Fixed(v) = self.lambda_min {
            check_lambda(v)?;
        }
        if let Calibration::Fixed(v) = self.calibration {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid("calibration", "must be positive"));
            }
        }
        if self.weights.levels() != self.subband_levels {
            return Err(invalid(
                "weights",
                alloc::format!("expected {} weights, got {}", self.subband_levels + 1, self.weights.values().len()),
            ));
        }
        Ok(())
    }
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceRecord {
    pub iteration: usize,
    pub lambda: f64,
    pub residual_norm: f64,
    pub l1_wavelet: f64,
    pub l1_shearlet: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationResult {
    pub points: RasterImage,
    pub curves: RasterImage,
    pub residual: RasterImage,
    pub trace: Vec<TraceRecord>,
    pub lambda_max: f64,
    pub lambda_min: f64,
    /// shearlet threshold = wavelet threshold × rho
    pub rho: f64,
}

/// Shearlet bank and its dual on one grid, reusable across runs.
#[derive(Debug, Clone)]
pub struct Dictionaries {
    pub bank: ShearletFilterBank,
    pub dual: ShearletFilterBank,
}

impl Dictionaries {
    pub fn new(height: usize, width: usize, config: &SolverConfig) -> Result<Self> {
        let bank = build_filter_bank(height, width, &config.shearlet)?;
        let dual = compute_dual_bank(&bank)?;
        Ok(Self { bank, dual })
    }
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Median of the largest 1% of `|values|` (at least one value).
fn top_percent_median(mut magnitudes: Vec<f64>) -> f64 {
    if magnitudes.is_empty() {
        return 0.0;
    }
    let n = magnitudes.len();
    let keep = n.div_ceil(100).max(1);
    let split = n - keep;
    magnitudes.select_nth_unstable_by(split, f64::total_cmp);
    median(&mut magnitudes[split..])
}

/// Noise estimate: MAD of the finest diagonal band / 0.6745.
pub fn estimate_noise(coeffs: &WaveletCoefficients) -> f64 {
    let Some(band) = coeffs.detail(1, Orientation::Diagonal) else {
        return 0.0;
    };
    let mut values = band.data().to_vec();
    let center = median(&mut values);
    let mut dev: Vec<f64> = band.data().iter().map(|v| libm::fabs(v - center)).collect();
    median(&mut dev) / 0.6745
}

struct Calibrated {
    lambda_max: f64,
    lambda_min: f64,
    rho: f64,
}

fn calibrate(f: &RasterImage, config: &SolverConfig, dicts: &Dictionaries) -> Result<Calibrated> {
    let wc = uwt_forward(f, &config.wavelet)?;
    let wav: Vec<f64> = wc
        .details
        .iter()
        .flat_map(|d| d.plane.data().iter().map(|v| libm::fabs(*v)))
        .collect();
    let wav_max = wav.iter().copied().fold(0.0, f64::max);
    let sc = shearlet_forward(f, &dicts.bank)?;
    let shear: Vec<f64> = sc
        .indices()
        .iter()
        .zip(sc.planes())
        .filter(|(i, _)| !i.is_lowpass())
        .flat_map(|(_, p)| p.data().iter().map(|v| libm::fabs(*v)))
        .collect();
    let shear_max = shear.iter().copied().fold(0.0, f64::max);
    let rho = match config.calibration {
        Calibration::Fixed(v) => v,
        Calibration::Auto => {
            let a = top_percent_median(shear);
            let b = top_percent_median(wav);
            if a > 0.0 && b > 0.0 {
                a / b
            } else {
                1.0
            }
        }
    };
    let lambda_max = config.lambda_max_factor * wav_max.max(shear_max / rho);
    let lambda_min = match config.lambda_min {
        // noise level above the coefficient range: a single threshold
        LambdaMin::Auto => (3.0 * estimate_noise(&wc)).min(lambda_max),
        LambdaMin::Fixed(v) => v,
    };
    Ok(Calibrated {
        lambda_max,
        lambda_min,
        rho,
    })
}

fn ensure_finite(img: &RasterImage, stage: &'static str, iteration: usize) -> Result<()> {
    if img.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { stage, iteration })
    }
}

/// Runs the solver on an already preprocessed image.
pub fn separate(f_tilde: &RasterImage, config: &SolverConfig) -> Result<SeparationResult> {
    config.validate()?;
    let (h, w) = f_tilde.dims();
    let dicts = Dictionaries::new(h, w, config)?;
    separate_with(f_tilde, config, &dicts)
}

/// [`separate`] with prebuilt dictionaries.
pub fn separate_with(f_tilde: &RasterImage, config: &SolverConfig, dicts: &Dictionaries) -> Result<SeparationResult> {
    separate_observed(f_tilde, config, dicts, |_| {})
}

/// Solver state after one iteration, as seen by an observer.
#[derive(Debug, Clone, Copy)]
pub struct IterationState<'a> {
    pub record: &'a TraceRecord,
    pub points: &'a RasterImage,
    pub curves: &'a RasterImage,
    pub residual: &'a RasterImage,
}

/// [`separate_with`], calling `observe` after every iteration.
pub fn separate_observed(
    f_tilde: &RasterImage,
    config: &SolverConfig,
    dicts: &Dictionaries,
    mut observe: impl FnMut(&IterationState<'_>),
) -> Result<SeparationResult> {
    config.validate()?;
    ensure_finite(f_tilde, "input", 0)?;
    let cal = calibrate(f_tilde, config, dicts)?;
    let schedule = threshold_schedule(cal.lambda_max, cal.lambda_min, config.iterations, config.schedule)?;
    let (h, w) = f_tilde.dims();
    let mut points = RasterImage::zeros(h, w)?;
    let mut curves = RasterImage::zeros(h, w)?;
    let mut trace = Vec::with_capacity(schedule.len());
    let mut residual = f_tilde.clone();
    for (t, &lambda) in schedule.iter().enumerate() {
        let iteration = t + 1;
        // W + r = f̃ - S
        let target = f_tilde.sub(&curves)?;
        let mut coeffs = uwt_forward(&target, &config.wavelet)?;
        for p in coeffs.details_mut() {
            shrink(p.data_mut(), lambda);
        }
        points = uwt_inverse(&coeffs, &config.wavelet)?;
        ensure_finite(&points, "wavelet update", iteration)?;

        let target = f_tilde.sub(&points)?;
        let shear_lambda = lambda * cal.rho;
        curves = shearlet_map(&target, &dicts.bank, &dicts.dual, |index, plane| {
            if !index.is_lowpass() {
                shrink(plane, shear_lambda);
            }
        })?;
        ensure_finite(&curves, "shearlet update", iteration)?;

        residual = f_tilde.sub(&points)?.sub(&curves)?;
        let record = TraceRecord {
            iteration,
            lambda,
            residual_norm: residual.norm_l2(),
            l1_wavelet: uwt_forward(&points, &config.wavelet)?.detail_l1(),
            l1_shearlet: shearlet_directional_l1(&curves, &dicts.bank)?,
        };
        observe(&IterationState {
            record: &record,
            points: &points,
            curves: &curves,
            residual: &residual,
        });
        trace.push(record);
    }
    Ok(SeparationResult {
        points,
        curves,
        residual,
        trace,
        lambda_max: cal.lambda_max,
        lambda_min: cal.lambda_min,
        rho: cal.rho,
    })
}

/// Preprocessed input `f̃` for `config`.
pub fn preprocess_for(f: &RasterImage, config: &SolverConfig) -> Result<RasterImage> {
    let family = build_subband_family(f.height(), f.width(), config.subband_levels)?;
    preprocess(f, &family, &config.weights)
}

/// Preprocessing followed by [`separate`].
pub fn separate_image(f: &RasterImage, config: &SolverConfig) -> Result<SeparationResult> {
    config.validate()?;
    let f_tilde = preprocess_for(f, config)?;
    separate(&f_tilde, config)
}

/// Solves the problem separately on each subband piece `F_j ∗ f`.
pub fn separate_bands(f: &RasterImage, family: &SubbandFamily, config: &SolverConfig) -> Result<Vec<SeparationResult>> {
    config.validate()?;
    let dicts = Dictionaries::new(f.height(), f.width(), config)?;
    decompose(f, family)?
        .iter()
        .map(|piece| separate_with(piece, config, &dicts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_soft_threshold() {
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(-2.0, 0.5), -1.5);
        assert_eq!(soft_threshold(3.25, 0.0), 3.25);
    }

    #[test]
    fn schedules() {
        assert_eq!(threshold_schedule(1.0, 0.0, 3, ScheduleKind::Linear).unwrap(), [1.0, 0.5, 0.0]);
        assert_eq!(threshold_schedule(2.0, 0.5, 1, ScheduleKind::Exponential).unwrap(), [2.0]);
        let e = threshold_schedule(1.0, 0.01, 3, ScheduleKind::Exponential).unwrap();
        assert_eq!(e[0], 1.0);
        assert!((e[1] - 0.1).abs() < 1e-15);
        assert_eq!(e[2], 0.01);
        let z = threshold_schedule(0.5, 0.0, 4, ScheduleKind::Exponential).unwrap();
        assert_eq!(z[3], GEOMETRIC_FLOOR);
        assert!(threshold_schedule(0.1, 0.2, 3, ScheduleKind::Linear).is_err());
        assert!(threshold_schedule(1.0, 0.0, 0, ScheduleKind::Linear).is_err());
        assert!(threshold_schedule(1.0, -0.1, 2, ScheduleKind::Linear).is_err());
    }

    #[test]
    fn top_percent() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        // top 10 values 991..=1000
        assert_eq!(top_percent_median(v), 995.5);
        assert_eq!(top_percent_median(alloc::vec![3.0]), 3.0);
    }

    #[test]
    fn noise_estimate_of_constant_is_zero() {
        let spec = WaveletSpec::cdf97(1).unwrap();
        let c = uwt_forward(&RasterImage::filled(32, 32, 3.0).unwrap(), &spec).unwrap();
        assert!(estimate_noise(&c) < 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut c = SolverConfig::default();
        c.validate().unwrap();
        c.lambda_max_factor = 1.5;
        assert!(c.validate().is_err());
        let c = SolverConfig {
            weights: Weights::ones(2),
            ..SolverConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn zero_input_is_fixed_point() {
        let config = SolverConfig {
            iterations: 3,
            wavelet: WaveletSpec::cdf97(2).unwrap(),
            shearlet: ShearletSpec::with_scales(2).unwrap(),
            ..SolverConfig::default()
        };
        let zero = RasterImage::zeros(48, 48).unwrap();
        let out = separate(&zero, &config).unwrap();
        assert!(out.points.data().iter().all(|&v| v == 0.0));
        assert!(out.curves.data().iter().all(|&v| v == 0.0));
        assert!(out.residual.data().iter().all(|&v| v == 0.0));
        assert_eq!(out.trace.len(), 3);
    }
}
