use alloc::vec::Vec;

use num_complex::Complex64;

use super::fan::maxflat_halfband;
use super::shear::{digital_shear, Shear};
use crate::error::{invalid, Error, Result};
use crate::image::{bin_frequency, RasterImage, SpectralImage};
use crate::wavelets::WaveletSpec;

/// Default order of the maxflat fan prototype.
pub const DEFAULT_FAN_ORDER: usize = 10;

/// Geometry of the shearlet system.
#[derive(Debug, Clone, PartialEq)]
pub struct ShearletSpec {
    scales: usize,
    fan_order: usize,
    filters: WaveletSpec,
}

impl ShearletSpec {
    /// `filters` supplies the 1D scaling / wavelet pair; its level count is
    /// ignored, the cascade depth is `scales`.
    pub fn new(scales: usize, fan_order: usize, filters: WaveletSpec) -> Result<Self> {
        if scales == 0 {
            return Err(invalid("scales", "at least one scale is required"));
        }
        if scales > 12 {
            return Err(invalid("scales", "at most 12 scales are supported"));
        }
        if fan_order == 0 {
            return Err(invalid("fan_filter_order", "must be at least 1"));
        }
        Ok(Self {
            scales,
            fan_order,
            filters,
        })
    }

    /// CDF 9/7 base filters and the default fan order.
    pub fn with_scales(scales: usize) -> Result<Self> {
        Self::new(scales, DEFAULT_FAN_ORDER, WaveletSpec::cdf97(scales.max(1))?)
    }

    pub fn scales(&self) -> usize {
        self.scales
    }

    pub fn fan_order(&self) -> usize {
        self.fan_order
    }

    pub fn filters(&self) -> &WaveletSpec {
        &self.filters
    }

    /// Shears of scale `j`: `k / 2^⌈j/2⌉` for `|k| <= ⌈2^(j/2)⌉`.
    pub fn shears(&self, j: usize) -> impl Iterator<Item = Shear> {
        let kmax = shear_bound(j) as i64;
        let c = refinement(j);
        (-kmax..=kmax).map(move |k| Shear::new(k, c))
    }

    /// Directional filters over both cones.
    pub fn directional_count(&self) -> usize {
        (0..self.scales).map(|j| 2 * shear_count(j)).sum()
    }

    /// Smallest side length for which the coarsest band spans a few bins.
    pub fn min_side(&self) -> usize {
        4 << self.scales
    }
}

/// `⌈2^(j/2)⌉`
fn shear_bound(j: usize) -> u64 {
    let target = 1u128 << j;
    let mut m = 1u64 << (j / 2);
    while (m as u128) * (m as u128) < target {
        m += 1;
    }
    m
}

fn refinement(j: usize) -> u32 {
    j.div_ceil(2) as u32
}

/// Number of shears per cone at scale `j`: `2⌈2^(j/2)⌉ + 1`.
pub fn shear_count(j: usize) -> usize {
    2 * shear_bound(j) as usize + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Cone {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FilterIndex {
    Lowpass,
    Directional { scale: usize, shear: Shear, cone: Cone },
}

impl FilterIndex {
    pub fn is_lowpass(&self) -> bool {
        matches!(self, FilterIndex::Lowpass)
    }
}

/// Filters of a shearlet system, stored as transfer functions on the working
/// grid. Entry 0 is the lowpass; directional entries follow scale by scale,
/// horizontal cone before vertical, shears in increasing order.
#[derive(Debug, Clone)]
pub struct ShearletFilterBank {
    height: usize,
    width: usize,
    indices: Vec<FilterIndex>,
    spectra: Vec<SpectralImage>,
}

impl ShearletFilterBank {
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.spectra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectra.is_empty()
    }

    pub fn indices(&self) -> &[FilterIndex] {
        &self.indices
    }

    pub fn spectra(&self) -> &[SpectralImage] {
        &self.spectra
    }

    pub fn spectrum(&self, i: usize) -> &SpectralImage {
        &self.spectra[i]
    }

    pub fn position(&self, index: FilterIndex) -> Option<usize> {
        self.indices.iter().position(|&i| i == index)
    }

    pub fn directional_count(&self) -> usize {
        self.indices.iter().filter(|i| !i.is_lowpass()).count()
    }

    /// Spatial filter `i`, origin at index (0, 0).
    pub fn filter(&self, i: usize) -> RasterImage {
        self.spectra[i].clone().inverse_transfer()
    }

    /// `Σ_b |ψ̂_b(ξ)|²` per frequency bin.
    pub fn frame_response(&self) -> RasterImage {
        let mut acc = alloc::vec![0.0; self.height * self.width];
        for s in &self.spectra {
            for (a, v) in acc.iter_mut().zip(s.data()) {
                *a += v.norm_sqr();
            }
        }
        RasterImage::new(self.height, self.width, acc).expect("bank dims")
    }

    /// `(min, max)` of the frame response.
    pub fn frame_bounds(&self) -> (f64, f64) {
        let r = self.frame_response();
        (r.min(), r.max())
    }
}

/// Per-axis tables of the generator factors for scale `j` on an axis pair:
/// `xi1` has `cols` bins, `xi2` has `rows` bins.
fn generator_spectrum(j: usize, spec: &ShearletSpec, rows: usize, cols: usize) -> Result<SpectralImage> {
    let big_j = spec.scales;
    if j >= big_j {
        return Err(invalid("j", alloc::format!("scale {j} out of range 0..{big_j}")));
    }
    let ell = (j / 2) as u32;
    let c = refinement(j) as usize;
    let dil = (1u64 << (ell + 1)) as f64;
    let filters = &spec.filters;
    let col_factor: Vec<(f64, Complex64)> = (0..cols)
        .map(|i| {
            let xi1 = bin_frequency(i, cols);
            (libm::cos(xi1), filters.wavelet_cascade(xi1, big_j - j))
        })
        .collect();
    let row_factor: Vec<(f64, Complex64)> = (0..rows)
        .map(|i| {
            let xi2 = bin_frequency(i, rows);
            (libm::cos(dil * xi2), filters.scaling_cascade(xi2, big_j - c))
        })
        .collect();
    let mut data = Vec::with_capacity(rows * cols);
    for &(cos2, h2) in &row_factor {
        for &(cos1, g1) in &col_factor {
            let fan = maxflat_halfband(spec.fan_order, 0.5 * (cos2 - cos1));
            data.push(g1 * h2 * fan);
        }
    }
    SpectralImage::new(rows, cols, data)
}

fn check_grid(height: usize, width: usize, spec: &ShearletSpec) -> Result<()> {
    let required = spec.min_side();
    if height < required || width < required {
        return Err(Error::TooSmall {
            height,
            width,
            levels: spec.scales,
            required,
        });
    }
    Ok(())
}

/// Spatial generator `w_j` on a `height x width` grid (origin at (0, 0)),
/// `Ŵ_j(ξ) = P_ℓ(ξ) Ĝ_{J-j}(ξ₁) Ĥ_{J-⌈j/2⌉}(ξ₂)` with `ℓ = ⌊j/2⌋`.
pub fn build_shearlet_generator(j: usize, spec: &ShearletSpec, height: usize, width: usize) -> Result<RasterImage> {
    check_grid(height, width, spec)?;
    Ok(generator_spectrum(j, spec, height, width)?.inverse_transfer())
}

/// `max |f̂|` over the grid.
fn peak_gain(f: &RasterImage) -> f64 {
    f.transfer().data().iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Horizontal-cone filters on a `rows x cols` grid, unit peak gain, in bank order.
fn horizontal_filters(spec: &ShearletSpec, rows: usize, cols: usize) -> Result<Vec<(usize, Shear, RasterImage)>> {
    let mut out = Vec::new();
    for j in 0..spec.scales {
        let generator = generator_spectrum(j, spec, rows, cols)?.inverse_transfer();
        for shear in spec.shears(j) {
            let f = digital_shear(&generator, shear, &spec.filters)?;
            let peak = peak_gain(&f);
            if !(peak > 0.0) || !peak.is_finite() {
                return Err(invalid("shearlet", alloc::format!("filter at scale {j} has peak gain {peak}")));
            }
            out.push((j, shear, f.scale(1.0 / peak)));
        }
    }
    Ok(out)
}

/// Builds the full bank on a `height x width` grid and checks admissibility:
/// the frame response must stay above `1e-6` of its maximum.
pub fn build_filter_bank(height: usize, width: usize, spec: &ShearletSpec) -> Result<ShearletFilterBank> {
    check_grid(height, width, spec)?;
    let big_j = spec.scales;
    let filters = &spec.filters;
    let col_h: Vec<Complex64> = (0..width).map(|i| filters.scaling_cascade(bin_frequency(i, width), big_j)).collect();
    let row_h: Vec<Complex64> = (0..height).map(|i| filters.scaling_cascade(bin_frequency(i, height), big_j)).collect();
    let mut low = Vec::with_capacity(height * width);
    for &a in &row_h {
        for &b in &col_h {
            low.push(a * b);
        }
    }
    let low = SpectralImage::new(height, width, low)?.inverse_transfer();
    let low = low.scale(1.0 / peak_gain(&low));

    let horizontal = horizontal_filters(spec, height, width)?;
    let vertical = if height == width {
        None
    } else {
        Some(horizontal_filters(spec, width, height)?)
    };

    let mut indices = alloc::vec![FilterIndex::Lowpass];
    let mut spectra = alloc::vec![low.transfer()];
    for j in 0..big_j {
        for (scale, shear, f) in horizontal.iter().filter(|e| e.0 == j) {
            indices.push(FilterIndex::Directional {
                scale: *scale,
                shear: *shear,
                cone: Cone::Horizontal,
            });
            spectra.push(f.transfer());
        }
        let source = vertical.as_ref().unwrap_or(&horizontal);
        for (scale, shear, f) in source.iter().filter(|e| e.0 == j) {
            indices.push(FilterIndex::Directional {
                scale: *scale,
                shear: *shear,
                cone: Cone::Vertical,
            });
            spectra.push(f.transpose().transfer());
        }
    }
    let bank = ShearletFilterBank {
        height,
        width,
        indices,
        spectra,
    };
    check_admissible(&bank.frame_response())?;
    Ok(bank)
}

fn check_admissible(frame: &RasterImage) -> Result<()> {
    let max = frame.max();
    let w = frame.width();
    let (pos, min) = frame
        .data()
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, v)| if v < bv { (i, v) } else { (bi, bv) });
    if !(min >= 1e-6 * max) || !max.is_finite() {
        return Err(Error::Admissibility {
            row: pos / w,
            col: pos % w,
            value: min,
        });
    }
    Ok(())
}

/// Deconvolution duals `ψ̃̂ = ψ̂ / Σ_b |ψ̂_b|²`.
pub fn compute_dual_bank(bank: &ShearletFilterBank) -> Result<ShearletFilterBank> {
    let frame = bank.frame_response();
    let w = bank.width;
    if let Some((i, &v)) = frame.data().iter().enumerate().find(|(_, &v)| !(v >= 1e-12)) {
        return Err(Error::Admissibility {
            row: i / w,
            col: i % w,
            value: v,
        });
    }
    let inv: Vec<f64> = frame.data().iter().map(|v| 1.0 / v).collect();
    let spectra = bank
        .spectra
        .iter()
        .map(|s| {
            let data = s.data().iter().zip(&inv).map(|(v, r)| v * r).collect();
            SpectralImage::new(bank.height, bank.width, data).expect("bank dims")
        })
        .collect();
    Ok(ShearletFilterBank {
        height: bank.height,
        width: bank.width,
        indices: bank.indices.clone(),
        spectra,
    })
}
