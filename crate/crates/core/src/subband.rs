//! Radial subband family and the reweighting preprocessor.
//!
//! With `r = |ξ| / (π / 2^L)` and `s = log₂ r`, band `j` lives on
//! `s ∈ [j-1, j+1]`. Neighbouring bands blend over `s ∈ [j, j+1]` as
//! `cos(π/2 ν(s-j))` / `sin(π/2 ν(s-j))` with the polynomial ramp
//! `ν(x) = x⁴(35 - 84x + 70x² - 20x³)`, so `Σ_j F̂_j² = 1` at every bin.
//! `F̂_0 = 1` for `r <= 1` and `F̂_L = 1` for `r >= 2^L`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::image::{bin_frequency, RasterImage, SpectralImage};

fn ramp(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * x * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x * x * x)
    }
}

/// Response of band `j` of an `L`-band family at frequency `(ξ₁, ξ₂)`.
pub fn band_response(levels: usize, j: usize, xi1: f64, xi2: f64) -> f64 {
    let radius = libm::sqrt(xi1 * xi1 + xi2 * xi2);
    let unit = core::f64::consts::PI / (1u64 << levels) as f64;
    let r = radius / unit;
    if r <= 1.0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    let s = libm::log2(r);
    if s >= levels as f64 {
        return if j == levels { 1.0 } else { 0.0 };
    }
    // s in (0, L): blend between bands floor(s) and floor(s) + 1
    let lower = libm::floor(s) as usize;
    let angle = FRAC_PI_2 * ramp(s - lower as f64);
    if j == lower {
        libm::cos(angle)
    } else if j == lower + 1 {
        libm::sin(angle)
    } else {
        0.0
    }
}

/// `L + 1` real, even transfer functions on a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandFamily {
    height: usize,
    width: usize,
    levels: usize,
    responses: Vec<Vec<f64>>,
}

/// Builds `F_0 .. F_L` on a `height x width` grid.
pub fn build_subband_family(height: usize, width: usize, levels: usize) -> Result<SubbandFamily> {
    if levels == 0 {
        return Err(invalid("levels", "at least one bandpass level is required"));
    }
    if levels > 16 {
        return Err(invalid("levels", "at most 16 levels are supported"));
    }
    let required = 4usize << levels;
    if height < required || width < required {
        return Err(Error::TooSmall {
            height,
            width,
            levels,
            required,
        });
    }
    let mut responses = vec![Vec::with_capacity(height * width); levels + 1];
    for r in 0..height {
        let xi2 = bin_frequency(r, height);
        for c in 0..width {
            let xi1 = bin_frequency(c, width);
            for (j, resp) in responses.iter_mut().enumerate() {
                resp.push(band_response(levels, j, xi1, xi2));
            }
        }
    }
    Ok(SubbandFamily {
        height,
        width,
        levels,
        responses,
    })
}

impl SubbandFamily {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// Transfer function of band `j`, row-major.
    pub fn response(&self, j: usize) -> &[f64] {
        &self.responses[j]
    }

    pub fn spectrum(&self, j: usize) -> SpectralImage {
        let data = self.responses[j].iter().map(|&v| Complex64::new(v, 0.0)).collect();
        SpectralImage::new(self.height, self.width, data).expect("family dims")
    }

    fn check(&self, img: &RasterImage) -> Result<()> {
        if img.dims() != self.dims() {
            return Err(Error::SizeMismatch {
                expected: self.dims(),
                actual: img.dims(),
            });
        }
        Ok(())
    }

    /// Pointwise spectral gain `Σ_j g_j F̂_j(ξ)` applied to `img`.
    fn apply_gain(&self, img: &RasterImage, gain: impl Fn(usize) -> f64) -> RasterImage {
        let mut spec = img.transfer();
        for (i, v) in spec.data_mut().iter_mut().enumerate() {
            *v *= gain(i);
        }
        spec.inverse_transfer()
    }
}

/// Pieces `f_j = F_j ∗ f`.
pub fn decompose(img: &RasterImage, family: &SubbandFamily) -> Result<Vec<RasterImage>> {
    family.check(img)?;
    let spec = img.transfer();
    Ok((0..=family.levels)
        .map(|j| {
            let mut s = spec.clone();
            for (v, f) in s.data_mut().iter_mut().zip(family.response(j)) {
                *v *= f;
            }
            s.inverse_transfer()
        })
        .collect())
}

/// `Σ_j F_j ∗ f_j`; inverts [`decompose`].
pub fn recompose(pieces: &[RasterImage], family: &SubbandFamily) -> Result<RasterImage> {
    if pieces.len() != family.levels + 1 {
        return Err(Error::PlaneCount {
            expected: family.levels + 1,
            actual: pieces.len(),
        });
    }
    let mut acc = SpectralImage::zeros(family.height, family.width)?;
    for (j, p) in pieces.iter().enumerate() {
        family.check(p)?;
        let s = p.transfer();
        for ((a, v), f) in acc.data_mut().iter_mut().zip(s.data()).zip(family.response(j)) {
            *a += v * f;
        }
    }
    Ok(acc.inverse_transfer())
}

/// Nonnegative band weights `w_0 .. w_L`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Weights(Vec<f64>);

impl Weights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("weights", "at least one weight is required"));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(invalid("weights", alloc::format!("weight {v} is not a finite nonnegative number")));
        }
        Ok(Self(values))
    }

    /// Like [`Weights::new`] but also requires `w_j <= w_{j+1}`.
    pub fn monotone(values: Vec<f64>) -> Result<Self> {
        let w = Self::new(values)?;
        if w.0.windows(2).any(|p| p[0] > p[1]) {
            return Err(invalid("weights", "weights must be non-decreasing"));
        }
        Ok(w)
    }

    /// All ones: preprocessing becomes the identity.
    pub fn ones(levels: usize) -> Self {
        Self(vec![1.0; levels + 1])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn levels(&self) -> usize {
        self.0.len() - 1
    }
}

impl Default for Weights {
    /// `(0, 0.1, 0.7, 0.7)` for `L = 3`.
    fn default() -> Self {
        Self(vec![0.0, 0.1, 0.7, 0.7])
    }
}

/// `f̃ = Σ_j w_j F_j ∗ F_j ∗ f`.
pub fn preprocess(img: &RasterImage, family: &SubbandFamily, weights: &Weights) -> Result<RasterImage> {
    family.check(img)?;
    if weights.0.len() != family.levels + 1 {
        return Err(invalid(
            "weights",
            alloc::format!("expected {} weights, got {}", family.levels + 1, weights.0.len()),
        ));
    }
    Ok(family.apply_gain(img, |i| {
        weights
            .0
            .iter()
            .zip(&family.responses)
            .map(|(w, f)| w * f[i] * f[i])
            .sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_endpoints_and_symmetry() {
        assert_eq!(ramp(0.0), 0.0);
        assert_eq!(ramp(1.0), 1.0);
        for x in [0.1, 0.3, 0.45] {
            assert!((ramp(x) + ramp(1.0 - x) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn squares_sum_to_one() {
        let fam = build_subband_family(64, 48, 3).unwrap();
        for i in 0..64 * 48 {
            let s: f64 = (0..=3).map(|j| fam.response(j)[i].powi(2)).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert_eq!(fam.response(0)[0], 1.0);
        for j in 1..=3 {
            assert_eq!(fam.response(j)[0], 0.0);
        }
    }

    #[test]
    fn bands_are_annuli() {
        let unit = core::f64::consts::PI / 8.0;
        // band 2 of L = 3 lives on |ξ| in [2, 8]·unit
        assert_eq!(band_response(3, 2, 1.9 * unit, 0.0), 0.0);
        assert_eq!(band_response(3, 2, 4.0 * unit, 0.0), 1.0);
        assert_eq!(band_response(3, 2, 0.0, 8.1 * unit), 0.0);
    }

    #[test]
    fn weights_validation() {
        assert!(Weights::new(vec![0.0, -0.1]).is_err());
        assert!(Weights::new(vec![f64::NAN]).is_err());
        assert!(Weights::monotone(vec![0.0, 0.1, 0.7, 0.7]).is_ok());
        assert!(Weights::monotone(vec![0.0, 0.7, 0.1]).is_err());
        assert_eq!(Weights::default().levels(), 3);
    }

    #[test]
    fn preprocess_rejects_wrong_weight_count() {
        let fam = build_subband_family(32, 32, 2).unwrap();
        let img = RasterImage::zeros(32, 32).unwrap();
        assert!(preprocess(&img, &fam, &Weights::default()).is_err());
    }

    #[test]
    fn grid_too_small() {
        assert!(build_subband_family(16, 64, 3).is_err());
    }
}
