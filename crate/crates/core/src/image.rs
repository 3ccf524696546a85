//! Raster and spectral images, the 2D DFT and periodic convolution.
//!
//! Everything in this crate uses periodic boundaries: a `RasterImage` is one
//! period of a doubly periodic signal, which makes spectral filtering exact.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft2;

/// Real-valued 2D grid stored row-major.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RasterImage {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

/// Complex-valued 2D grid of frequency bins, row-major, bin (0, 0) is DC.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralImage {
    height: usize,
    width: usize,
    data: Vec<Complex64>,
}

fn check_dims(height: usize, width: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(Error::Dimension {
            height,
            width,
            reason: "both dimensions must be positive",
        });
    }
    Ok(())
}

fn check_len(height: usize, width: usize, len: usize) -> Result<()> {
    check_dims(height, width)?;
    if height.checked_mul(width) != Some(len) {
        return Err(Error::Dimension {
            height,
            width,
            reason: "data length does not match height x width",
        });
    }
    Ok(())
}

/// Signed coordinate of index `i` on a periodic axis of length `n`,
/// in `[-n/2, n/2)`.
#[inline]
pub fn signed_index(i: usize, n: usize) -> isize {
    if i < n.div_ceil(2) {
        i as isize
    } else {
        i as isize - n as isize
    }
}

/// Angular frequency of DFT bin `i` on an axis of length `n`, in `[-π, π)`.
#[inline]
pub fn bin_frequency(i: usize, n: usize) -> f64 {
    2.0 * core::f64::consts::PI * signed_index(i, n) as f64 / n as f64
}

impl RasterImage {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        check_len(height, width, data.len())?;
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::filled(height, width, 0.0)
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self> {
        check_dims(height, width)?;
        Ok(Self {
            height,
            width,
            data: vec![value; height * width],
        })
    }

    /// Builds an image from `f(row, col)`.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        check_dims(height, width)?;
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    /// Unit impulse at `(row, col)`.
    pub fn impulse(height: usize, width: usize, row: usize, col: usize) -> Result<Self> {
        let mut img = Self::zeros(height, width)?;
        if row >= height || col >= width {
            return Err(Error::Dimension {
                height,
                width,
                reason: "impulse position outside the image",
            });
        }
        img.set(row, col, 1.0);
        Ok(img)
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn ensure_same_dims(&self, other: &RasterImage) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::SizeMismatch {
                expected: self.dims(),
                actual: other.dims(),
            });
        }
        Ok(())
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> RasterImage {
        RasterImage {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pixel-wise combination of two equally sized images.
    pub fn zip_with(&self, other: &RasterImage, mut f: impl FnMut(f64, f64) -> f64) -> Result<RasterImage> {
        self.ensure_same_dims(other)?;
        Ok(RasterImage {
            height: self.height,
            width: self.width,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &RasterImage) -> Result<RasterImage> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &RasterImage) -> Result<RasterImage> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> RasterImage {
        self.map(|v| v * factor)
    }

    /// `self += factor * other`
    pub fn add_scaled(&mut self, other: &RasterImage, factor: f64) -> Result<()> {
        self.ensure_same_dims(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
        Ok(())
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| f64::max(m, libm::fabs(*v)))
    }

    pub fn norm_l2(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    pub fn norm_l1(&self) -> f64 {
        self.data.iter().map(|v| libm::fabs(*v)).sum()
    }

    pub fn dot(&self, other: &RasterImage) -> Result<f64> {
        self.ensure_same_dims(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn transpose(&self) -> RasterImage {
        let mut data = vec![0.0; self.data.len()];
        for r in 0..self.height {
            for c in 0..self.width {
                data[c * self.height + r] = self.data[r * self.width + c];
            }
        }
        RasterImage {
            height: self.width,
            width: self.height,
            data,
        }
    }

    /// Circular shift: output(r, c) = input(r - dr, c - dc).
    pub fn circshift(&self, dr: isize, dc: isize) -> RasterImage {
        let (h, w) = (self.height as isize, self.width as isize);
        let mut data = vec![0.0; self.data.len()];
        for r in 0..h {
            let tr = (r + dr).rem_euclid(h);
            for c in 0..w {
                let tc = (c + dc).rem_euclid(w);
                data[(tr * w + tc) as usize] = self.data[(r * w + c) as usize];
            }
        }
        RasterImage {
            height: self.height,
            width: self.width,
            data,
        }
    }

    /// Zero-embeds a small kernel into a `height x width` grid so that the
    /// kernel center lands on the spatial origin (index (0, 0)).
    ///
    /// A kernel of size `kh x kw` has its center at `(kh / 2, kw / 2)`. A
    /// kernel that already spans the full grid is taken as is, i.e. its
    /// index (0, 0) is the origin.
    pub fn embed_centered(&self, height: usize, width: usize) -> Result<RasterImage> {
        if self.height > height || self.width > width {
            return Err(Error::SizeMismatch {
                expected: (height, width),
                actual: self.dims(),
            });
        }
        if self.dims() == (height, width) {
            return Ok(self.clone());
        }
        let (cr, cc) = (self.height / 2, self.width / 2);
        let mut out = RasterImage::zeros(height, width)?;
        for r in 0..self.height {
            let tr = (r as isize - cr as isize).rem_euclid(height as isize) as usize;
            for c in 0..self.width {
                let tc = (c as isize - cc as isize).rem_euclid(width as isize) as usize;
                out.data[tr * width + tc] += self.get(r, c);
            }
        }
        Ok(out)
    }

    /// Transfer function of this image viewed as a periodic filter:
    /// `F(ξ) = Σ_n f(n) e^{-i⟨ξ, n⟩}` (unnormalized forward DFT).
    pub fn transfer(&self) -> SpectralImage {
        let mut buf: Vec<Complex64> = self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Fft2::new(self.height, self.width).process(&mut buf, false);
        SpectralImage {
            height: self.height,
            width: self.width,
            data: buf,
        }
    }

    /// Periodic convolution with a precomputed transfer function.
    pub fn filter_spectral(&self, transfer: &SpectralImage) -> Result<RasterImage> {
        if transfer.dims() != self.dims() {
            return Err(Error::SizeMismatch {
                expected: self.dims(),
                actual: transfer.dims(),
            });
        }
        let mut spec = self.transfer();
        for (s, t) in spec.data.iter_mut().zip(&transfer.data) {
            *s *= t;
        }
        Ok(spec.inverse_transfer())
    }
}

impl SpectralImage {
    pub fn new(height: usize, width: usize, data: Vec<Complex64>) -> Result<Self> {
        check_len(height, width, data.len())?;
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        check_dims(height, width)?;
        Ok(Self {
            height,
            width,
            data: vec![Complex64::new(0.0, 0.0); height * width],
        })
    }

    /// Builds a spectrum from `f(ξ_row, ξ_col)`, both angular frequencies in `[-π, π)`.
    pub fn from_frequency_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(f64, f64) -> Complex64,
    ) -> Result<Self> {
        check_dims(height, width)?;
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            let wr = bin_frequency(r, height);
            for c in 0..width {
                data.push(f(wr, bin_frequency(c, width)));
            }
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.width + col]
    }

    pub fn norm_l2(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v.norm_sqr()).sum())
    }

    /// Inverse of [`RasterImage::transfer`]; the imaginary part is dropped.
    pub fn inverse_transfer(mut self) -> RasterImage {
        Fft2::new(self.height, self.width).process(&mut self.data, true);
        RasterImage {
            height: self.height,
            width: self.width,
            data: self.data.into_iter().map(|v| v.re).collect(),
        }
    }

    /// Largest |imaginary| relative to the largest |value| after an inverse
    /// transform; diagnostic for conjugate symmetry.
    pub fn imaginary_residue(&self) -> f64 {
        let mut buf = self.data.clone();
        Fft2::new(self.height, self.width).process(&mut buf, true);
        let peak = buf.iter().fold(0.0, |m: f64, v| m.max(v.norm()));
        let imag = buf.iter().fold(0.0, |m: f64, v| m.max(libm::fabs(v.im)));
        if peak == 0.0 {
            0.0
        } else {
            imag / peak
        }
    }

    pub fn transpose(&self) -> SpectralImage {
        let mut data = vec![Complex64::new(0.0, 0.0); self.data.len()];
        for r in 0..self.height {
            for c in 0..self.width {
                data[c * self.height + r] = self.data[r * self.width + c];
            }
        }
        SpectralImage {
            height: self.width,
            width: self.height,
            data,
        }
    }
}

/// Unitary 2D DFT: `X(k) = (HW)^{-1/2} Σ_n x(n) e^{-2πi⟨k, n/N⟩}`.
pub fn dft2(img: &RasterImage) -> Result<SpectralImage> {
    check_dims(img.height, img.width)?;
    let mut spec = img.transfer();
    let scale = 1.0 / libm::sqrt((img.height * img.width) as f64);
    for v in spec.data.iter_mut() {
        *v *= scale;
    }
    Ok(spec)
}

/// Inverse of [`dft2`]; returns the real part.
pub fn idft2(spec: &SpectralImage) -> Result<RasterImage> {
    check_len(spec.height, spec.width, spec.data.len())?;
    let scale = libm::sqrt((spec.height * spec.width) as f64);
    let mut buf: Vec<Complex64> = spec.data.iter().map(|v| v * scale).collect();
    Fft2::new(spec.height, spec.width).process(&mut buf, true);
    Ok(RasterImage {
        height: spec.height,
        width: spec.width,
        data: buf.into_iter().map(|v| v.re).collect(),
    })
}

/// Circular convolution of `img` with `filt`, computed spectrally.
///
/// `filt` may be smaller than the image; it is zero-embedded with its center
/// `(kh / 2, kw / 2)` on the origin (see [`RasterImage::embed_centered`]).
pub fn convolve_periodic(img: &RasterImage, filt: &RasterImage) -> Result<RasterImage> {
    let kernel = filt.embed_centered(img.height, img.width)?;
    img.filter_spectral(&kernel.transfer())
}
