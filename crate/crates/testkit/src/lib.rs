//! Brute-force reference implementations and golden fixtures.
//!
//! The oracles are deliberately naive: direct sums and dense resampling,
//! no FFTs, nothing shared with the production code beyond the image
//! container. They are meant for grids up to about 32x32.

use std::f64::consts::PI;
use std::path::Path;

use geosep_core::{RasterImage, SpectralImage};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Direct circular convolution `out(n) = Σ_m k(m) img(n - m)`.
///
/// A kernel smaller than the image has its origin at `(kh / 2, kw / 2)`; a
/// kernel of the image's size has its origin at `(0, 0)`.
pub fn oracle_convolve(img: &RasterImage, kernel: &RasterImage) -> RasterImage {
    let (h, w) = img.dims();
    let (kh, kw) = kernel.dims();
    let (or, oc) = if (kh, kw) == (h, w) { (0, 0) } else { (kh / 2, kw / 2) };
    RasterImage::from_fn(h, w, |r, c| {
        let mut acc = 0.0;
        for i in 0..kh {
            for j in 0..kw {
                let dr = i as isize - or as isize;
                let dc = j as isize - oc as isize;
                let sr = (r as isize - dr).rem_euclid(h as isize) as usize;
                let sc = (c as isize - dc).rem_euclid(w as isize) as usize;
                acc += kernel.get(i, j) * img.get(sr, sc);
            }
        }
        acc
    })
    .expect("image dims")
}

/// Quadruple-loop unitary DFT.
pub fn oracle_dft(img: &RasterImage) -> SpectralImage {
    let (h, w) = img.dims();
    let scale = 1.0 / ((h * w) as f64).sqrt();
    let mut data = Vec::with_capacity(h * w);
    for u in 0..h {
        for v in 0..w {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..h {
                for c in 0..w {
                    let phase = -2.0 * PI * ((u * r) as f64 / h as f64 + (v * c) as f64 / w as f64);
                    acc += img.get(r, c) * Complex64::from_polar(1.0, phase);
                }
            }
            data.push(acc * scale);
        }
    }
    SpectralImage::new(h, w, data).expect("image dims")
}

fn linear_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn zero_insert(a: &[f64], factor: usize) -> Vec<f64> {
    let mut out = vec![0.0; (a.len() - 1) * factor + 1];
    for (i, v) in a.iter().enumerate() {
        out[i * factor] = *v;
    }
    out
}

/// Interpolation filter for upsampling by `2^stages`: the product
/// `h ∗ h̃` cascaded with its dilations. Both inputs are symmetric odd-length
/// tap lists, so the result is centered.
pub fn oracle_interpolator(lowpass: &[f64], dual_lowpass: &[f64], stages: u32) -> Vec<f64> {
    let p = linear_convolve(lowpass, dual_lowpass);
    let mut acc = vec![1.0];
    for i in 0..stages {
        acc = linear_convolve(&acc, &zero_insert(&p, 1 << i));
    }
    acc
}

/// Dense digital shear of a full-size periodic filter by `k / factor`:
/// every row is zero-inserted by `factor`, circularly convolved with
/// `interpolator` (centered, odd length), rolled by `k·n₂` and decimated.
pub fn oracle_shear(filt: &RasterImage, k: i64, factor: usize, interpolator: &[f64]) -> RasterImage {
    let (h, w) = filt.dims();
    let fine = w * factor;
    let center = interpolator.len() / 2;
    let mut out = RasterImage::zeros(h, w).expect("dims");
    for r in 0..h {
        let n2 = if r < h.div_ceil(2) { r as i64 } else { r as i64 - h as i64 };
        let mut up = vec![0.0; fine];
        for c in 0..w {
            up[c * factor] = filt.get(r, c);
        }
        let mut smooth = vec![0.0; fine];
        for (m, s) in smooth.iter_mut().enumerate() {
            for (t, tap) in interpolator.iter().enumerate() {
                let src = (m as i64 - (t as i64 - center as i64)).rem_euclid(fine as i64) as usize;
                *s += tap * up[src];
            }
        }
        let d = k * n2;
        for c in 0..w {
            let src = ((c * factor) as i64 - d).rem_euclid(fine as i64) as usize;
            out.set(r, c, smooth[src]);
        }
    }
    out
}

/// Hex SHA-256 of the little-endian bytes of an image's samples.
pub fn image_digest(img: &RasterImage) -> String {
    let mut hasher = Sha256::new();
    hasher.update((img.height() as u64).to_le_bytes());
    hasher.update((img.width() as u64).to_le_bytes());
    for v in img.data() {
        hasher.update(v.to_le_bytes());
    }
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedImage {
    pub name: String,
    pub height: usize,
    pub width: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedScalar {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

/// Named input spec plus expected outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenFixture {
    pub name: String,
    pub input: serde_json::Value,
    #[serde(default)]
    pub images: Vec<ExpectedImage>,
    #[serde(default)]
    pub scalars: Vec<ExpectedScalar>,
}

impl GoldenFixture {
    pub fn load(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(std::io::Error::other)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(path, text + "\n")
    }

    pub fn scalar(&self, name: &str) -> Option<&ExpectedScalar> {
        self.scalars.iter().find(|s| s.name == name)
    }

    /// Checks an image against its recorded digest; `Err` describes the mismatch.
    pub fn check_image(&self, name: &str, img: &RasterImage) -> Result<(), String> {
        let want = self
            .images
            .iter()
            .find(|i| i.name == name)
            .ok_or_else(|| format!("fixture {} has no image {name}", self.name))?;
        if (want.height, want.width) != img.dims() {
            return Err(format!("{name}: dims {:?}, expected {}x{}", img.dims(), want.height, want.width));
        }
        let got = image_digest(img);
        if got != want.sha256 {
            return Err(format!("{name}: digest {got}, expected {}", want.sha256));
        }
        Ok(())
    }

    pub fn check_scalar(&self, name: &str, value: f64) -> Result<(), String> {
        let want = self.scalar(name).ok_or_else(|| format!("fixture {} has no scalar {name}", self.name))?;
        if (value - want.value).abs() > want.tolerance {
            return Err(format!("{name}: {value}, expected {} ± {}", want.value, want.tolerance));
        }
        Ok(())
    }
}

/// Small deterministic generator for test images (xorshift64).
pub fn random_image(height: usize, width: usize, seed: u64) -> RasterImage {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    RasterImage::from_fn(height, width, |_, _| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    })
    .expect("positive dims")
}
