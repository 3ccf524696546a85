//! Digital shear operator.
//!
//! `S_s f(n₁, n₂) = f(n₁ - s·n₂, n₂)`: row `n₂` (signed, periodic) is moved
//! along the x axis by `s·n₂` pixels. For `s = k / 2^c` the row is upsampled
//! by `q = 2^c` (zero insertion), interpolated with the cascaded half-band
//! `L(ω) = Π_{i<c} P(2^i ω)`, `P = H H̃`, shifted by the integer `k·n₂` on the
//! refined grid and decimated back. `P` is interpolating, so the decimation
//! needs no extra lowpass and integer shears are exact circular shifts.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::image::{signed_index, RasterImage};
use crate::wavelets::WaveletSpec;

/// Rational shear `k / 2^refinement`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Shear {
    pub k: i64,
    pub refinement: u32,
}

impl Shear {
    pub fn new(k: i64, refinement: u32) -> Self {
        Self { k, refinement }
    }

    pub fn integer(k: i64) -> Self {
        Self { k, refinement: 0 }
    }

    pub fn value(&self) -> f64 {
        self.k as f64 / (1u64 << self.refinement) as f64
    }

    pub fn is_integer(&self) -> bool {
        self.k % (1i64 << self.refinement) == 0
    }

    /// Valid range is `|k| <= 2^c + 1`.
    fn validate(&self) -> Result<()> {
        if self.refinement > 16 || self.k.unsigned_abs() > (1u64 << self.refinement) + 1 {
            return Err(Error::Shear {
                k: self.k,
                refinement: self.refinement,
            });
        }
        Ok(())
    }
}

/// Applies the digital shear to a full-size periodic filter.
pub fn digital_shear(filt: &RasterImage, shear: Shear, spec: &WaveletSpec) -> Result<RasterImage> {
    shear.validate()?;
    if shear.k == 0 {
        return Ok(filt.clone());
    }
    if shear.is_integer() {
        return Ok(integer_shear(filt, shear.k >> shear.refinement));
    }
    Ok(fractional_shear(filt, shear, spec))
}

fn integer_shear(filt: &RasterImage, s: i64) -> RasterImage {
    let (h, w) = filt.dims();
    let mut out = vec![0.0; h * w];
    for r in 0..h {
        let shift = (s * signed_index(r, h) as i64).rem_euclid(w as i64) as usize;
        let src = filt.row(r);
        let dst = &mut out[r * w..(r + 1) * w];
        dst[shift..].copy_from_slice(&src[..w - shift]);
        dst[..shift].copy_from_slice(&src[w - shift..]);
    }
    RasterImage::new(h, w, out).expect("same dims")
}

fn fractional_shear(filt: &RasterImage, shear: Shear, spec: &WaveletSpec) -> RasterImage {
    let (h, w) = filt.dims();
    let q = 1usize << shear.refinement;
    let fine = w * q;
    // interpolator on the refined grid, bin u <-> ω = 2πu / (w q)
    let interp: Vec<Complex64> = (0..fine)
        .map(|u| {
            let omega = 2.0 * PI * u as f64 / fine as f64;
            let mut acc = Complex64::new(1.0, 0.0);
            let mut dil = 1.0;
            for _ in 0..shear.refinement {
                acc *= spec.halfband_response(dil * omega);
                dil *= 2.0;
            }
            acc
        })
        .collect();
    let roots: Vec<Complex64> = (0..fine)
        .map(|m| {
            let a = -2.0 * PI * m as f64 / fine as f64;
            Complex64::new(libm::cos(a), libm::sin(a))
        })
        .collect();
    let fft = Fft::new(w);
    let inv_q = 1.0 / q as f64;
    let inv_w = 1.0 / w as f64;
    let mut out = Vec::with_capacity(h * w);
    let mut row = vec![Complex64::new(0.0, 0.0); w];
    for r in 0..h {
        for (dst, &v) in row.iter_mut().zip(filt.row(r)) {
            *dst = Complex64::new(v, 0.0);
        }
        fft.process(&mut row, false);
        let d = (shear.k * signed_index(r, h) as i64).rem_euclid(fine as i64) as usize;
        for (v, x) in row.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..q {
                let u = v + t * w;
                acc += interp[u] * roots[(u * d) % fine];
            }
            *x *= acc * inv_q;
        }
        fft.process(&mut row, true);
        out.extend(row.iter().map(|v| v.re * inv_w));
    }
    RasterImage::new(h, w, out).expect("same dims")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> WaveletSpec {
        WaveletSpec::cdf97(2).unwrap()
    }

    fn bump(h: usize, w: usize) -> RasterImage {
        RasterImage::from_fn(h, w, |r, c| {
            let y = signed_index(r, h) as f64;
            let x = signed_index(c, w) as f64;
            libm::exp(-(x * x + 0.5 * y * y) / 6.0) + 0.01 * ((r * 7 + c * 3) % 5) as f64
        })
        .unwrap()
    }

    #[test]
    fn zero_shear_is_identity() {
        let f = bump(16, 20);
        assert_eq!(digital_shear(&f, Shear::new(0, 2), &spec()).unwrap(), f);
    }

    #[test]
    fn unit_shear_shifts_rows() {
        let f = bump(12, 16);
        let g = digital_shear(&f, Shear::integer(1), &spec()).unwrap();
        for r in 0..12 {
            let n2 = signed_index(r, 12);
            for c in 0..16 {
                let src = (c as isize - n2).rem_euclid(16) as usize;
                assert_eq!(g.get(r, c), f.get(r, src));
            }
        }
    }

    #[test]
    fn refined_integer_shear_takes_exact_path() {
        let f = bump(12, 16);
        let a = digital_shear(&f, Shear::new(4, 2), &spec()).unwrap();
        let b = digital_shear(&f, Shear::integer(1), &spec()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn half_shear_shifts_even_rows_exactly() {
        // rows with even n₂ move by an integer under s = 1/2 and the
        // interpolator passes the original samples through
        let f = bump(16, 16);
        let g = digital_shear(&f, Shear::new(1, 1), &spec()).unwrap();
        for r in 0..16 {
            let n2 = signed_index(r, 16);
            if n2 % 2 != 0 {
                continue;
            }
            for c in 0..16 {
                let src = (c as isize - n2 / 2).rem_euclid(16) as usize;
                assert!((g.get(r, c) - f.get(r, src)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn preserves_row_sums() {
        let f = bump(16, 24);
        let g = digital_shear(&f, Shear::new(3, 2), &spec()).unwrap();
        for r in 0..16 {
            let a: f64 = f.row(r).iter().sum();
            let b: f64 = g.row(r).iter().sum();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_rejected() {
        let f = bump(8, 8);
        assert!(digital_shear(&f, Shear::new(4, 1), &spec()).is_err());
        assert!(digital_shear(&f, Shear::new(3, 1), &spec()).is_ok());
    }
}
