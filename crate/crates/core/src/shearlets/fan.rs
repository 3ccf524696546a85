//! Fan filter from a maximally flat half-band prototype.
//!
//! The prototype is the zero-phase maxflat half-band written as a polynomial
//! in `t = cos ω`,
//! `B(t) = ((1+t)/2)^N Σ_{i<N} C(N-1+i, i) ((1-t)/2)^i`, so `B(1) = 1`,
//! `B(-1) = 0` and `B(t) + B(-t) = 1`. Substituting
//! `t = (cos ξ₂ - cos ξ₁)/2` maps the half-band onto a fan whose passband is
//! the horizontal cone `|ξ₂| < |ξ₁|` (frequency coordinates: `ξ₁` along
//! rows of pixels, i.e. the x axis, `ξ₂` along columns).
//!
//! `P_ℓ(ξ) = P(ξ₁, 2^{ℓ+1} ξ₂)` narrows the wedge to `|ξ₂| < |ξ₁| / 2^{ℓ+1}`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::image::{RasterImage, SpectralImage};

/// Maxflat half-band prototype `B_N(t)`, `t ∈ [-1, 1]`.
pub fn maxflat_halfband(order: usize, t: f64) -> f64 {
    let x = (1.0 - t) / 2.0;
    let mut sum = 0.0;
    let mut binom = 1.0;
    let mut xp = 1.0;
    for i in 0..order {
        if i > 0 {
            // C(N-1+i, i) from C(N-2+i, i-1)
            binom *= (order - 1 + i) as f64 / i as f64;
        }
        sum += binom * xp;
        xp *= x;
    }
    libm::pow((1.0 + t) / 2.0, order as f64) * sum
}

/// Frequency response of `P_ℓ` at `(ξ₁, ξ₂)`.
pub fn fan_response(order: usize, ell: u32, xi1: f64, xi2: f64) -> f64 {
    let dil = (1u64 << (ell + 1)) as f64;
    let t = 0.5 * (libm::cos(dil * xi2) - libm::cos(xi1));
    maxflat_halfband(order, t)
}

/// Spatial coefficients of `P_ℓ`.
///
/// The result has odd dimensions with the filter origin at the center
/// sample `(rows / 2, cols / 2)`. The filter is real and finitely supported:
/// `2(2N-1)·2^{ℓ+1} + 1` rows by `2(2N-1) + 1` columns.
pub fn build_fan_filter(order: usize, ell: u32) -> Result<RasterImage> {
    if order == 0 {
        return Err(invalid("fan_filter_order", "must be at least 1"));
    }
    if ell > 16 {
        return Err(invalid("ell", "dilation exponent too large"));
    }
    let degree = 2 * order - 1;
    let half_cols = degree;
    let half_rows = degree << (ell + 1);
    // sample the trigonometric polynomial on a grid larger than its support;
    // the inverse DFT then returns the exact coefficients
    let grid_rows = (2 * half_rows + 1).next_power_of_two();
    let grid_cols = (2 * half_cols + 1).next_power_of_two();
    let spec = SpectralImage::from_frequency_fn(grid_rows, grid_cols, |xi2, xi1| {
        Complex64::new(fan_response(order, ell, xi1, xi2), 0.0)
    })?;
    let periodic = spec.inverse_transfer();
    let rows = 2 * half_rows + 1;
    let cols = 2 * half_cols + 1;
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let gr = (r as isize - half_rows as isize).rem_euclid(grid_rows as isize) as usize;
        for c in 0..cols {
            let gc = (c as isize - half_cols as isize).rem_euclid(grid_cols as isize) as usize;
            data.push(periodic.get(gr, gc));
        }
    }
    RasterImage::new(rows, cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    /// DTFT of a centered spatial filter at (ξ₁, ξ₂).
    fn dtft(f: &RasterImage, xi1: f64, xi2: f64) -> Complex64 {
        let (cr, cc) = (f.height() as isize / 2, f.width() as isize / 2);
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..f.height() {
            for c in 0..f.width() {
                let (n2, n1) = (r as isize - cr, c as isize - cc);
                let a = -(xi1 * n1 as f64 + xi2 * n2 as f64);
                acc += f.get(r, c) * Complex64::new(libm::cos(a), libm::sin(a));
            }
        }
        acc
    }

    #[test]
    fn prototype_is_half_band() {
        for order in 1..12 {
            assert!((maxflat_halfband(order, 1.0) - 1.0).abs() < 1e-15);
            assert!(maxflat_halfband(order, -1.0).abs() < 1e-15);
            for t in [0.1, 0.37, 0.8] {
                let s = maxflat_halfband(order, t) + maxflat_halfband(order, -t);
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn passband_and_stopband_centers() {
        let f = build_fan_filter(10, 0).unwrap();
        assert!(dtft(&f, PI / 2.0, 0.0).norm() >= 0.99);
        assert!(dtft(&f, 0.0, PI / 2.0).norm() <= 0.01);
    }

    #[test]
    fn spatial_filter_reproduces_response() {
        let f = build_fan_filter(3, 1).unwrap();
        assert_eq!(f.dims(), (2 * 5 * 4 + 1, 11));
        for (x1, x2) in [(0.3, -1.2), (2.0, 0.4), (-0.7, 3.0)] {
            let got = dtft(&f, x1, x2);
            assert!((got.re - fan_response(3, 1, x1, x2)).abs() < 1e-12);
            assert!(got.im.abs() < 1e-12);
        }
    }

    #[test]
    fn real_and_conjugate_symmetric() {
        let f = build_fan_filter(4, 0).unwrap();
        assert!(f.is_finite());
        for (x1, x2) in [(0.5, 0.25), (1.5, -2.0)] {
            let a = dtft(&f, x1, x2);
            let b = dtft(&f, -x1, -x2);
            assert!((a - b.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_order_rejected() {
        assert!(build_fan_filter(0, 0).is_err());
    }
}
