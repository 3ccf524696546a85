//! Undecimated (à trous) separable 2D wavelet transform with periodic
//! boundaries.
//!
//! At level `j` the 1D analysis filters are dilated by `2^(j-1)` (zeros
//! inserted), applied along columns and rows, and the lowpass-lowpass plane
//! feeds the next level. No plane is subsampled, so the transform is shift
//! invariant with `3J + 1` planes of full size.
//!
//! Synthesis filters are derived from the analysis pair by modulation,
//! `h̃(n) = (-1)^n g(n)` and `g̃(n) = (-1)^n h(n)`, and halved per dimension so
//! each level reconstructs with unit gain.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::image::RasterImage;

/// A 1D FIR filter with an explicit origin tap.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Taps {
    pub coeffs: Vec<f64>,
    /// index of the tap sitting at n = 0
    pub center: usize,
}

impl Taps {
    pub fn new(coeffs: Vec<f64>, center: usize) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(invalid("taps", "filter must have at least one tap"));
        }
        if center >= coeffs.len() {
            return Err(invalid("taps", "center index out of range"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("taps", "coefficients must be finite"));
        }
        Ok(Self { coeffs, center })
    }

    /// Odd-length filter centered on its middle tap.
    pub fn centered(coeffs: Vec<f64>) -> Result<Self> {
        let center = coeffs.len() / 2;
        Self::new(coeffs, center)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    /// Offsets `n` paired with their coefficient.
    pub fn iter(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        let c = self.center as isize;
        self.coeffs.iter().enumerate().map(move |(i, &v)| (i as isize - c, v))
    }

    /// DTFT `Σ t(n) e^{-iωn}`.
    pub fn response(&self, omega: f64) -> Complex64 {
        self.iter()
            .map(|(n, v)| {
                let a = -omega * n as f64;
                Complex64::new(v * libm::cos(a), v * libm::sin(a))
            })
            .sum()
    }

    /// `(-1)^n t(n)`
    pub fn modulated(&self) -> Taps {
        Taps {
            coeffs: self
                .iter()
                .map(|(n, v)| if n.rem_euclid(2) == 0 { v } else { -v })
                .collect(),
            center: self.center,
        }
    }

    /// Time reversal `t(-n)`.
    pub fn reversed(&self) -> Taps {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Taps {
            coeffs,
            center: self.len() - 1 - self.center,
        }
    }

    pub fn scaled(&self, factor: f64) -> Taps {
        Taps {
            coeffs: self.coeffs.iter().map(|v| v * factor).collect(),
            center: self.center,
        }
    }
}

/// Analysis filter pair plus decomposition depth.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletSpec {
    levels: usize,
    scaling: Taps,
    wavelet: Taps,
    /// halved synthesis lowpass / highpass
    synthesis: (Taps, Taps),
}

/// Grid size used to certify perfect reconstruction of a filter pair.
const PR_CHECK_BINS: usize = 1024;
const PR_TOLERANCE: f64 = 1e-10;

impl WaveletSpec {
    /// Validates the pair: `Σ h = √2` and the undecimated reconstruction
    /// identity `½(H H̃ + G G̃) ≡ 1`, both within 1e-10.
    pub fn new(levels: usize, scaling: Taps, wavelet: Taps) -> Result<Self> {
        if levels == 0 {
            return Err(invalid("levels", "at least one level is required"));
        }
        let dc = scaling.sum();
        if libm::fabs(dc - SQRT_2) > PR_TOLERANCE {
            return Err(invalid("scaling", alloc::format!("lowpass sums to {dc}, expected √2")));
        }
        let synth_lo = wavelet.modulated().scaled(0.5);
        let synth_hi = scaling.modulated().scaled(0.5);
        let mut deviation: f64 = 0.0;
        for k in 0..PR_CHECK_BINS {
            let w = 2.0 * PI * k as f64 / PR_CHECK_BINS as f64;
            let gain = scaling.response(w) * synth_lo.response(w) + wavelet.response(w) * synth_hi.response(w);
            deviation = deviation.max((gain - Complex64::new(1.0, 0.0)).norm());
        }
        if deviation > PR_TOLERANCE {
            return Err(Error::NotPerfectReconstruction { deviation });
        }
        Ok(Self {
            levels,
            scaling,
            wavelet,
            synthesis: (synth_lo, synth_hi),
        })
    }

    /// Cohen–Daubechies–Feauveau 9/7 pair (9-tap lowpass, 7-tap highpass).
    pub fn cdf97(levels: usize) -> Result<Self> {
        let (h, h_dual) = cdf97_lowpass();
        Self::new(levels, h, h_dual.modulated())
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn with_levels(&self, levels: usize) -> Result<Self> {
        Self::new(levels, self.scaling.clone(), self.wavelet.clone())
    }

    /// Analysis lowpass `h`.
    pub fn scaling(&self) -> &Taps {
        &self.scaling
    }

    /// Analysis highpass `g`.
    pub fn wavelet(&self) -> &Taps {
        &self.wavelet
    }

    fn synthesis(&self) -> (&Taps, &Taps) {
        (&self.synthesis.0, &self.synthesis.1)
    }

    /// Synthesis lowpass `h̃ = (-1)^n g(n)`, without the ½ gain factor.
    pub fn dual_scaling(&self) -> Taps {
        self.wavelet.modulated()
    }

    /// Smallest admissible side length: `2^J · max(len h, len g)`.
    pub fn min_side(&self) -> usize {
        (1usize << self.levels) * self.scaling.len().max(self.wavelet.len())
    }

    /// Product filter `H(ω) H̃(ω)`: a half-band, interpolating lowpass with
    /// DC gain 2.
    pub fn halfband_response(&self, omega: f64) -> Complex64 {
        self.scaling.response(omega) * self.dual_scaling().response(omega)
    }

    /// Level-`L` scaling cascade `Π_{i<L} H(2^i ω)/√2` (unit DC gain).
    pub fn scaling_cascade(&self, omega: f64, level: usize) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        let mut w = omega;
        for _ in 0..level {
            acc *= self.scaling.response(w) / SQRT_2;
            w *= 2.0;
        }
        acc
    }

    /// Level-`L` wavelet cascade `G(2^{L-1} ω)/√2 · Π_{i<L-1} H(2^i ω)/√2`.
    pub fn wavelet_cascade(&self, omega: f64, level: usize) -> Complex64 {
        if level == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let dil = (1u64 << (level - 1)) as f64;
        self.wavelet.response(omega * dil) / SQRT_2 * self.scaling_cascade(omega, level - 1)
    }
}

/// Builds the CDF 9/7 lowpass pair from the degree-4 maxflat half-band
/// `P = 2 cos^8(ω/2) Q(sin^2(ω/2))`, `Q(y) = 1 + 4y + 10y² + 20y³`: the real
/// root of `Q` goes to the 7-tap filter, the complex pair to the 9-tap one.
fn cdf97_lowpass() -> (Taps, Taps) {
    // real root of 20y³ + 10y² + 4y + 1 by Newton from a bracketing start
    let q = |y: f64| ((20.0 * y + 10.0) * y + 4.0) * y + 1.0;
    let dq = |y: f64| (60.0 * y + 20.0) * y + 4.0;
    let mut root = -0.35;
    for _ in 0..100 {
        let step = q(root) / dq(root);
        root -= step;
        if libm::fabs(step) < 1e-17 {
            break;
        }
    }
    // Q(y) = (1 - y/root)(1 + a y + b y²)
    let b = -20.0 * root;
    let a = 4.0 + 1.0 / root;

    // Laurent polynomials in z as symmetric coefficient vectors
    let cos2 = [0.25, 0.5, 0.25]; // cos²(ω/2)
    let sin2 = [-0.25, 0.5, -0.25]; // sin²(ω/2)
    let cos4 = poly_mul(&cos2, &cos2);
    let sin4 = poly_mul(&sin2, &sin2);

    // 1 + a y + b y²
    let mut quad = vec![0.0; 5];
    quad[2] += 1.0;
    for (i, v) in sin2.iter().enumerate() {
        quad[i + 1] += a * v;
    }
    for (i, v) in sin4.iter().enumerate() {
        quad[i] += b * v;
    }
    // 1 - y/root
    let mut lin = vec![0.0; 3];
    lin[1] += 1.0;
    for (i, v) in sin2.iter().enumerate() {
        lin[i] -= v / root;
    }

    let h: Vec<f64> = poly_mul(&cos4, &quad).into_iter().map(|v| v * SQRT_2).collect();
    let h_dual: Vec<f64> = poly_mul(&cos4, &lin).into_iter().map(|v| v * SQRT_2).collect();
    (
        Taps::centered(h).expect("9 finite taps"),
        Taps::centered(h_dual).expect("7 finite taps"),
    )
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Orientation of a detail plane, named after the edges it responds to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Orientation {
    /// lowpass along rows, highpass along columns
    Horizontal,
    /// highpass along rows, lowpass along columns
    Vertical,
    Diagonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetailPlane {
    /// 1 = finest
    pub level: usize,
    pub orientation: Orientation,
    pub plane: RasterImage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoefficients {
    pub approximation: RasterImage,
    /// level-major, each level ordered horizontal, vertical, diagonal
    pub details: Vec<DetailPlane>,
}

impl WaveletCoefficients {
    pub fn plane_count(&self) -> usize {
        self.details.len() + 1
    }

    pub fn levels(&self) -> usize {
        self.details.len() / 3
    }

    pub fn detail(&self, level: usize, orientation: Orientation) -> Option<&RasterImage> {
        self.details
            .iter()
            .find(|d| d.level == level && d.orientation == orientation)
            .map(|d| &d.plane)
    }

    pub fn details_mut(&mut self) -> impl Iterator<Item = &mut RasterImage> {
        self.details.iter_mut().map(|d| &mut d.plane)
    }

    /// ℓ1 norm over detail planes; the approximation is not penalized.
    pub fn detail_l1(&self) -> f64 {
        self.details.iter().map(|d| d.plane.norm_l1()).sum()
    }

    /// Frame inner product over all planes.
    pub fn dot(&self, other: &WaveletCoefficients) -> Result<f64> {
        if self.plane_count() != other.plane_count() {
            return Err(Error::PlaneCount {
                expected: self.plane_count(),
                actual: other.plane_count(),
            });
        }
        let mut acc = self.approximation.dot(&other.approximation)?;
        for (a, b) in self.details.iter().zip(&other.details) {
            acc += a.plane.dot(&b.plane)?;
        }
        Ok(acc)
    }
}

#[derive(Clone, Copy)]
enum Axis {
    /// filter along each row (x direction)
    Rows,
    /// filter along each column (y direction)
    Cols,
}

/// Periodic convolution along one axis with the filter dilated by `dilation`:
/// `y[n] = Σ_k t(k) x[n - dilation·k]`.
fn conv_axis(img: &RasterImage, taps: &Taps, dilation: usize, axis: Axis) -> RasterImage {
    let (h, w) = img.dims();
    let src = img.data();
    let mut out = vec![0.0; src.len()];
    match axis {
        Axis::Rows => {
            let n = w as isize;
            for (k, t) in taps.iter() {
                let shift = (k * dilation as isize).rem_euclid(n) as usize;
                for r in 0..h {
                    let row = &src[r * w..(r + 1) * w];
                    let dst = &mut out[r * w..(r + 1) * w];
                    // dst[c] += t * row[c - shift]
                    let split = shift.min(w);
                    for (d, s) in dst[split..].iter_mut().zip(&row[..w - split]) {
                        *d += t * s;
                    }
                    for (d, s) in dst[..split].iter_mut().zip(&row[w - split..]) {
                        *d += t * s;
                    }
                }
            }
        }
        Axis::Cols => {
            let n = h as isize;
            for (k, t) in taps.iter() {
                let shift = (k * dilation as isize).rem_euclid(n) as usize;
                for r in 0..h {
                    let sr = (r + h - shift) % h;
                    let row = &src[sr * w..(sr + 1) * w];
                    let dst = &mut out[r * w..(r + 1) * w];
                    for (d, s) in dst.iter_mut().zip(row) {
                        *d += t * s;
                    }
                }
            }
        }
    }
    RasterImage::new(h, w, out).expect("same dims")
}

fn check_size(img: &RasterImage, spec: &WaveletSpec) -> Result<()> {
    let required = spec.min_side();
    if img.height() < required || img.width() < required {
        return Err(Error::TooSmall {
            height: img.height(),
            width: img.width(),
            levels: spec.levels,
            required,
        });
    }
    Ok(())
}

fn analysis_level(
    approx: &RasterImage,
    h: &Taps,
    g: &Taps,
    dilation: usize,
) -> (RasterImage, [RasterImage; 3]) {
    let lo_x = conv_axis(approx, h, dilation, Axis::Rows);
    let hi_x = conv_axis(approx, g, dilation, Axis::Rows);
    let ll = conv_axis(&lo_x, h, dilation, Axis::Cols);
    let horizontal = conv_axis(&lo_x, g, dilation, Axis::Cols);
    let vertical = conv_axis(&hi_x, h, dilation, Axis::Cols);
    let diagonal = conv_axis(&hi_x, g, dilation, Axis::Cols);
    (ll, [horizontal, vertical, diagonal])
}

fn synthesis_level(
    approx: &RasterImage,
    details: [&RasterImage; 3],
    lo: &Taps,
    hi: &Taps,
    dilation: usize,
) -> RasterImage {
    let [horizontal, vertical, diagonal] = details;
    let mut lo_x = conv_axis(approx, lo, dilation, Axis::Cols);
    lo_x.add_scaled(&conv_axis(horizontal, hi, dilation, Axis::Cols), 1.0)
        .expect("same dims");
    let mut hi_x = conv_axis(vertical, lo, dilation, Axis::Cols);
    hi_x.add_scaled(&conv_axis(diagonal, hi, dilation, Axis::Cols), 1.0)
        .expect("same dims");
    let mut out = conv_axis(&lo_x, lo, dilation, Axis::Rows);
    out.add_scaled(&conv_axis(&hi_x, hi, dilation, Axis::Rows), 1.0)
        .expect("same dims");
    out
}

const ORIENTATIONS: [Orientation; 3] = [Orientation::Horizontal, Orientation::Vertical, Orientation::Diagonal];

/// Forward undecimated transform: `3J` detail planes plus the level-`J`
/// approximation.
pub fn uwt_forward(img: &RasterImage, spec: &WaveletSpec) -> Result<WaveletCoefficients> {
    check_size(img, spec)?;
    analyze(img, &spec.scaling, &spec.wavelet, spec.levels)
}

fn analyze(img: &RasterImage, h: &Taps, g: &Taps, levels: usize) -> Result<WaveletCoefficients> {
    let mut approx = img.clone();
    let mut details = Vec::with_capacity(3 * levels);
    for level in 1..=levels {
        let (ll, planes) = analysis_level(&approx, h, g, 1 << (level - 1));
        for (orientation, plane) in ORIENTATIONS.into_iter().zip(planes) {
            details.push(DetailPlane {
                level,
                orientation,
                plane,
            });
        }
        approx = ll;
    }
    Ok(WaveletCoefficients {
        approximation: approx,
        details,
    })
}

fn synthesize(coeffs: &WaveletCoefficients, lo: &Taps, hi: &Taps, levels: usize) -> Result<RasterImage> {
    if coeffs.details.len() != 3 * levels {
        return Err(Error::PlaneCount {
            expected: 3 * levels + 1,
            actual: coeffs.plane_count(),
        });
    }
    for (i, d) in coeffs.details.iter().enumerate() {
        coeffs.approximation.ensure_same_dims(&d.plane)?;
        if d.level != i / 3 + 1 || d.orientation != ORIENTATIONS[i % 3] {
            return Err(invalid("coefficients", "detail planes out of order"));
        }
    }
    let mut approx = coeffs.approximation.clone();
    for level in (1..=levels).rev() {
        let base = 3 * (level - 1);
        let planes = [
            &coeffs.details[base].plane,
            &coeffs.details[base + 1].plane,
            &coeffs.details[base + 2].plane,
        ];
        approx = synthesis_level(&approx, planes, lo, hi, 1 << (level - 1));
    }
    Ok(approx)
}

/// Inverse of [`uwt_forward`] with the derived synthesis filters.
pub fn uwt_inverse(coeffs: &WaveletCoefficients, spec: &WaveletSpec) -> Result<RasterImage> {
    let (lo, hi) = spec.synthesis();
    synthesize(coeffs, lo, hi, spec.levels)
}

/// Adjoint of [`uwt_forward`]: synthesis with time-reversed analysis filters.
pub fn uwt_adjoint(coeffs: &WaveletCoefficients, spec: &WaveletSpec) -> Result<RasterImage> {
    synthesize(coeffs, &spec.scaling.reversed(), &spec.wavelet.reversed(), spec.levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_image(h: usize, w: usize, seed: u64) -> RasterImage {
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        RasterImage::from_fn(h, w, |_, _| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .unwrap()
    }

    #[test]
    fn cdf97_matches_published_taps() {
        let spec = WaveletSpec::cdf97(1).unwrap();
        let h = &spec.scaling().coeffs;
        let published = [0.852698679009403, 0.377402855612654, -0.110624404418423, -0.023849465019380, 0.037828455506995];
        for (k, want) in published.iter().enumerate() {
            assert!((h[4 + k] - want).abs() < 1e-12, "h[{k}]");
            assert!((h[4 - k] - want).abs() < 1e-12);
        }
        let hd = &spec.dual_scaling().coeffs;
        let published_dual = [0.788485616405665, 0.418092273222212, -0.040689417609559, -0.064538882628938];
        for (k, want) in published_dual.iter().enumerate() {
            assert!((hd[3 + k] - want).abs() < 1e-12, "h~[{k}]");
        }
    }

    #[test]
    fn lowpass_normalization() {
        let spec = WaveletSpec::cdf97(3).unwrap();
        assert!((spec.scaling().sum() - SQRT_2).abs() < 1e-12);
        assert!(spec.wavelet().sum().abs() < 1e-12);
    }

    #[test]
    fn rejects_non_reconstructing_pair() {
        let h = Taps::centered(vec![SQRT_2 / 4.0, SQRT_2 / 2.0, SQRT_2 / 4.0]).unwrap();
        let g = Taps::centered(vec![0.1, -0.2, 0.1]).unwrap();
        assert!(matches!(WaveletSpec::new(1, h, g), Err(Error::NotPerfectReconstruction { .. })));
    }

    #[test]
    fn haar_like_even_filters_reconstruct() {
        // h = [1, 1]/√2 at n = 0, 1 and g = [-1, 1]/√2 at n = -1, 0
        let s = 1.0 / SQRT_2;
        let h = Taps::new(vec![s, s], 0).unwrap();
        let g = Taps::new(vec![-s, s], 1).unwrap();
        let spec = WaveletSpec::new(2, h, g).unwrap();
        let x = random_image(16, 16, 3);
        let back = uwt_inverse(&uwt_forward(&x, &spec).unwrap(), &spec).unwrap();
        let err = back.sub(&x).unwrap().norm_l2() / x.norm_l2();
        assert!(err < 1e-12);
    }

    #[test]
    fn roundtrip_is_exact() {
        let spec = WaveletSpec::cdf97(3).unwrap();
        let x = random_image(80, 96, 7);
        let c = uwt_forward(&x, &spec).unwrap();
        assert_eq!(c.plane_count(), 10);
        let back = uwt_inverse(&c, &spec).unwrap();
        let err = back.sub(&x).unwrap().norm_l2() / x.norm_l2();
        assert!(err < 1e-12, "relative error {err}");
    }

    #[test]
    fn too_small_is_rejected() {
        let spec = WaveletSpec::cdf97(3).unwrap();
        let x = RasterImage::zeros(64, 64).unwrap();
        assert!(matches!(uwt_forward(&x, &spec), Err(Error::TooSmall { .. })));
    }

    #[test]
    fn inconsistent_plane_count_is_rejected() {
        let spec = WaveletSpec::cdf97(2).unwrap();
        let x = random_image(40, 40, 1);
        let mut c = uwt_forward(&x, &spec).unwrap();
        c.details.pop();
        assert!(matches!(uwt_inverse(&c, &spec), Err(Error::PlaneCount { .. })));
    }

    #[test]
    fn cascades_have_expected_dc_and_nyquist() {
        let spec = WaveletSpec::cdf97(4).unwrap();
        assert!((spec.scaling_cascade(0.0, 4).re - 1.0).abs() < 1e-12);
        assert!(spec.wavelet_cascade(0.0, 3).norm() < 1e-12);
        assert!((spec.wavelet_cascade(PI, 1).re - 1.0).abs() < 1e-12);
        assert!((spec.halfband_response(0.0).re - 2.0).abs() < 1e-12);
        assert!(spec.halfband_response(PI).norm() < 1e-12);
    }
}
