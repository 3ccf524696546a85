//! Shift-invariant analysis and synthesis.
//!
//! Analysis: `c_b = f ∗ ψ_b`. Synthesis with a bank `D`:
//! `Σ_b c_b ∗ d_b(-·)`, i.e. multiplication by `conj(D̂_b)`. With the dual
//! bank this inverts the analysis; with the analysis bank itself it is the
//! adjoint.
//!
//! Filter spectra are conjugate symmetric, so two real planes share one
//! complex FFT (one in the real part, one in the imaginary part).

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::bank::{FilterIndex, ShearletFilterBank};
use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::image::{RasterImage, SpectralImage};

/// One full-size plane per bank entry, indexed like the bank.
#[derive(Debug, Clone, PartialEq)]
pub struct ShearletCoefficients {
    indices: Vec<FilterIndex>,
    planes: Vec<RasterImage>,
}

impl ShearletCoefficients {
    pub fn new(indices: Vec<FilterIndex>, planes: Vec<RasterImage>) -> Result<Self> {
        if indices.len() != planes.len() {
            return Err(Error::PlaneCount {
                expected: indices.len(),
                actual: planes.len(),
            });
        }
        if let Some(first) = planes.first() {
            for p in &planes[1..] {
                first.ensure_same_dims(p)?;
            }
        }
        Ok(Self { indices, planes })
    }

    /// All-zero coefficients shaped like `bank`.
    pub fn zeros(bank: &ShearletFilterBank) -> Self {
        let (h, w) = bank.dims();
        Self {
            indices: bank.indices().to_vec(),
            planes: vec![RasterImage::zeros(h, w).expect("bank dims"); bank.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }

    pub fn indices(&self) -> &[FilterIndex] {
        &self.indices
    }

    pub fn planes(&self) -> &[RasterImage] {
        &self.planes
    }

    pub fn planes_mut(&mut self) -> &mut [RasterImage] {
        &mut self.planes
    }

    pub fn plane(&self, index: FilterIndex) -> Option<&RasterImage> {
        self.indices.iter().position(|&i| i == index).map(|p| &self.planes[p])
    }

    /// ℓ1 norm over the directional planes.
    pub fn directional_l1(&self) -> f64 {
        self.indices
            .iter()
            .zip(&self.planes)
            .filter(|(i, _)| !i.is_lowpass())
            .map(|(_, p)| p.norm_l1())
            .sum()
    }

    /// Sum of plane-wise inner products.
    pub fn dot(&self, other: &ShearletCoefficients) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::PlaneCount {
                expected: self.len(),
                actual: other.len(),
            });
        }
        let mut acc = 0.0;
        for (a, b) in self.planes.iter().zip(&other.planes) {
            acc += a.dot(b)?;
        }
        Ok(acc)
    }
}

fn check_image(img: &RasterImage, bank: &ShearletFilterBank) -> Result<()> {
    if img.dims() != bank.dims() {
        return Err(Error::SizeMismatch {
            expected: bank.dims(),
            actual: img.dims(),
        });
    }
    Ok(())
}

fn check_coeffs(coeffs: &ShearletCoefficients, bank: &ShearletFilterBank) -> Result<()> {
    if coeffs.indices() != bank.indices() {
        return Err(Error::PlaneCount {
            expected: bank.len(),
            actual: coeffs.len(),
        });
    }
    for p in &coeffs.planes {
        if p.dims() != bank.dims() {
            return Err(Error::SizeMismatch {
                expected: bank.dims(),
                actual: p.dims(),
            });
        }
    }
    Ok(())
}

/// Index of the bin holding frequency `-ξ` for every bin.
fn mirror_table(h: usize, w: usize) -> Vec<usize> {
    let mut t = Vec::with_capacity(h * w);
    for r in 0..h {
        let mr = (h - r) % h;
        for c in 0..w {
            t.push(mr * w + (w - c) % w);
        }
    }
    t
}

struct Plan {
    h: usize,
    w: usize,
    fft: Fft2,
    mirror: Vec<usize>,
}

impl Plan {
    fn new(h: usize, w: usize) -> Self {
        Self {
            h,
            w,
            fft: Fft2::new(h, w),
            mirror: mirror_table(h, w),
        }
    }

    fn forward_real(&self, img: &RasterImage) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = img.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.process(&mut buf, false);
        buf
    }

    /// `(ifft(X·A), ifft(X·B))` for conjugate-symmetric `A`, `B`.
    fn analyze_pair(&self, x: &[Complex64], a: &SpectralImage, b: Option<&SpectralImage>) -> (Vec<f64>, Option<Vec<f64>>) {
        let i = Complex64::new(0.0, 1.0);
        let mut buf: Vec<Complex64> = match b {
            Some(b) => x
                .iter()
                .zip(a.data())
                .zip(b.data())
                .map(|((x, a), b)| x * a + i * (x * b))
                .collect(),
            None => x.iter().zip(a.data()).map(|(x, a)| x * a).collect(),
        };
        self.fft.process(&mut buf, true);
        let pa = buf.iter().map(|v| v.re).collect();
        let pb = b.map(|_| buf.iter().map(|v| v.im).collect());
        (pa, pb)
    }

    /// `fft(p)·conj(D̂_a) + fft(q)·conj(D̂_b)` for real planes `p`, `q`.
    fn synthesize_pair(&self, p: &[f64], da: &SpectralImage, q: Option<(&[f64], &SpectralImage)>) -> Vec<Complex64> {
        match q {
            None => {
                let mut buf: Vec<Complex64> = p.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                self.fft.process(&mut buf, false);
                for (z, d) in buf.iter_mut().zip(da.data()) {
                    *z *= d.conj();
                }
                buf
            }
            Some((q, db)) => {
                let mut buf: Vec<Complex64> = p.iter().zip(q).map(|(&a, &b)| Complex64::new(a, b)).collect();
                self.fft.process(&mut buf, false);
                let mut out = vec![Complex64::new(0.0, 0.0); buf.len()];
                for (k, o) in out.iter_mut().enumerate() {
                    let z = buf[k];
                    let zm = buf[self.mirror[k]].conj();
                    let ca = (z + zm) * 0.5;
                    // (z - zm) / 2i
                    let cb = Complex64::new((z.im - zm.im) * 0.5, -(z.re - zm.re) * 0.5);
                    *o = ca * da.data()[k].conj() + cb * db.data()[k].conj();
                }
                out
            }
        }
    }

    fn finish(&self, mut acc: Vec<Complex64>) -> RasterImage {
        self.fft.process(&mut acc, true);
        RasterImage::new(self.h, self.w, acc.into_iter().map(|v| v.re).collect()).expect("plan dims")
    }
}

fn pairs(n: usize) -> Vec<(usize, Option<usize>)> {
    (0..n).step_by(2).map(|a| (a, (a + 1 < n).then_some(a + 1))).collect()
}

/// Runs `f` over the pairs and feeds the results to `sink` in pair order.
fn run_pairs<T: Send>(n: usize, f: impl Fn(usize, Option<usize>) -> T + Sync + Send, mut sink: impl FnMut(T)) {
    let list = pairs(n);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let chunk = 2 * rayon::current_num_threads().max(1);
        for group in list.chunks(chunk) {
            let results: Vec<T> = group.par_iter().map(|&(a, b)| f(a, b)).collect();
            for r in results {
                sink(r);
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    for (a, b) in list {
        sink(f(a, b));
    }
}

/// Analysis: one periodic convolution per bank entry.
pub fn shearlet_forward(img: &RasterImage, bank: &ShearletFilterBank) -> Result<ShearletCoefficients> {
    check_image(img, bank)?;
    let (h, w) = bank.dims();
    let plan = Plan::new(h, w);
    let x = plan.forward_real(img);
    let mut planes = Vec::with_capacity(bank.len());
    run_pairs(
        bank.len(),
        |a, b| plan.analyze_pair(&x, bank.spectrum(a), b.map(|b| bank.spectrum(b))),
        |(pa, pb)| {
            planes.push(RasterImage::new(h, w, pa).expect("plan dims"));
            if let Some(pb) = pb {
                planes.push(RasterImage::new(h, w, pb).expect("plan dims"));
            }
        },
    );
    ShearletCoefficients::new(bank.indices().to_vec(), planes)
}

fn synthesize(coeffs: &ShearletCoefficients, bank: &ShearletFilterBank) -> Result<RasterImage> {
    check_coeffs(coeffs, bank)?;
    let (h, w) = bank.dims();
    let plan = Plan::new(h, w);
    let mut acc = vec![Complex64::new(0.0, 0.0); h * w];
    run_pairs(
        bank.len(),
        |a, b| {
            plan.synthesize_pair(
                coeffs.planes[a].data(),
                bank.spectrum(a),
                b.map(|b| (coeffs.planes[b].data(), bank.spectrum(b))),
            )
        },
        |part| {
            for (s, v) in acc.iter_mut().zip(part) {
                *s += v;
            }
        },
    );
    Ok(plan.finish(acc))
}

/// Reconstruction `Σ_b c_b ∗ ψ̃_b(-·)` with the dual bank.
pub fn shearlet_inverse(coeffs: &ShearletCoefficients, dual: &ShearletFilterBank) -> Result<RasterImage> {
    synthesize(coeffs, dual)
}

/// Adjoint of [`shearlet_forward`]: `Σ_b c_b ∗ ψ_b(-·)`.
pub fn shearlet_adjoint(coeffs: &ShearletCoefficients, bank: &ShearletFilterBank) -> Result<RasterImage> {
    synthesize(coeffs, bank)
}

/// Fused analysis, plane-wise operator and synthesis:
/// `inverse(op(forward(img)), dual)` without holding all planes at once.
pub fn shearlet_map(
    img: &RasterImage,
    bank: &ShearletFilterBank,
    dual: &ShearletFilterBank,
    op: impl Fn(FilterIndex, &mut [f64]) + Sync + Send,
) -> Result<RasterImage> {
    check_image(img, bank)?;
    if bank.indices() != dual.indices() || bank.dims() != dual.dims() {
        return Err(Error::PlaneCount {
            expected: bank.len(),
            actual: dual.len(),
        });
    }
    let (h, w) = bank.dims();
    let plan = Plan::new(h, w);
    let x = plan.forward_real(img);
    let idx = bank.indices();
    let mut acc = vec![Complex64::new(0.0, 0.0); h * w];
    run_pairs(
        bank.len(),
        |a, b| {
            let (mut pa, pb) = plan.analyze_pair(&x, bank.spectrum(a), b.map(|b| bank.spectrum(b)));
            op(idx[a], &mut pa);
            match (b, pb) {
                (Some(b), Some(mut pb)) => {
                    op(idx[b], &mut pb);
                    plan.synthesize_pair(&pa, dual.spectrum(a), Some((&pb, dual.spectrum(b))))
                }
                _ => plan.synthesize_pair(&pa, dual.spectrum(a), None),
            }
        },
        |part| {
            for (s, v) in acc.iter_mut().zip(part) {
                *s += v;
            }
        },
    );
    Ok(plan.finish(acc))
}

/// `Σ_b |c_b|₁` over directional planes of the analysis of `img`, without
/// storing the planes.
pub fn shearlet_directional_l1(img: &RasterImage, bank: &ShearletFilterBank) -> Result<f64> {
    check_image(img, bank)?;
    let (h, w) = bank.dims();
    let plan = Plan::new(h, w);
    let x = plan.forward_real(img);
    let idx = bank.indices();
    let l1 = |i: usize, p: &[f64]| {
        if idx[i].is_lowpass() {
            0.0
        } else {
            p.iter().map(|v| libm::fabs(*v)).sum::<f64>()
        }
    };
    let mut total = 0.0;
    run_pairs(
        bank.len(),
        |a, b| {
            let (pa, pb) = plan.analyze_pair(&x, bank.spectrum(a), b.map(|b| bank.spectrum(b)));
            let mut s = l1(a, &pa);
            if let (Some(b), Some(pb)) = (b, pb) {
                s += l1(b, &pb);
            }
            s
        },
        |s| total += s,
    );
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::super::bank::{build_filter_bank, compute_dual_bank, ShearletSpec};
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

    fn rel(a: &RasterImage, b: &RasterImage) -> f64 {
        a.sub(b).unwrap().norm_l2() / b.norm_l2()
    }

    #[test]
    fn roundtrip_odd_count_and_non_square() {
        let spec = ShearletSpec::with_scales(2).unwrap();
        let bank = build_filter_bank(32, 48, &spec).unwrap();
        assert_eq!(bank.len() % 2, 1);
        let dual = compute_dual_bank(&bank).unwrap();
        let x = random_image(32, 48, 3);
        let c = shearlet_forward(&x, &bank).unwrap();
        assert_eq!(c.len(), bank.len());
        assert!(rel(&shearlet_inverse(&c, &dual).unwrap(), &x) < 1e-10);
        let fused = shearlet_map(&x, &bank, &dual, |_, _| {}).unwrap();
        assert!(rel(&fused, &x) < 1e-10);
    }

    #[test]
    fn packed_planes_match_single_filtering() {
        let spec = ShearletSpec::with_scales(2).unwrap();
        let bank = build_filter_bank(32, 32, &spec).unwrap();
        let x = random_image(32, 32, 5);
        let c = shearlet_forward(&x, &bank).unwrap();
        for (i, p) in c.planes().iter().enumerate() {
            let want = x.filter_spectral(bank.spectrum(i)).unwrap();
            assert!(rel(p, &want) < 1e-12 || want.norm_l2() < 1e-12);
        }
        let l1 = shearlet_directional_l1(&x, &bank).unwrap();
        assert!((l1 - c.directional_l1()).abs() < 1e-9 * l1);
    }

    #[test]
    fn adjoint_identity() {
        let spec = ShearletSpec::with_scales(2).unwrap();
        let bank = build_filter_bank(32, 32, &spec).unwrap();
        let x = random_image(32, 32, 7);
        let mut c = ShearletCoefficients::zeros(&bank);
        for (i, p) in c.planes_mut().iter_mut().enumerate() {
            *p = random_image(32, 32, 100 + i as u64);
        }
        let lhs = shearlet_forward(&x, &bank).unwrap().dot(&c).unwrap();
        let rhs = x.dot(&shearlet_adjoint(&c, &bank).unwrap()).unwrap();
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn size_mismatch_rejected() {
        let spec = ShearletSpec::with_scales(2).unwrap();
        let bank = build_filter_bank(32, 32, &spec).unwrap();
        let x = random_image(32, 40, 1);
        assert!(shearlet_forward(&x, &bank).is_err());
    }
}
