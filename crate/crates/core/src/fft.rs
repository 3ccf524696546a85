//! Complex FFT: iterative radix-2 for powers of two, Bluestein's chirp-z
//! reduction for every other length. Transforms are unnormalized.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub(crate) struct Fft {
    len: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Trivial,
    Radix2(Radix2),
    Bluestein(Bluestein),
}

#[derive(Debug, Clone)]
struct Radix2 {
    len: usize,
    /// e^{-2πik/len} for k < len/2
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Bluestein {
    inner: Radix2,
    /// e^{-iπk²/n}
    chirp: Vec<Complex64>,
    /// forward transform of the conjugate chirp, zero padded and wrapped
    kernel: Vec<Complex64>,
}

fn expi(theta: f64) -> Complex64 {
    Complex64::new(libm::cos(theta), libm::sin(theta))
}

impl Radix2 {
    fn new(len: usize) -> Self {
        debug_assert!(len.is_power_of_two());
        let bits = len.trailing_zeros();
        let twiddles = (0..len / 2)
            .map(|k| expi(-2.0 * PI * k as f64 / len as f64))
            .collect();
        let bitrev = (0..len)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Self {
            len,
            twiddles,
            bitrev,
        }
    }

    fn process(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.len;
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }
}

impl Bluestein {
    fn new(n: usize) -> Self {
        let m = (2 * n - 1).next_power_of_two();
        let inner = Radix2::new(m);
        // k² mod 2n keeps the chirp argument small
        let two_n = 2 * n as u128;
        let chirp: Vec<Complex64> = (0..n)
            .map(|k| {
                let k2 = ((k as u128 * k as u128) % two_n) as f64;
                expi(-PI * k2 / n as f64)
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        inner.process(&mut kernel, false);
        Self {
            inner,
            chirp,
            kernel,
        }
    }

    fn process(&self, buf: &mut [Complex64], inverse: bool) {
        let n = buf.len();
        let m = self.inner.len;
        let chirp = |k: usize| {
            if inverse {
                self.chirp[k].conj()
            } else {
                self.chirp[k]
            }
        };
        let mut work = vec![Complex64::new(0.0, 0.0); m];
        for k in 0..n {
            work[k] = buf[k] * chirp(k);
        }
        self.inner.process(&mut work, false);
        // The wrapped chirp is even in k, so the kernel for the conjugated
        // chirp is the bin-wise conjugate of the forward kernel.
        for (w, kern) in work.iter_mut().zip(&self.kernel) {
            *w *= if inverse { kern.conj() } else { *kern };
        }
        self.inner.process(&mut work, true);
        let scale = 1.0 / m as f64;
        for k in 0..n {
            buf[k] = work[k] * chirp(k) * scale;
        }
    }
}

impl Fft {
    pub(crate) fn new(len: usize) -> Self {
        let kind = if len <= 1 {
            Kind::Trivial
        } else if len.is_power_of_two() {
            Kind::Radix2(Radix2::new(len))
        } else {
            Kind::Bluestein(Bluestein::new(len))
        };
        Self { len, kind }
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    /// In-place transform. `inverse` flips the exponent sign; no scaling.
    pub(crate) fn process(&self, buf: &mut [Complex64], inverse: bool) {
        debug_assert_eq!(buf.len(), self.len);
        match &self.kind {
            Kind::Trivial => {}
            Kind::Radix2(r) => r.process(buf, inverse),
            Kind::Bluestein(b) => b.process(buf, inverse),
        }
    }
}

/// Row/column transform pair for a fixed 2D grid.
#[derive(Debug, Clone)]
pub(crate) struct Fft2 {
    rows: Fft,
    cols: Fft,
}

impl Fft2 {
    pub(crate) fn new(height: usize, width: usize) -> Self {
        Self {
            rows: Fft::new(width),
            cols: Fft::new(height),
        }
    }

    /// Unnormalized 2D transform of a row-major buffer. The inverse is
    /// scaled by 1/(height·width) so that `inverse(forward(x)) == x`.
    pub(crate) fn process(&self, buf: &mut [Complex64], inverse: bool) {
        let width = self.rows.len();
        let height = self.cols.len();
        debug_assert_eq!(buf.len(), width * height);
        for row in buf.chunks_exact_mut(width) {
            self.rows.process(row, inverse);
        }
        let mut column = vec![Complex64::new(0.0, 0.0); height];
        for c in 0..width {
            for r in 0..height {
                column[r] = buf[r * width + c];
            }
            self.cols.process(&mut column, inverse);
            for r in 0..height {
                buf[r * width + c] = column[r];
            }
        }
        if inverse {
            let scale = 1.0 / (width * height) as f64;
            for v in buf.iter_mut() {
                *v *= scale;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[Complex64], inverse: bool) -> Vec<Complex64> {
        let n = x.len();
        let sign = if inverse { 1.0 } else { -1.0 };
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| v * expi(sign * 2.0 * PI * ((j * k) % n) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    fn signal(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|i| Complex64::new(libm::sin(i as f64 * 0.37) + 0.1 * i as f64, libm::cos(i as f64 * 1.3)))
            .collect()
    }

    #[test]
    fn matches_naive_dft_for_all_small_lengths() {
        for n in 1..=40 {
            let x = signal(n);
            for inverse in [false, true] {
                let mut y = x.clone();
                Fft::new(n).process(&mut y, inverse);
                let want = naive(&x, inverse);
                for (a, b) in y.iter().zip(&want) {
                    assert!((a - b).norm() < 1e-10 * (n as f64), "n={n} inverse={inverse}");
                }
            }
        }
    }

    #[test]
    fn roundtrip_2d_non_power_of_two() {
        let (h, w) = (6, 10);
        let x = signal(h * w);
        let mut y = x.clone();
        let plan = Fft2::new(h, w);
        plan.process(&mut y, false);
        plan.process(&mut y, true);
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
