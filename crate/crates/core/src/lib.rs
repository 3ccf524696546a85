//! Geometric separation of images into point-like and curve-like parts.
//!
//! The point part is sparsified by a shift-invariant (à trous) wavelet frame,
//! the curve part by a shift-invariant digital shearlet frame built from
//! non-separable, compactly supported generators. Separation alternates
//! analysis-side soft thresholding in both frames with a decreasing threshold.
//!
//! The crate is `no_std` (it needs `alloc`). Enable the `parallel` feature to
//! spread per-filter work of the shearlet transform over a rayon pool.
//!
//! Module map:
//!
//! * [`image`]: raster and spectral images, 2D DFT, periodic convolution.
//! * [`wavelets`]: undecimated separable wavelet transform.
//! * [`shearlets`]: fan filter, digital shear, filter bank, transforms, duals.
//! * [`subband`]: radial subband family and the reweighting preprocessor.
//! * [`separation`]: thresholding schedule and the block-relaxation solver.
//! * [`synth`]: point / curve phantoms and Gaussian noise.
//! * [`eval`]: separation-quality measures and PSNR.
#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

mod error;
mod fft;

pub mod eval;
pub mod image;
pub mod separation;
pub mod shearlets;
pub mod subband;
pub mod synth;
pub mod wavelets;

pub use error::{Error, Result};
pub use image::{RasterImage, SpectralImage};
