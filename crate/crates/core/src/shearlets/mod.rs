//! Shift-invariant digital shearlet transform.
//!
//! Each scale `j` owns a non-separable generator: a fan filter times the
//! anisotropic separable wavelet/scaling product. Shears `k` with
//! `|k| <= ⌈2^(j/2)⌉` are realized by the digital shear operator, the
//! vertical cone by transposition. Coefficients are full-size periodic
//! convolutions; the dual bank is obtained by deconvolution.

mod bank;
mod fan;
mod shear;
mod transform;

pub use bank::{
    build_filter_bank, build_shearlet_generator, compute_dual_bank, shear_count, Cone, FilterIndex,
    DEFAULT_FAN_ORDER,
    ShearletFilterBank, ShearletSpec,
};
pub use fan::{build_fan_filter, fan_response, maxflat_halfband};
pub use shear::{digital_shear, Shear};
pub use transform::{
    shearlet_adjoint, shearlet_directional_l1, shearlet_forward, shearlet_inverse, shearlet_map,
    ShearletCoefficients,
};
