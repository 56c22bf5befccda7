//! Forward and inverse tools for imaging networks of sound-hard cracks from
//! multi-static far-field data.
//!
//! The crate is split along the processing chain:
//!
//! * [`geometry`]: crack networks, direction grids, artificial disks, scenarios;
//! * [`forward`]: boundary-integral solver for sound-hard cracks, far-field
//!   matrices, noise and the on-disk far-field format;
//! * [`diskbg`]: closed-form quantities for a sound-soft disk background;
//! * [`glsm`]: the `F#` construction, penalization and the regularized
//!   sampling minimization;
//! * [`indicators`]: the multi-frequency eigenvalue indicator, the
//!   fixed-frequency differential indicators and the factorization map.
//!
//! Far-field conventions: a radiating field behaves like
//! `e^{i pi/4} / sqrt(8 pi k) * e^{ikr} / sqrt(r) * u_inf`, so the point source
//! `Phi_z` has far field `exp(-i k z . theta)`. A [`forward::FarFieldMatrix`]
//! stores raw kernel samples `u_inf(theta_q, theta_p)`; as an operator on
//! `L^2(S^1)` it acts through the weight `2 pi / N`, and every operator norm
//! or inner product in this crate includes that weight.

// Negated comparisons are used on purpose so that NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod diskbg;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod glsm;
pub mod indicators;
pub mod linalg;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
