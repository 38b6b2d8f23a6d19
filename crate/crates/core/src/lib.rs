//! Regularized D-bar reconstruction for 2-D electrical impedance tomography
//! on the unit disk.
//!
//! The pipeline runs in five stages, one module each:
//!
//! * [`phantom`]: random KIT4/ACT4-style conductivity phantoms, rasterization
//!   and the Schrödinger potential `q = Δ√σ / √σ`.
//! * [`forward`]: P1 finite elements on a graded disk mesh, the
//!   Neumann-to-Dirichlet matrix under trigonometric current patterns, the
//!   relative noise model and the Dirichlet-to-Neumann matrix.
//! * [`scattering`]: complex geometrical optics traces through the Faddeev
//!   boundary integral equation, the measured scattering transform `t^exp`,
//!   the Born-type transform `t̃` and truncated scattering fields on the
//!   D-bar k-grid.
//! * [`dbar`]: the FFT matrix-free D-bar operator, Richardson iteration and a
//!   dense real-linear oracle, and the pixelwise reconstruction
//!   `σ_R(z) = m_R(z, 0)²`.
//! * [`dataset`]: low-pass plus frequency-enhanced sample generation, the
//!   binary array format with manifest, pooling and image metrics.

pub mod dataset;
pub mod dbar;
pub mod error;
pub mod forward;
pub mod image;
pub mod phantom;
pub mod scattering;

pub use error::{Error, Result};
pub use num_complex::Complex64;
