//! Loop factorization, spin Toeplitz determinants and bundle diagnostics
//! on the disk and on the annulus double (a torus).

pub mod bundle;
pub mod error;
pub mod experiment;
pub mod fourier;
pub mod linalg;
pub mod loops;
pub mod special;
pub mod spin;
pub mod surface;
pub mod toeplitz;

pub use error::{Error, Result};
pub use fourier::{LaurentBoundaryFunction, C64};
pub use surface::{disk_model, elliptic_model, ModelDescriptor, SurfaceModel};
