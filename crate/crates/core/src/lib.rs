//! Plane-wave measure arithmetic and spectral dynamics for the generalized
//! incompressible Navier–Stokes model of active turbulence.
//!
//! Velocity fields are finite sums of plane waves `u(x) = Σ c_j e^{iξ_j·x}`,
//! i.e. Fourier transforms of finite atomic Radon measures. Everything the
//! model needs (norms, products, Helmholtz projection, linear symbols,
//! exponential propagators, nonlinear evolution) is computed exactly on the
//! atom set, up to an explicit Galerkin truncation.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

#[cfg(test)]
extern crate std;

extern crate alloc;

pub mod dynamics;
mod error;
pub mod etd;
pub mod math;
pub mod measure;
pub mod quad;
pub mod symbols;

pub use error::{Error, Result};
pub use math::C64;
pub use measure::{Atom, Flags, ProductKind, SpectralMeasure};
pub use symbols::{ModelParams, StabilityClass, StabilityVerdict, SteadyState, SteadyStateKind};
