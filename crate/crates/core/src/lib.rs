//! Ground-state cooling of a mechanical mode in an optomechanical cavity with
//! a Kerr-magnon-induced two-photon process and an optional squeezed-vacuum
//! input.
//!
//! The crate is organized bottom-up:
//!
//! - [`model`]: parameter sets, validation, scheme taxonomy.
//! - [`steady`]: mean-field steady state of the full model and adiabatic
//!   elimination of the magnon.
//! - [`spectra`]: weak-coupling radiation-pressure spectra, rates, phonon
//!   limits.
//! - [`optimum`]: heating-null conditions and optimization over ξ.
//! - [`gaussian`]: drift/diffusion, Routh–Hurwitz stability, Lyapunov
//!   steady covariance.
//! - [`fock`]: truncated Fock-space master equation used as an independent
//!   oracle for the Gaussian layer.
//!
//! Everything is generic over [`Real`]; the `*F64` aliases below fix the
//! usual double-precision choice.

pub mod fock;
pub mod gaussian;
pub mod linalg;
pub mod model;
pub mod optimum;
pub mod scalar;
mod simplex;
pub mod spectra;
pub mod steady;

pub use model::{
    CavityReservoir, CoolingReport, EffectiveParams, FullSystemParams, ModelError, Scheme,
    SqueezedBathParams, Validate,
};
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;

pub type FullSystemParamsF64 = FullSystemParams<f64>;
pub type EffectiveParamsF64 = EffectiveParams<f64>;
pub type SqueezedBathParamsF64 = SqueezedBathParams<f64>;
pub type CavityReservoirF64 = CavityReservoir<f64>;
pub type CoolingReportF64 = CoolingReport<f64>;
pub type SteadyStateF64 = steady::SteadyState<f64>;
pub type AdiabaticMapF64 = steady::AdiabaticMap<f64>;
pub type CovarianceStateF64 = gaussian::CovarianceState<f64>;
pub type OptimumResultF64 = optimum::OptimumResult<f64>;
pub type DensityMatrixF64 = fock::DensityMatrix<f64>;
