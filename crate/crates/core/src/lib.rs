//! Numerical laboratory for drift Laplacians with Gaussian weights on
//! weakly conical ends.
//!
//! The crate builds computable models of conical ends, evaluates the
//! weighted boundary/bulk functionals `B`, `F`, `D̂_m`, `L̂_m` and the
//! frequency functions `N`, `N̂_m` on them, integrates the radial
//! eigen-ODEs and the self-shrinker/self-expander profile ODEs, and checks
//! the exact identities, inequalities and sharp decay rates these objects
//! satisfy.
//!
//! All numerics are generic over the scalar type through [`Real`]; the
//! `*64` aliases at the crate root fix `f64`, which is what the CLI and the
//! acceptance suite use.

pub mod asymptotics;
pub mod error;
pub mod fitting;
pub mod frequency;
pub mod geometry;
pub mod link;
pub mod logscaled;
pub mod ode;
pub mod operators;
pub mod profile;
pub mod quadrature;
pub mod radial;
pub mod scalar;
pub mod selfsimilar;
pub mod separated;
pub mod transforms;
pub mod weights;

pub use error::Error;
pub use scalar::Real;

/// `f64` instantiations of the main public types.
pub type LogScaled64 = logscaled::LogScaled<f64>;
pub type WeightSpec64 = weights::WeightSpec<f64>;
pub type QuadratureSpec64 = weights::QuadratureSpec<f64>;
pub type LinkSpec64 = link::LinkSpec<f64>;
pub type End64 = geometry::WeaklyConicalEnd<f64>;
pub type SeparatedFunction64 = separated::SeparatedFunction<f64>;
pub type RadialProfile64 = profile::RadialProfile<f64>;
pub type DriftOperator64 = operators::DriftOperator<f64>;
pub type FrequencyTrace64 = frequency::FrequencyTrace<f64>;
