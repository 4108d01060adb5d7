//! Equilibrium density profiles of a hard-sphere fluid with an attractive
//! self-potential in a spherical container.

pub mod commands;
pub mod config;
pub mod eos;
pub mod error;
pub mod field;
pub mod functionals;
pub mod kernels;
pub mod phase;
pub mod quadrature;
pub mod spectral;
pub mod uniform;

pub use eos::{EosMode, EosModel, Side};
pub use error::{Error, Result};
pub use kernels::KernelSpec;
