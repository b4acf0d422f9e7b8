//! Stationary storage-level distributions for a finite reservoir fed by
//! gamma-distributed inflow and drained at a constant target outflow.
//!
//! The central object is [`StationaryDistribution`]: the exact limiting
//! distribution of the storage level, with point masses at empty and full,
//! built from a small linear system whose coefficients are finite sums of
//! closed-form integrals. Around it:
//!
//! - [`sim`] validates the exact distribution by simulating the storage
//!   recurrence and comparing empirical and analytic CDFs.
//! - [`optimize`] chooses the target outflow, either equalizing or
//!   minimizing the sum of the depletion and spillage probabilities.
//! - [`moran`] evaluates the stationary density of the continuous-time
//!   infinite-volume model by quadrature and simulates its gamma-process
//!   inflow.
//!
//! The crate is `no_std` (with `alloc`); all floating-point math goes
//! through `libm`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod dd;
pub mod distribution;
pub mod dmatrix;
mod error;
pub mod linalg;
pub mod moran;
pub mod numeric;
pub mod optimize;
pub mod params;
pub mod sim;

pub use distribution::{build_distribution, StationaryDistribution};
pub use dmatrix::DMatrix;
pub use error::Error;
pub use linalg::AlphaVector;
pub use moran::MoranModel;
pub use optimize::OptimizationResult;
pub use params::{derive_params, rescale, DerivedParams, ModelParams};
pub use sim::{SimConfig, SimulationResult};

pub type Result<T> = core::result::Result<T, Error>;
