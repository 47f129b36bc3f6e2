//! Finite-section numerics for Toeplitz, Hankel, truncated Toeplitz and
//! truncated Hankel operators on the Hardy space and on model spaces of finite
//! Blaschke products.

pub mod blaschke;
pub mod cli;
pub mod error;
pub mod harmonic;
pub mod identities;
pub mod model_space;
pub mod operators;
pub mod par;
pub mod probe;
pub mod sampling;
pub mod theorems;

pub use error::{Error, Result};
pub use harmonic::{c64, DiskPoint, LaurentSeries, TruncationConfig, C64};
