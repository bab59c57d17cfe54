//! Horo-shrinkers in hyperbolic space: grim reapers, bowls and wings.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod grim;
pub mod ode;
pub mod rotational;

pub use error::{Error, Result};
