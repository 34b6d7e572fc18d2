//! Optimal reparametrization of curves and surfaces by compositions of
//! elementary diffeomorphisms.

pub mod bounds;
pub mod builtin;
pub mod diffeo;
mod error;
pub mod geometry;
pub mod optimize;
pub mod transforms;

pub use error::{Error, Result};
