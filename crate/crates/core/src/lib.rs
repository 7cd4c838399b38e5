//! Compound-matrix algebra and sampling-based certification of k-contraction,
//! horizontal contraction and partial contraction for nonlinear systems.

pub mod certify;
pub mod compound;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod linalg;
pub mod sampling;
pub mod systems;
pub mod tol;

pub use error::{Error, Result};
