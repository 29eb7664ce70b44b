//! Construction and residual certification of ruled special Lagrangian
//! 3-folds in C³.

pub mod complex3;
pub mod constructions;
pub mod cone;
pub mod elliptic;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod manifest;
pub mod mesh;
pub mod pipeline;
pub mod report;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
