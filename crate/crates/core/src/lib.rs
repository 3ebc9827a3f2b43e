pub mod constants;
pub mod deviation;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod identities;
pub mod linalg;
pub mod optimize;
pub mod quadrature;
mod serde_inf;
pub mod torsion;

pub use error::{Error, Result};
