//! Numerical simulator for interferometric spectroscopy with few-photon light.

pub mod cli;
pub mod error;
pub mod interferometer;
pub mod linalg;
pub mod matter;
pub mod oracle;
pub mod photon;
pub mod signal;

pub use error::{Error, Result};
