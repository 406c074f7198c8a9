//! Numerical toolkit for the entropy differential of minimal surfaces.

pub mod error;
pub mod jets;
pub mod models;
pub mod verify;
pub mod geomnum;
pub mod hill;
pub mod integrate_surface;
pub mod weierstrass;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
