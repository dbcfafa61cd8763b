//! Singularity invariants of central hyperplane arrangements.

pub mod archzeta2;
pub mod arrangement;
pub mod bfunction;
pub mod error;
pub mod exact;
pub mod io;
pub mod lp;
pub mod resolution;
pub mod topzeta;

pub use error::{Error, Result};
