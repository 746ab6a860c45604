//! Canonical Hecke characters of imaginary quadratic fields and certified
//! numerical evaluation of the central derivative of their L-functions.

pub mod analytic;
pub mod arith;
pub mod bounds;
pub mod characters;
pub mod error;
pub mod lseries;
pub mod quad;
pub mod report;
pub mod special;
pub mod sum;

pub use error::{Error, Result};
