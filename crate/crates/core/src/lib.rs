//! Holonomy of the slice of projective structures `θ℘ + c` on the square
//! punctured torus, and its discreteness locus.

pub mod character;
pub mod discreteness;
pub mod elliptic;
pub mod error;
pub mod holonomy;
pub mod moebius;
pub mod scan;

pub use error::{Error, Result};
