//! Numerics for the dynamics of exponential polynomials
//! `f(z) = sum_j Q_j(z) exp(b_j z^d + P_j(z))`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exceptional;
pub mod expoly;
pub mod grid;
pub mod hypotheses;
pub mod library;
pub mod logc;
pub mod measure;
pub mod orbit;
pub mod poly;
pub mod raster;
pub mod sampling;
pub mod tower;
pub mod verify;

pub use error::{Error, Result};
pub use expoly::{ExpPoly, ExpPolyTerm};
pub use logc::LogComplex;
pub use num_complex::Complex64;
pub use poly::Poly;
pub use tower::TowerMag;
