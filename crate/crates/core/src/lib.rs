//! Numerical tools for Finsler metrics that are preserved by an affine
//! connection with torsion: sprays and the Douglas / generalized Berwald
//! residuals, the pointwise classification of two-dimensional metrics,
//! Zermelo navigation for Randers metrics, and parallel transport.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod connection;
pub mod cubic;
pub mod curve;
pub mod error;
pub mod fiber2d;
pub mod io;
pub mod linalg;
pub mod metric;
pub mod navigation;
pub mod ode;
pub mod spray;
pub mod tolerances;

pub use error::{FinslerError, Result};
pub use metric::{MetricSpec, Point, Vector};
