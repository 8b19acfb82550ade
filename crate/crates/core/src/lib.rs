//! Numerical laboratory for statistical manifolds and their submanifolds.
//!
//! The crate builds dual-connection geometry from coordinate charts, checks the
//! structural identities of holomorphic statistical manifolds as quantitative
//! residuals, and evaluates the Chen-Ricci inequality together with its
//! equality diagnostics on a gallery of worked examples.
//!
//! Modules, bottom-up:
//!
//! - [`chart`]: charts, finite differences, Gram-Schmidt and complements
//! - [`statstruct`]: dual pairs, contrast tensors, axiom residuals
//! - [`curvature`]: curvature of connections, the averaged tensor, Ricci sums
//! - [`submanifold`]: immersions, fundamental forms, CR structure checks
//! - [`chenricci`]: the Ricci inequality and its quadratic programs
//! - [`gallery`]: the built-in example manifolds and immersions
//! - [`report`]: batch runner and JSON reports

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod chart;
pub mod chenricci;
pub mod curvature;
pub mod error;
pub mod gallery;
pub mod report;
pub mod statstruct;
pub mod submanifold;
pub mod tensor;

pub use chart::{Chart, Domain, FdConfig, FdScheme, Frame, Matrix, Point, Vector};
pub use error::{GeomError, Result};
pub use statstruct::DualPair;
pub use tensor::{ConnectionCoeffs, Tensor3, Tensor4};
