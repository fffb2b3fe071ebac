//! Numerical dynamics of the Fibonacci trace map.
//!
//! The crate covers the trace map and its invariant surfaces, the
//! unperturbed torus factor and its symbolic coding, the spectrum of the
//! Fibonacci Hamiltonian via the trace recursion, box-counting dimension
//! estimates, and numerical certificates for the expansion mechanism near
//! the singular points of the Cayley cubic.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dimension;
pub mod error;
pub mod geometry;
pub mod hyperbolic;
pub mod spectrum;
pub mod subshift;
pub mod torus;

pub use error::{Error, Result};
pub use geometry::{Coupling, Point3, SurfaceMesh, SurfaceSpec};
pub use spectrum::{BandSet, OrbitRecord, OrbitStatus};

/// The golden mean (1+√5)/2.
pub const GOLDEN: f64 = 1.618_033_988_749_895;

/// Crate version string embedded in emitted records.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
