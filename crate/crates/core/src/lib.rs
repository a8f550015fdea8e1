//! Discrete versus continuous spins on hyperbolic graphs.
//!
//! The crate builds finite balls of the {3,q} triangulation and related
//! graphs, solves Kirchhoff's equations on them, samples the O(n) spin model,
//! and classifies how pair correlations behave with distance.

pub mod analysis;
pub mod electrical;
pub mod error;
pub mod format;
pub mod graphs;
pub mod oracles;
pub mod spinmc;

pub use error::{Error, Result};
pub use graphs::{Graph, VertexId};
