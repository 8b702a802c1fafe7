//! Constructive large-scale geometry on finite pointed metric spaces.
//!
//! The crate is organized around a single data type, [`space::FiniteMetricSpace`],
//! and layers of machinery on top of it: map analysis, space constructions,
//! transport distances, colored covers and dimension-type invariants, nerve
//! complexes with rational homology, Lipschitz extension operators, and
//! measure-valued embeddings with compression profiles.
//!
//! Start with the runnable examples (`cargo run -p coarsegeom --example <name>`):
//! see the `examples/` directory for one program per capability area.

pub mod cache;
pub mod cayley;
pub mod cover;
pub mod embed;
pub mod error;
pub mod extension;
pub mod functors;
pub mod homology;
pub mod io;
pub mod maps;
pub mod measure;
pub mod nerve;
pub mod space;

pub use error::{Error, Result};
pub use space::{Budget, FiniteMetricSpace};
