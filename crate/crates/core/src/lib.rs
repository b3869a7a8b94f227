//! Exact critical groups of simplicial complexes.
//!
//! The crate computes the higher critical groups `K_i(Δ) = ker ∂_i / im L_i`
//! of finite simplicial complexes, enumerates simplicial spanning trees with
//! their torsion weights, checks the simplicial matrix-tree identities, and
//! runs the flow and chip-firing model on top of the Laplacians. All
//! arithmetic is exact over arbitrary-precision integers.
//!
//! ```
//! use critical_groups::{critical, generators};
//!
//! let b = generators::bipyramid();
//! let k1 = critical::critical_group_direct(&b, 1).unwrap();
//! assert_eq!(k1.to_string(), "Z/15");
//! ```

pub mod cli;
pub mod complex;
pub mod critical;
pub mod flow;
pub mod generators;
pub mod linalg;
pub mod trees;

pub use complex::{Simplex, SimplicialComplex, Vertex};
pub use critical::{CriticalGroup, LaplacianKind};
pub use linalg::{IntegerMatrix, SmithForm};
pub use trees::{SpanningTree, TreeCensus};
