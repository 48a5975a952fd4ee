//! Two-tile subdivision rules of Thurston maps.
//!
//! A rule describes how each of the two tiles of a pillow is cut into smaller
//! tiles and where every small cell is mapped. This crate validates rules,
//! generates the decompositions of every level, and computes the
//! combinatorial quantities attached to them: the joining numbers `D_n`,
//! bounds on the combinatorial expansion factor, chain metrics, the measure of
//! maximal entropy, the symbolic coding, and invariant curves by edge
//! replacement.

pub mod cell_complex;
pub mod curve;
pub mod engine;
pub mod fixtures;
pub mod measure;
pub mod metrics;
pub mod render;
pub mod rule;
pub mod scalar;

pub use cell_complex::{CellId, DirectedEdge, OrientedComplex};
pub use rule::{Color, Location, SubdivisionRule};
pub use scalar::{ExactScalar, Rational};
