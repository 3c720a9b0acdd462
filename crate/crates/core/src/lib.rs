//! Grubb's quasi-state on the flat 2-torus, evaluated two independent ways:
//! from the Reeb graph of a PL field, and through Aarnes's representation
//! `ζ(H) = max H − ∫ τ({H ≤ t}) dt` over the topological measure
//! `τ(W) = |Ŵ|`.

pub mod error;
pub mod expr;
pub mod field;
pub mod generate;
pub mod geometry;
pub mod grid;
pub mod harness;
pub mod json;
pub mod lattice;
pub mod quasistate;
pub mod reeb;
pub mod surface;
pub mod unionfind;

pub use error::{Error, Result};
pub use field::{CriticalKind, FieldSource, TorusField};
pub use grid::TorusGrid;
pub use lattice::LatticeSymplectomorphism;
pub use quasistate::{BCurve, Mode, QuasiStateReport, Sampling};
pub use reeb::{CycleTreeDecomposition, ReebGraph};
pub use surface::{BoundaryLoop, LoopAction, LoopClass, RegularizedSurface, Side, SubSurface};
