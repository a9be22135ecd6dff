//! Desk-scale computational toolkit for exact and Waldhausen categories,
//! the S-construction and K₀, simplicial cochain complexes and their
//! cohomology, a group-field expansion over finite groups, brane
//! configuration classification, and virtual-dimension bookkeeping.
//!
//! All computations are exact (integer or mod-p linear algebra) and
//! deterministic; enumeration order is part of each operation's contract.

pub mod brane;
pub mod cat;
pub mod complex;
pub mod exact;
pub mod gft;
pub mod kth;
pub mod matrix;
pub mod pndp;
pub mod report;

pub use report::{ValidationReport, Violation};
