//! Clustering and shared-basis SVD compression for collections of matrices
//! under an explicit relative reconstruction-error budget.
//!
//! The pipeline: summarize blocks ([`collection`]), decide which blocks may
//! share a basis via certified spectral bounds ([`bounds`], [`tracker`],
//! [`cluster`]), then compress each cluster by concatenation and truncated
//! SVD into a two-matrices-per-cluster store ([`store`], [`codec`]).

pub mod bounds;
pub mod cluster;
pub mod codec;
pub mod collection;
pub mod error;
pub mod linalg;
pub mod matrix;
pub mod seed;
pub mod store;
pub mod synth;
pub mod tracker;

#[cfg(test)]
pub(crate) mod testutil;

pub use bounds::{BoundKind, BoundValue};
pub use cluster::{AlgorithmKind, ErrorBudget, Partition, PlannedCluster, SortMode};
pub use collection::{Block, Collection};
pub use error::{Error, Result};
pub use linalg::Tolerances;
pub use matrix::{Matrix, SpectrumView};
pub use store::{CompressedCluster, CompressedStore};
pub use tracker::{GramTracker, ResidualTracker};
