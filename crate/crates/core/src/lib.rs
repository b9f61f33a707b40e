//! Count-reinforcement clustering for categorical event data.
//!
//! Each input event is a set of co-occurring categorical variables. Three
//! counting schemes are provided, each with its own cluster read-out:
//!
//! - [`reinforce`]: one additive counter per variable, clustered into bands
//!   of equal count.
//! - [`counting`]: a store of unique pattern instances with a local count
//!   (exact presentations) and a global count (overlapping presentations).
//! - [`grid`]: a symmetric co-occurrence matrix read out by mutual head-set
//!   agreement, with cross-cluster residual links.
//!
//! [`hierarchy`] grows pattern instances incrementally, [`ingest`] parses
//! transaction files and ships the built-in fixtures, and [`eval`] scores a
//! partition against a reference.

pub mod counting;
pub mod error;
pub mod eval;
pub mod grid;
pub mod hierarchy;
pub mod ingest;
pub mod model;
pub mod reinforce;
pub mod render;

pub use counting::{CoherenceMeasure, InstanceRecord, InstanceStore};
pub use error::{Error, Result};
pub use eval::{pairwise_agreement, AgreementReport};
pub use grid::{CountMatrix, ExtractOptions, GapTieBreak, GridClusterResult, SingletonPolicy};
pub use hierarchy::{HierarchyConfig, HierarchyStore};
pub use ingest::{load_fixture, parse_transactions, Fixture, LabelPolicy, TransactionFormat};
pub use model::{
    build_vocabulary, Dataset, Diagnostic, Event, InterPatternLink, LabeledPartition, Partition,
    VarId, Variable, Vocabulary, Weights,
};
pub use reinforce::{Band, ReinforceState};
