//! Local hyper-flow diffusion on submodular hypergraphs.
//!
//! The crate is organised bottom-up:
//!
//! - [`hypergraph`]: immutable incidence structure, volumes, cut-sets and conductance.
//! - [`cutcost`]: submodular hyperedge cut-cost models (evaluation, Lovász extension,
//!   greedy base-polytope maximisation).
//! - [`projection`]: per-hyperedge conic projections and the closed-form excess step.
//! - [`solver`]: alternating minimisation with active-set execution and duality-gap
//!   monitoring.
//! - [`rounding`]: sweep-cut rounding, node ranking and clustering metrics.
//! - [`hsbm`]: k-uniform hypergraph stochastic block model generator.
//! - [`experiment`]: seeded runs scored against a target cluster, with quantile summaries.
//! - [`io`]: text formats for hypergraphs, labels, embeddings and run configuration.

pub mod cutcost;
pub mod error;
pub mod experiment;
pub mod hsbm;
pub mod hypergraph;
pub mod io;
pub mod projection;
pub mod rounding;
pub mod solver;

pub use cutcost::{CostModel, CutCost, SubsetTable};
pub use error::{Error, Result};
pub use hypergraph::{Hypergraph, NodeSet};
pub use projection::{EdgeProjectionResult, ProjectionOptions};
pub use solver::{DiffusionConfig, DiffusionState, SourceVector};
