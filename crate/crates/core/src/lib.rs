//! Community detection on undirected graphs with cellular sheaves.
//!
//! Opinions live in the stalks of a sheaf over the graph and evolve under a
//! bounded-confidence flow; edges that reach consensus define the communities.
//! Two cheaper detectors replace the flow by random or rule-based edge
//! retention. Every detector finishes by folding single-vertex clusters into
//! the neighboring cluster with the best modularity gain.

pub mod algorithms;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod numeric;
pub mod sheaf;

pub use algorithms::{
    detect_constant, detect_deterministic, detect_edge_projection, detect_nonconstant,
    edge_keep_probability, resolve_singletons, sample_ball, ConstantSheafParams, DetectionResult, Merge,
};
pub use dynamics::{evolve, BumpFunction, EvolutionOutcome, FlowParams, OpinionState, Status};
pub use error::{Error, Result};
pub use experiments::{run_sweep, write_csv, Grid, GridPoint, SweepConfig, SweepResult};
pub use graph::{karate_club, load_edge_list, modularity, Graph, Partition};
pub use sheaf::{coboundary, cohomology_dims, sheaf_laplacian, signed_incidence, CellularSheaf, Cohomology};
