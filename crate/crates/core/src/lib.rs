//! Density-ranked initialization of short random walks on graphs.
//!
//! Vertices are scored by how much restart-discounted random-walk proximity
//! they have to the rest of the graph. The densest vertices seed the
//! training walks of a walk-based graph generator, and a link-prediction
//! pipeline compares that against uniformly random starts.
//!
//! Modules, bottom-up:
//! - [`graph`] and [`split`]: ingestion, components, connectivity-preserving
//!   edge splits.
//! - [`proximity`] and [`density`]: transition matrix, exact and Monte-Carlo
//!   proximity, influence, density ranking, initializer selection.
//! - [`walks`]: walk sampling per strategy, walk files, walk entropy.
//! - [`generator`]: Markov and replay walk generators, score matrices.
//! - [`metrics`] and [`pipeline`]: ROC-AUC, average precision, edge overlap
//!   and the repeated evaluation loop.

pub mod density;
pub mod error;
pub mod generator;
pub mod graph;
pub mod metrics;
pub mod pipeline;
pub mod proximity;
pub mod rng;
pub mod split;
pub mod stats;
pub mod walks;

pub use density::{density_scores, influence, select_initializers, DensityRanking, RankDirection, Sigma};
pub use error::{Error, Result};
pub use generator::{
    assemble_graph, assemble_scores, fit_markov, replay_generator, AssembleMode, MarkovGenerator, ReplayGenerator,
    ScoreMatrix, WalkGenerator,
};
pub use graph::{largest_connected_component, load_edge_list, subgraph_density, Graph};
pub use metrics::{average_precision, edge_overlap, roc_auc};
pub use pipeline::{evaluate_pipeline, EvalReport, GeneratorFactory, GeneratorSpec, PipelineOptions};
pub use proximity::{proximity_exact, proximity_monte_carlo, transition_matrix, ProximityMatrix, TransitionMatrix};
pub use split::{split_edges, EdgeSplit};
pub use walks::{sample_walks, walk_entropy, Strategy, WalkConfig, WalkSet};
