//! Reachability indexes for directed acyclic graphs built with pruned
//! landmark labeling.
//!
//! [`pll::pll_preprocess`] is the sequential construction. [`batch`] runs
//! the same searches in batches of up to 512 roots at once, using per-batch
//! reachability bitsets to keep the output identical to the sequential one.
//! Its relaxed mode drops the bitsets for the less important tail of the
//! order. [`oracle`] holds brute-force ground truth for testing, and [`io`]
//! holds the graph and index file formats.

pub mod batch;
pub mod cli;
pub mod error;
pub mod gen;
pub mod graph;
pub mod io;
pub mod labels;
pub mod oracle;
pub mod pll;

pub use batch::{
    batch_pruned_bfs, merge_batch, parallel_preprocess, parallel_preprocess_timed, relaxed_tail_phase,
    topo_sweep, BatchConfig, Mode, PhaseTimes, ReachBitsets, StagedSearch,
};
pub use error::{BatchError, GraphError, IoError, VerifyError};
pub use gen::{gen_layered_dag, gen_random_dag};
pub use graph::{condense_sccs, degree_order, Graph, Rank, Vertex, VertexOrder};
pub use labels::{hub_query, label_stats, Direction, HubLabels, LabelStats};
pub use oracle::{build_oracle, verify_cover, verify_equal, verify_minimal, ReachOracle};
pub use pll::{pll_preprocess, pruned_bfs, BfsWorkspace};
