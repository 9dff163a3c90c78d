//! k* distributions: per-sample rank of the nearest differently-labelled
//! neighbour, summarised per class to tell clustered, overlapped and
//! fractured classes apart in a latent space.
//!
//! ```
//! use kstar::{build_class_index, compute_kstar, all_class_statistics, EmbeddingSet, Metric, Pattern};
//!
//! let set = EmbeddingSet::new(vec![0.0, 1.0, 3.0, 4.0], 1, &["a", "a", "b", "b"], None).unwrap();
//! let index = build_class_index(&set);
//! let result = compute_kstar(&set, &index, Metric::EUCLIDEAN).unwrap();
//! assert_eq!(result.ranks, vec![2, 2, 2, 2]);
//! let stats = all_class_statistics(&result, &index, None);
//! assert_eq!(stats[0].pattern, Pattern::Clustered);
//! ```

pub mod dataset;
pub mod distance;
pub mod error;
pub mod kstar;
pub mod neighbor_matrix;
pub mod neighbors;
pub mod report;
pub mod synth;

pub use dataset::{
    build_class_index, load_embeddings, load_predictions, write_embeddings, ClassIndex,
    EmbeddingSet, Format, PredictionSet,
};
pub use distance::{distance, Metric};
pub use error::{Error, Result};
pub use kstar::{
    aggregate_by_pattern, all_class_statistics, class_statistics, classify_pattern, compute_kstar,
    moments, ClassStats, KStarResult, Moments, Pattern, PatternSummary,
};
pub use neighbor_matrix::{build_neighbor_matrix, stream_neighbor_matrix_csv, NeighborMatrix};
pub use neighbors::{first_heterogeneous_rank, heterogeneous_ranks, sorted_neighbors};
pub use report::{
    build_report, compare, render, AnalysisReport, Comparison, RenderFormat, ReportOptions,
};
pub use synth::{generate, Layout, SynthSpec};
