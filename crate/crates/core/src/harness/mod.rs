//! Ingestion, exact oracles, evaluation and lower-bound instances.

pub mod evaluate;
pub mod ingest;
pub mod lowerbound;
pub mod metric_space;

pub use evaluate::{evaluate, exact_distances, DistortionReport, PairRecord};
pub use ingest::{ingest_points, read_points, InputFormat};
pub use lowerbound::{gen_lowerbound_euclidean, gen_lowerbound_general, recover_bits, recover_distances, EuclideanInstance, GeneralInstance};
pub use metric_space::{embed_general_metric, GeneralMetric};
