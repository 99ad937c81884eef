//! Semantic-communication metric layer: similarity surrogates standing in for
//! trained DeepSC / MU-DeepSC transceivers, semantic rate, QoE scoring, the
//! delivery-success logistic and the bit-based QoE' of the non-semantic
//! baseline.

mod config;
mod metrics;
mod surrogate;

pub use config::{ProfileDistributions, QoEProfile, SemanticConfig, SurrogateConfig};
pub use metrics::{
    qoe_member, qoe_platoon, qoe_traditional, score_sigmoid, semantic_rate, srs_hard, srs_logistic,
    MemberQuality, RateSample,
};
pub use surrogate::{load_similarity_table, parse_similarity_table, AnalyticSurrogate, SimilaritySurrogate, SimilarityTable, SurrogateKind};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SemanticsError {
    #[error("{profiles} QoE profiles for {members} members")]
    MemberCountMismatch { profiles: usize, members: usize },
    #[error("similarity table: {0}")]
    Table(String),
    #[error("similarity table line {line}, column {column}: {message}")]
    TableCell { line: usize, column: usize, message: String },
    #[error("invalid semantic config: {0}")]
    Invalid(String),
    #[error("reading similarity table {path}: {message}")]
    Io { path: String, message: String },
}
