//! Query answering over inconsistent existential-rule knowledge bases
//! through clusters of repairs.
//!
//! The pipeline: parse a [`KnowledgeBase`], enumerate its repairs, measure
//! the syntactic distance between every pair, embed them in the plane,
//! partition them, and answer Boolean conjunctive queries under AR, IAR or
//! ICR semantics restricted to a cluster or a hand-picked set of repairs.

#![allow(clippy::needless_range_loop)]

pub mod assignment;
pub mod clustering;
pub mod error;
pub mod geometry;
pub mod inference;
pub mod kb;
pub mod linalg;
pub mod metric;
pub mod repairs;
pub mod session;

pub use clustering::{ClusteringMethod, Partition};
pub use error::{Error, Result};
pub use geometry::{mds_embed, Embedding, MdsOptions};
pub use inference::{dif_answer, entails_scoped, DifResult, Scope, Semantics};
pub use kb::{parse_kb, parse_query, Atom, KnowledgeBase, NegativeConstraint, Query, Rule, Term};
pub use metric::{distance_matrix, DistanceMatrix, WeightScheme};
pub use repairs::{compute_repairs, Repair, RepairSet};
pub use session::{
    to_json, AnalysisDocument, ClusteringParams, QueryAnswer, QueryRequest, ScopeSpec, Session,
    SessionConfig, SessionStore,
};
