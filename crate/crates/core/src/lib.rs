//! Multi-hop passage retrieval over a graph of simulated questions.
//!
//! Indexing asks a chat model, for every passage, which questions the
//! passage answers (in-coming) and which it raises but cannot answer
//! (out-coming). Each out-coming question is linked to the most similar
//! in-coming question of another passage, producing a directed graph whose
//! edges carry the linking question. At query time the edges most similar
//! to the query seed a walk in which a reasoner picks one edge per visited
//! passage; visited passages are ranked by similarity and visit share.

pub mod error;
pub mod evalkit;
pub mod graph;
pub mod indexer;
pub mod model;
pub mod prompts;
pub mod providers;
pub mod similarity;
pub mod storage;
pub mod traversal;

pub use error::{Error, Result};
pub use graph::{nlogn_cap, PassageGraph};
pub use indexer::{add_passage, build_graph, EdgeCapRule, IndexConfig, IndexReport};
pub use model::{Direction, Edge, Embedding, Keywords, Passage, QueryTriplet, Vertex, VisitCounter};
pub use prompts::PromptTemplates;
pub use providers::Providers;
pub use traversal::{encode_query, retrieve, QueryRepr, ReasonerMode, Retriever, TraversalParams, TraversalTrace};
