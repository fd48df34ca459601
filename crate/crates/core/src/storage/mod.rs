//! Persistence and lookup structures.

mod archive;
pub(crate) mod codec;
mod index;
mod stats;

pub use archive::{decode, encode, load, load_graph, save, BuildMetadata, GraphArchive, FORMAT_VERSION, MAGIC};
pub use index::{score_all_edges, EdgeIndex, HybridIndex, ScoreMode, VertexIndex};
pub use stats::{stats, GraphStats};
