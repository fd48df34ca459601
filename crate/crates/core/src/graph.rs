//! The passage graph: vertices keyed by passage id plus directed out-edges.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{Edge, Vertex};
use crate::storage::codec;

/// `n * ceil(log2 n)`, zero for `n <= 1`.
pub fn nlogn_cap(n: usize) -> usize {
    if n <= 1 {
        return 0;
    }
    let ceil_log2 = (usize::BITS - (n - 1).leading_zeros()) as usize;
    n.saturating_mul(ceil_log2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassageGraph {
    pub(crate) dim: usize,
    pub(crate) vertices: BTreeMap<String, Vertex>,
    /// Best match of every out-coming triplet, before deduplication and
    /// capping. Kept so incremental insertion can re-derive the edge set.
    pub(crate) candidates: Vec<Edge>,
    /// Retained edges grouped by source, each list in canonical order.
    pub(crate) edges: BTreeMap<String, Vec<Edge>>,
    pub(crate) edge_cap: usize,
}

impl PassageGraph {
    /// An empty graph with no edge cap.
    pub fn new(dim: usize) -> Self {
        PassageGraph {
            dim,
            vertices: BTreeMap::new(),
            candidates: Vec::new(),
            edges: BTreeMap::new(),
            edge_cap: usize::MAX,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn edge_cap(&self) -> usize {
        self.edge_cap
    }

    pub fn vertex(&self, id: &str) -> Option<&Vertex> {
        self.vertices.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.vertices.contains_key(id)
    }

    /// Vertices in ascending id order.
    pub fn vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.values()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn out_edges(&self, id: &str) -> &[Edge] {
        self.edges.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// All retained edges in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values().flatten()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.values().map(Vec::len).sum()
    }

    pub fn candidates(&self) -> &[Edge] {
        &self.candidates
    }

    pub fn insert_vertex(&mut self, vertex: Vertex) -> Result<()> {
        vertex.passage.validate()?;
        vertex.check_dim(self.dim)?;
        if self.vertices.contains_key(vertex.id()) {
            return Err(Error::IdConflict(vertex.id().to_string()));
        }
        self.vertices.insert(vertex.id().to_string(), vertex);
        Ok(())
    }

    /// Adds a retained edge directly, bypassing edge merging.
    pub fn insert_edge(&mut self, edge: Edge) -> Result<()> {
        self.validate_edge(&edge)?;
        if self.edge_count() >= self.edge_cap {
            return Err(Error::InvalidInput(format!("edge cap of {} reached", self.edge_cap)));
        }
        let list = self.edges.entry(edge.source_id.clone()).or_default();
        let pos = list.partition_point(|e| e.canonical_cmp(&edge).is_lt());
        list.insert(pos, edge);
        Ok(())
    }

    pub(crate) fn validate_edge(&self, edge: &Edge) -> Result<()> {
        if edge.source_id == edge.target_id {
            return Err(Error::InvalidInput(format!(
                "self-loop on `{}` is not allowed",
                edge.source_id
            )));
        }
        for id in [&edge.source_id, &edge.target_id] {
            if !self.vertices.contains_key(id) {
                return Err(Error::Key(id.clone()));
            }
        }
        edge.embedding.check_dim(self.dim)
    }

    /// Replaces candidates and retained edges. `retained` must already be
    /// capped; it is regrouped into canonical order here.
    pub(crate) fn set_edges(&mut self, candidates: Vec<Edge>, retained: Vec<Edge>, edge_cap: usize) {
        self.candidates = candidates;
        self.edge_cap = edge_cap;
        let mut grouped: BTreeMap<String, Vec<Edge>> = BTreeMap::new();
        for e in retained {
            grouped.entry(e.source_id.clone()).or_default().push(e);
        }
        for list in grouped.values_mut() {
            list.sort_by(|a, b| a.canonical_cmp(b));
        }
        self.edges = grouped;
    }

    /// SHA-256 over the canonical binary encoding of the graph, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(codec::encode_graph(self));
        hex::encode(hasher.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Embedding, Keywords, Passage};

    fn vertex(id: &str) -> Vertex {
        Vertex {
            passage: Passage::new(id, format!("text of {id}"), "d").unwrap(),
            out_triplets: vec![],
            in_triplets: vec![],
            passage_keywords: Keywords::empty(),
            passage_embedding: Embedding::new(vec![1.0, 0.0]).unwrap(),
        }
    }

    fn edge(s: &str, t: &str, score: f64) -> Edge {
        Edge {
            source_id: s.into(),
            target_id: t.into(),
            question: format!("{s}->{t}?"),
            keywords: Keywords::empty(),
            embedding: Embedding::new(vec![0.0, 1.0]).unwrap(),
            sim_score: score,
            out_ordinal: 0,
            in_ordinal: 0,
        }
    }

    #[test]
    fn cap_values() {
        assert_eq!(nlogn_cap(0), 0);
        assert_eq!(nlogn_cap(1), 0);
        assert_eq!(nlogn_cap(2), 2);
        assert_eq!(nlogn_cap(3), 6);
        assert_eq!(nlogn_cap(4), 8);
        assert_eq!(nlogn_cap(5), 15);
        assert_eq!(nlogn_cap(1024), 10240);
    }

    #[test]
    fn rejects_self_loops_and_dangling_edges() {
        let mut g = PassageGraph::new(2);
        g.insert_vertex(vertex("a")).unwrap();
        g.insert_vertex(vertex("b")).unwrap();
        assert!(g.insert_edge(edge("a", "a", 0.5)).is_err());
        assert!(matches!(g.insert_edge(edge("a", "zz", 0.5)), Err(Error::Key(_))));
        g.insert_edge(edge("a", "b", 0.5)).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn rejects_duplicate_ids_and_wrong_dims() {
        let mut g = PassageGraph::new(2);
        g.insert_vertex(vertex("a")).unwrap();
        assert!(matches!(g.insert_vertex(vertex("a")), Err(Error::IdConflict(_))));
        let mut g3 = PassageGraph::new(3);
        assert!(matches!(g3.insert_vertex(vertex("b")), Err(Error::Dimension { .. })));
    }

    #[test]
    fn out_edges_are_canonically_ordered() {
        let mut g = PassageGraph::new(2);
        for id in ["a", "b", "c"] {
            g.insert_vertex(vertex(id)).unwrap();
        }
        g.insert_edge(edge("a", "c", 0.1)).unwrap();
        g.insert_edge(edge("a", "b", 0.9)).unwrap();
        let targets: Vec<_> = g.out_edges("a").iter().map(|e| e.target_id.as_str()).collect();
        assert_eq!(targets, ["b", "c"]);
        assert!(g.out_edges("c").is_empty());
    }

    #[test]
    fn fingerprint_tracks_content() {
        let mut g = PassageGraph::new(2);
        g.insert_vertex(vertex("a")).unwrap();
        g.insert_vertex(vertex("b")).unwrap();
        let before = g.fingerprint();
        assert_eq!(before, g.clone().fingerprint());
        g.insert_edge(edge("a", "b", 0.5)).unwrap();
        assert_ne!(before, g.fingerprint());
    }
}
