//! Exact hybrid scoring over a fixed set of feature rows.
//!
//! Keyword overlap is counted through an inverted index and the dense term
//! uses precomputed row norms. Scores are bit-identical to
//! [`crate::similarity::hybrid_sim`] on the same features.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::graph::PassageGraph;
use crate::model::{Edge, Embedding, Features, Keywords, Vertex};
use crate::similarity::{cosine_with_norms, norm};

/// How candidate rows are chosen before exact scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreMode {
    /// Score every row.
    #[default]
    Exact,
    /// Score only the `dense_candidates` rows with the highest cosine plus
    /// every row sharing at least one keyword with the query.
    Prefilter { dense_candidates: usize },
}

#[derive(Debug, Clone)]
pub struct HybridIndex {
    dim: usize,
    /// keyword -> ascending row ids
    postings: HashMap<String, Vec<u32>>,
    keyword_counts: Vec<usize>,
    dense: Vec<f64>,
    norms: Vec<f64>,
}

impl HybridIndex {
    pub fn build<'a, I>(dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a Keywords, &'a Embedding)>,
    {
        let mut index = HybridIndex {
            dim,
            postings: HashMap::new(),
            keyword_counts: Vec::new(),
            dense: Vec::new(),
            norms: Vec::new(),
        };
        for (row, (keywords, embedding)) in rows.into_iter().enumerate() {
            embedding.check_dim(dim)?;
            let row = u32::try_from(row).map_err(|_| Error::InvalidInput("too many rows".into()))?;
            for term in keywords.iter() {
                index.postings.entry(term.to_string()).or_default().push(row);
            }
            index.keyword_counts.push(keywords.len());
            index.dense.extend_from_slice(embedding.values());
            index.norms.push(norm(embedding.values()));
        }
        Ok(index)
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn posting(&self, term: &str) -> &[u32] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    fn row(&self, row: usize) -> &[f64] {
        &self.dense[row * self.dim..(row + 1) * self.dim]
    }

    fn overlap_counts(&self, keywords: &Keywords) -> Vec<u32> {
        let mut inter = vec![0u32; self.len()];
        for term in keywords.iter() {
            for &row in self.posting(term) {
                inter[row as usize] += 1;
            }
        }
        inter
    }

    fn score_row(&self, row: usize, inter: u32, q_len: usize, q: &[f64], q_norm: f64) -> f64 {
        let union = q_len + self.keyword_counts[row] - inter as usize;
        let lexical = if union == 0 { 0.0 } else { inter as f64 / union as f64 };
        let dense = cosine_with_norms(q, q_norm, self.row(row), self.norms[row]);
        (lexical + dense) / 2.0
    }

    /// Rows ranked by descending hybrid score, ties by ascending row.
    pub fn rank<Q: Features + ?Sized>(&self, query: &Q, mode: ScoreMode) -> Result<Vec<(usize, f64)>> {
        query.embedding().check_dim(self.dim)?;
        let q = query.embedding().values();
        let q_norm = norm(q);
        let q_len = query.keywords().len();
        let inter = self.overlap_counts(query.keywords());

        let mut scored: Vec<(usize, f64)> = match mode {
            ScoreMode::Exact => (0..self.len())
                .map(|row| (row, self.score_row(row, inter[row], q_len, q, q_norm)))
                .collect(),
            ScoreMode::Prefilter { dense_candidates } => {
                let mut by_dense: Vec<(usize, f64)> = (0..self.len())
                    .map(|row| (row, cosine_with_norms(q, q_norm, self.row(row), self.norms[row])))
                    .collect();
                by_dense.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                let mut rows: HashSet<usize> = by_dense.iter().take(dense_candidates).map(|(r, _)| *r).collect();
                rows.extend(inter.iter().enumerate().filter(|(_, n)| **n > 0).map(|(r, _)| r));
                rows.into_iter()
                    .map(|row| (row, self.score_row(row, inter[row], q_len, q, q_norm)))
                    .collect()
            }
        };
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(scored)
    }

    /// Highest-scoring row not rejected by `skip`, ties by ascending row.
    pub fn best<Q, F>(&self, query: &Q, mode: ScoreMode, skip: F) -> Result<Option<(usize, f64)>>
    where
        Q: Features + ?Sized,
        F: Fn(usize) -> bool,
    {
        if let ScoreMode::Prefilter { .. } = mode {
            return Ok(self.rank(query, mode)?.into_iter().find(|(row, _)| !skip(*row)));
        }
        query.embedding().check_dim(self.dim)?;
        let q = query.embedding().values();
        let q_norm = norm(q);
        let q_len = query.keywords().len();
        let inter = self.overlap_counts(query.keywords());
        let mut best: Option<(usize, f64)> = None;
        for row in (0..self.len()).filter(|r| !skip(*r)) {
            let score = self.score_row(row, inter[row], q_len, q, q_norm);
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((row, score));
            }
        }
        Ok(best)
    }
}

/// Hybrid index over a graph's retained edges, rows in canonical edge order.
#[derive(Debug, Clone)]
pub struct EdgeIndex<'g> {
    edges: Vec<&'g Edge>,
    index: HybridIndex,
}

impl<'g> EdgeIndex<'g> {
    pub fn build(graph: &'g PassageGraph) -> Result<Self> {
        let edges: Vec<&Edge> = graph.edges().collect();
        let index = HybridIndex::build(graph.dim(), edges.iter().map(|e| (&e.keywords, &e.embedding)))?;
        Ok(EdgeIndex { edges, index })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn score_all<Q: Features + ?Sized>(&self, query: &Q) -> Result<Vec<(&'g Edge, f64)>> {
        self.score_with(query, ScoreMode::Exact)
    }

    pub fn score_with<Q: Features + ?Sized>(&self, query: &Q, mode: ScoreMode) -> Result<Vec<(&'g Edge, f64)>> {
        Ok(self
            .index
            .rank(query, mode)?
            .into_iter()
            .map(|(row, score)| (self.edges[row], score))
            .collect())
    }
}

/// Hybrid index over passage-level vertex features, rows in ascending id order.
#[derive(Debug, Clone)]
pub struct VertexIndex<'g> {
    vertices: Vec<&'g Vertex>,
    index: HybridIndex,
}

impl<'g> VertexIndex<'g> {
    pub fn build(graph: &'g PassageGraph) -> Result<Self> {
        let vertices: Vec<&Vertex> = graph.vertices().collect();
        let index = HybridIndex::build(
            graph.dim(),
            vertices.iter().map(|v| (&v.passage_keywords, &v.passage_embedding)),
        )?;
        Ok(VertexIndex { vertices, index })
    }

    pub fn score_all<Q: Features + ?Sized>(&self, query: &Q) -> Result<Vec<(&'g Vertex, f64)>> {
        Ok(self
            .index
            .rank(query, ScoreMode::Exact)?
            .into_iter()
            .map(|(row, score)| (self.vertices[row], score))
            .collect())
    }
}

/// Every retained edge of `graph` ranked against `query`.
pub fn score_all_edges<'g, Q: Features + ?Sized>(graph: &'g PassageGraph, query: &Q) -> Result<Vec<(&'g Edge, f64)>> {
    EdgeIndex::build(graph)?.score_all(query)
}
