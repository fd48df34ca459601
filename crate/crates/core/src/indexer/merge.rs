//! Edge merging: linking out-coming questions to in-coming questions of
//! other passages, then deduplicating and capping the result.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::Result;
use crate::graph::nlogn_cap;
use crate::model::{Edge, QueryTriplet, Vertex};
use crate::similarity::hybrid_sim;
use crate::storage::{HybridIndex, ScoreMode};

use super::{EdgeCapRule, IndexConfig};

impl EdgeCapRule {
    pub fn cap(self, n_vertices: usize) -> usize {
        match self {
            EdgeCapRule::NLogN => nlogn_cap(n_vertices),
            EdgeCapRule::Fixed(n) => n,
            EdgeCapRule::Unlimited => usize::MAX,
        }
    }
}

pub(crate) fn make_edge(source: &Vertex, out: &QueryTriplet, target: &Vertex, inc: &QueryTriplet, score: f64) -> Edge {
    Edge {
        source_id: source.id().to_string(),
        target_id: target.id().to_string(),
        question: inc.question.clone(),
        keywords: inc.keywords.union(&out.keywords),
        embedding: inc.embedding.clone(),
        sim_score: score,
        out_ordinal: out.ordinal,
        in_ordinal: inc.ordinal,
    }
}

/// One candidate edge per out-coming triplet: its best in-coming match among
/// the other vertices, ties by ascending (vertex id, ordinal).
///
/// Candidates come back ordered by (source id, out ordinal). Pools larger
/// than `config.exact_search_limit` triplets are searched approximately.
pub fn merge_edges(vertices: &[&Vertex], config: &IndexConfig) -> Result<Vec<Edge>> {
    let mut vertices: Vec<&Vertex> = vertices.to_vec();
    vertices.sort_by(|a, b| a.id().cmp(b.id()));
    let Some(first) = vertices.first() else {
        return Ok(Vec::new());
    };
    let dim = first.passage_embedding.dim();

    let mut owner: Vec<usize> = Vec::new();
    let mut pool: Vec<&QueryTriplet> = Vec::new();
    for (vi, v) in vertices.iter().enumerate() {
        let mut ins: Vec<&QueryTriplet> = v.in_triplets.iter().collect();
        ins.sort_by_key(|t| t.ordinal);
        for t in ins {
            owner.push(vi);
            pool.push(t);
        }
    }
    let index = HybridIndex::build(dim, pool.iter().map(|t| (&t.keywords, &t.embedding)))?;
    let mode = if pool.len() > config.exact_search_limit {
        ScoreMode::Prefilter {
            dense_candidates: config.prefilter_candidates,
        }
    } else {
        ScoreMode::Exact
    };

    let jobs: Vec<(usize, &QueryTriplet)> = vertices
        .iter()
        .enumerate()
        .flat_map(|(vi, v)| {
            let mut outs: Vec<&QueryTriplet> = v.out_triplets.iter().collect();
            outs.sort_by_key(|t| t.ordinal);
            outs.into_iter().map(move |t| (vi, t))
        })
        .collect();

    let found: Vec<Option<Edge>> = jobs
        .par_iter()
        .map(|&(vi, out)| {
            let best = index.best(out, mode, |row| owner[row] == vi)?;
            Ok(best.map(|(row, score)| make_edge(vertices[vi], out, vertices[owner[row]], pool[row], score)))
        })
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// Whether `score` at (`target`, `ordinal`) beats the current best under the
/// merge tie-break.
pub(crate) fn beats(score: f64, target: &str, ordinal: usize, best: &Edge) -> bool {
    match score.total_cmp(&best.sim_score) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => (target, ordinal) < (best.target_id.as_str(), best.in_ordinal),
    }
}

/// Best match for `out` against the in-coming triplets of `targets`,
/// computed pairwise. Used for incremental insertion.
pub(crate) fn best_against(source: &Vertex, out: &QueryTriplet, targets: &[&Vertex]) -> Result<Option<Edge>> {
    let mut best: Option<Edge> = None;
    for t in targets.iter().filter(|t| t.id() != source.id()) {
        for inc in &t.in_triplets {
            let score = hybrid_sim(out, inc)?;
            if best.as_ref().is_none_or(|b| beats(score, t.id(), inc.ordinal, b)) {
                best = Some(make_edge(source, out, t, inc, score));
            }
        }
    }
    Ok(best)
}

fn retention_cmp(a: &Edge, b: &Edge) -> Ordering {
    b.sim_score.total_cmp(&a.sim_score).then_with(|| a.canonical_cmp(b))
}

/// Drops edges whose source, target, question, keywords and embedding all
/// equal an earlier edge, keeping the highest-scoring copy.
pub fn dedup_edges(mut edges: Vec<Edge>) -> Vec<Edge> {
    edges.sort_by(retention_cmp);
    let mut kept: BTreeMap<(String, String), Vec<Edge>> = BTreeMap::new();
    let mut out = Vec::with_capacity(edges.len());
    for e in edges {
        let bucket = kept.entry((e.source_id.clone(), e.target_id.clone())).or_default();
        if bucket.iter().any(|k| k.same_features(&e)) {
            continue;
        }
        bucket.push(e.clone());
        out.push(e);
    }
    out
}

/// Keeps the `cap` highest-scoring edges, ties by canonical edge order.
/// The result is in retention order.
pub fn cap_edges(mut edges: Vec<Edge>, cap: usize) -> Vec<Edge> {
    edges.sort_by(retention_cmp);
    edges.truncate(cap);
    edges
}

/// Deduplicates and caps candidate edges for a graph of `n_vertices`.
pub fn retain_edges(candidates: &[Edge], n_vertices: usize, rule: EdgeCapRule) -> Vec<Edge> {
    cap_edges(dedup_edges(candidates.to_vec()), rule.cap(n_vertices))
}
