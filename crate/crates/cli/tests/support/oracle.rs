//! Brute-force reference implementations written directly from the scoring
//! definitions, without the library's indexes or data structures.
//!
//! Floating-point expressions mirror the definitions term by term so the
//! results can be compared bit for bit.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use hopgraph::{Edge, Embedding, Keywords, PassageGraph, Vertex};

fn jaccard(a: &Keywords, b: &Keywords) -> f64 {
    let a: BTreeSet<&str> = a.iter().collect();
    let b: BTreeSet<&str> = b.iter().collect();
    let inter = a.intersection(&b).count();
    let union = a.union(&b).count();
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

fn cosine(a: &Embedding, b: &Embedding) -> f64 {
    let (a, b) = (a.values(), b.values());
    let mut dot = 0.0;
    for i in 0..a.len() {
        dot += a[i] * b[i];
    }
    let mut aa = 0.0;
    for x in a {
        aa += x * x;
    }
    let mut bb = 0.0;
    for x in b {
        bb += x * x;
    }
    let (na, nb) = (f64::sqrt(aa), f64::sqrt(bb));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(0.0, 1.0)
}

pub fn sim(ka: &Keywords, ea: &Embedding, kb: &Keywords, eb: &Embedding) -> f64 {
    (jaccard(ka, kb) + cosine(ea, eb)) / 2.0
}

fn edge_key(e: &Edge) -> (String, String, usize, usize) {
    (e.source_id.clone(), e.target_id.clone(), e.out_ordinal, e.in_ordinal)
}

/// Every out-coming triplet against every in-coming triplet of every other
/// vertex; the strict maximum wins, ties by (vertex id, ordinal).
pub fn merge(vertices: &[Vertex]) -> Vec<Edge> {
    let mut sorted: Vec<&Vertex> = vertices.iter().collect();
    sorted.sort_by(|a, b| a.passage.id.cmp(&b.passage.id));
    let mut out = Vec::new();
    for s in &sorted {
        let mut outs: Vec<_> = s.out_triplets.iter().collect();
        outs.sort_by_key(|t| t.ordinal);
        for o in outs {
            let mut best: Option<(f64, &Vertex, &hopgraph::QueryTriplet)> = None;
            for t in sorted.iter().filter(|t| t.passage.id != s.passage.id) {
                let mut ins: Vec<_> = t.in_triplets.iter().collect();
                ins.sort_by_key(|x| x.ordinal);
                for i in ins {
                    let score = sim(&o.keywords, &o.embedding, &i.keywords, &i.embedding);
                    if best.is_none_or(|(b, _, _)| score > b) {
                        best = Some((score, t, i));
                    }
                }
            }
            if let Some((score, t, i)) = best {
                out.push(Edge {
                    source_id: s.passage.id.clone(),
                    target_id: t.passage.id.clone(),
                    question: i.question.clone(),
                    keywords: i.keywords.iter().chain(o.keywords.iter()).collect(),
                    embedding: i.embedding.clone(),
                    sim_score: score,
                    out_ordinal: o.ordinal,
                    in_ordinal: i.ordinal,
                });
            }
        }
    }
    out
}

fn by_score_then_key(a: &Edge, b: &Edge) -> Ordering {
    b.sim_score
        .partial_cmp(&a.sim_score)
        .unwrap()
        .then_with(|| edge_key(a).cmp(&edge_key(b)))
}

/// Keeps the best copy of each identical-feature edge, then the `cap` best
/// edges overall. Returned in (source, target, out, in) order.
pub fn retain(candidates: &[Edge], cap: usize) -> Vec<Edge> {
    type FeatureKey = (String, String, String, Vec<String>, Vec<u64>);
    let mut best: BTreeMap<FeatureKey, Edge> = BTreeMap::new();
    for e in candidates {
        let key = (
            e.source_id.clone(),
            e.target_id.clone(),
            e.question.clone(),
            e.keywords.iter().map(str::to_string).collect(),
            e.embedding.values().iter().map(|v| v.to_bits()).collect(),
        );
        match best.get(&key) {
            Some(cur) if by_score_then_key(cur, e) != Ordering::Greater => {}
            _ => {
                best.insert(key, e.clone());
            }
        }
    }
    let mut kept: Vec<Edge> = best.into_values().collect();
    kept.sort_by(by_score_then_key);
    kept.truncate(cap);
    kept.sort_by_key(edge_key);
    kept
}

pub fn cap_for(n: usize) -> usize {
    if n <= 1 {
        return 0;
    }
    let mut log = 0;
    while (1usize << log) < n {
        log += 1;
    }
    n * log
}

/// Result of the reference walk.
#[derive(Debug, PartialEq)]
pub struct Walk {
    pub counts: BTreeMap<String, u64>,
    /// (id, helpfulness) in rank order.
    pub ranked: Vec<(String, f64)>,
}

/// Seeds from the best edges, similarity-argmax hops, helpfulness pruning.
pub fn walk(g: &PassageGraph, qk: &Keywords, qe: &Embedding, top_k: usize, n_hop: usize) -> Walk {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut frontier: Vec<String> = Vec::new();
    let edges: Vec<&Edge> = g.edges().collect();
    if edges.is_empty() {
        let mut vs: Vec<(f64, String)> = g
            .vertices()
            .map(|v| {
                (
                    sim(&v.passage_keywords, &v.passage_embedding, qk, qe),
                    v.passage.id.clone(),
                )
            })
            .collect();
        vs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        for (_, id) in vs.into_iter().take(top_k) {
            *counts.entry(id.clone()).or_default() += 1;
        }
    } else {
        let mut scored: Vec<(f64, &Edge)> = edges
            .iter()
            .map(|e| (sim(&e.keywords, &e.embedding, qk, qe), *e))
            .collect();
        scored.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap()
                .then_with(|| edge_key(a.1).cmp(&edge_key(b.1)))
        });
        for (_, e) in scored.into_iter().take(top_k) {
            *counts.entry(e.target_id.clone()).or_default() += 1;
            if !frontier.contains(&e.target_id) {
                frontier.push(e.target_id.clone());
            }
        }
    }
    for _ in 0..n_hop {
        let mut next = Vec::new();
        for v in &frontier {
            let mut outs: Vec<&Edge> = edges.iter().copied().filter(|e| &e.source_id == v).collect();
            outs.sort_by_key(|e| edge_key(e));
            let mut best: Option<(f64, &Edge)> = None;
            for e in outs {
                let s = sim(&e.keywords, &e.embedding, qk, qe);
                if best.is_none_or(|(b, _)| s > b) {
                    best = Some((s, e));
                }
            }
            if let Some((_, e)) = best {
                let t = e.target_id.clone();
                if let Some(c) = counts.get_mut(&t) {
                    *c += 1;
                } else {
                    counts.insert(t.clone(), 1);
                    next.push(t);
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    let total: u64 = counts.values().sum();
    let mut ranked: Vec<(String, f64)> = counts
        .iter()
        .map(|(id, c)| {
            let v = g.vertex(id).unwrap();
            let s = sim(&v.passage_keywords, &v.passage_embedding, qk, qe);
            (id.clone(), (s + *c as f64 / total as f64) / 2.0)
        })
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    ranked.truncate(top_k);
    Walk { counts, ranked }
}
