//! Seeded fixture generators shared by the integration tests.

#![allow(dead_code)]

use hopgraph::{Direction, Edge, Embedding, Keywords, Passage, PassageGraph, QueryTriplet, Vertex};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub const DIM: usize = 3;
const TERMS: &[&str] = &["alpha", "beta", "gamma", "delta"];

pub fn kw(terms: &[&str]) -> Keywords {
    Keywords::new(terms.iter().copied())
}

pub fn emb(values: &[f64]) -> Embedding {
    Embedding::new(values.to_vec()).unwrap()
}

pub fn keywords(rng: &mut StdRng) -> Keywords {
    let n = rng.gen_range(0..=2);
    Keywords::new(TERMS.choose_multiple(rng, n).copied())
}

pub fn embedding(rng: &mut StdRng) -> Embedding {
    Embedding::new((0..DIM).map(|_| f64::from(rng.gen_range(0u8..=2))).collect()).unwrap()
}

pub fn triplet(
    question: &str,
    keywords: Keywords,
    embedding: Embedding,
    direction: Direction,
    ordinal: usize,
) -> QueryTriplet {
    QueryTriplet {
        question: question.into(),
        keywords,
        embedding,
        direction,
        ordinal,
    }
}

pub fn vertex(id: &str, keywords: Keywords, embedding: Embedding) -> Vertex {
    Vertex {
        passage: Passage::new(id, format!("passage {id}"), "doc").unwrap(),
        out_triplets: vec![],
        in_triplets: vec![],
        passage_keywords: keywords,
        passage_embedding: embedding,
    }
}

pub fn edge(source: &str, target: &str, keywords: Keywords, embedding: Embedding, out_ordinal: usize) -> Edge {
    Edge {
        source_id: source.into(),
        target_id: target.into(),
        question: format!("{source} to {target}?"),
        keywords,
        embedding,
        sim_score: 0.5,
        out_ordinal,
        in_ordinal: 0,
    }
}

/// Up to `max` vertices with random features and up to three random
/// out-edges each, inserted directly.
pub fn random_graph(rng: &mut StdRng, max: usize) -> PassageGraph {
    let n = rng.gen_range(1..=max);
    let ids: Vec<String> = (0..n).map(|i| format!("v{i:02}")).collect();
    let mut g = PassageGraph::new(DIM);
    for id in &ids {
        let mut v = vertex(id, keywords(rng), embedding(rng));
        for ordinal in 0..rng.gen_range(0..=2) {
            v.out_triplets.push(triplet(
                "Out?",
                keywords(rng),
                embedding(rng),
                Direction::OutComing,
                ordinal,
            ));
            v.in_triplets.push(triplet(
                "In?",
                keywords(rng),
                embedding(rng),
                Direction::InComing,
                ordinal,
            ));
        }
        g.insert_vertex(v).unwrap();
    }
    if n < 2 {
        return g;
    }
    for source in &ids {
        for out_ordinal in 0..rng.gen_range(0..=3) {
            let target = loop {
                let t = ids.choose(rng).unwrap();
                if t != source {
                    break t;
                }
            };
            let mut e = edge(source, target, keywords(rng), embedding(rng), out_ordinal);
            e.sim_score = rng.gen_range(0.0..1.0);
            g.insert_edge(e).unwrap();
        }
    }
    g
}
