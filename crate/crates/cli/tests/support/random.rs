//! Seeded generators for vertices, graphs, queries and chat replies.
//!
//! Features are drawn from tiny pools so exact score ties are common.

use std::sync::Arc;

use hopgraph::providers::{fnv1a64, ChatModel, ProviderError};
use hopgraph::{Direction, Edge, Embedding, Keywords, Passage, PassageGraph, QueryTriplet, Vertex};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub const DIM: usize = 3;
const TERMS: &[&str] = &["alpha", "beta", "gamma", "delta"];
const QUESTIONS: &[&str] = &["Who?", "What?", "Where?", "When?"];

pub fn keywords(rng: &mut StdRng) -> Keywords {
    let n = rng.gen_range(0..=2);
    Keywords::new(TERMS.choose_multiple(rng, n).copied())
}

pub fn embedding(rng: &mut StdRng) -> Embedding {
    Embedding::new((0..DIM).map(|_| f64::from(rng.gen_range(0u8..=2))).collect()).unwrap()
}

fn triplets(rng: &mut StdRng, direction: Direction, max: usize) -> Vec<QueryTriplet> {
    (0..rng.gen_range(0..=max))
        .map(|ordinal| QueryTriplet {
            question: QUESTIONS.choose(rng).unwrap().to_string(),
            keywords: keywords(rng),
            embedding: embedding(rng),
            direction,
            ordinal,
        })
        .collect()
}

pub fn vertex(rng: &mut StdRng, id: &str) -> Vertex {
    Vertex {
        passage: Passage::new(id, format!("passage {id}"), "doc").unwrap(),
        out_triplets: triplets(rng, Direction::OutComing, 4),
        in_triplets: triplets(rng, Direction::InComing, 3),
        passage_keywords: keywords(rng),
        passage_embedding: embedding(rng),
    }
}

/// Vertex ids are zero-padded so lexical and numeric order agree.
pub fn vertices(rng: &mut StdRng, max: usize) -> Vec<Vertex> {
    let n = rng.gen_range(2..=max);
    let mut ids: Vec<String> = (0..n).map(|i| format!("v{i:02}")).collect();
    ids.shuffle(rng);
    ids.iter().map(|id| vertex(rng, id)).collect()
}

/// A graph with random edges inserted directly, up to three per source.
pub fn graph(rng: &mut StdRng, max: usize) -> PassageGraph {
    let vs = vertices(rng, max);
    let ids: Vec<String> = vs.iter().map(|v| v.passage.id.clone()).collect();
    let mut g = PassageGraph::new(DIM);
    for v in vs {
        g.insert_vertex(v).unwrap();
    }
    if rng.gen_bool(0.05) {
        return g;
    }
    for source in &ids {
        for out_ordinal in 0..rng.gen_range(0..=3) {
            let target = loop {
                let t = ids.choose(rng).unwrap();
                if t != source {
                    break t.clone();
                }
            };
            g.insert_edge(Edge {
                source_id: source.clone(),
                target_id: target,
                question: QUESTIONS.choose(rng).unwrap().to_string(),
                keywords: keywords(rng),
                embedding: embedding(rng),
                sim_score: rng.gen_range(0.0..1.0),
                out_ordinal,
                in_ordinal: rng.gen_range(0..3),
            })
            .unwrap();
        }
    }
    g
}

/// A reasoner whose reply depends only on the prompt: a valid or invalid
/// index, `none`, or garbage.
pub fn reasoner(salt: u64) -> Arc<dyn ChatModel> {
    Arc::new(move |prompt: &str| -> Result<String, ProviderError> {
        let h = fnv1a64(prompt.as_bytes()) ^ salt;
        Ok(match h % 8 {
            0 => "none".to_string(),
            1 => "no idea".to_string(),
            2 => "0".to_string(),
            n => format!("{}", n - 2),
        })
    })
}

const WORDS: &[&str] = &[
    "river", "castle", "orchard", "engine", "harbor", "lantern", "meadow", "quarry", "violin", "glacier", "tunnel",
    "falcon",
];

/// A random corpus and a chat model that answers question prompts with
/// questions built from words drawn by a prompt-seeded generator.
pub fn corpus(rng: &mut StdRng, max: usize) -> (Vec<Passage>, Arc<dyn ChatModel>) {
    let n = rng.gen_range(2..=max);
    let passages = (0..n)
        .map(|i| {
            let words: Vec<&str> = (0..6).map(|_| *WORDS.choose(rng).unwrap()).collect();
            Passage::new(format!("p{i:02}"), words.join(" "), format!("d{}", i / 3)).unwrap()
        })
        .collect();
    let chat = Arc::new(|prompt: &str| -> Result<String, ProviderError> {
        let mut h = fnv1a64(prompt.as_bytes());
        let mut next = || {
            h ^= h << 13;
            h ^= h >> 7;
            h ^= h << 17;
            h
        };
        let lines: Vec<String> = (0..4 + next() % 3)
            .map(|_| {
                let a = WORDS[(next() % WORDS.len() as u64) as usize];
                let b = WORDS[(next() % WORDS.len() as u64) as usize];
                format!("Where is the {a} near the {b}?")
            })
            .collect();
        Ok(lines.join("\n"))
    });
    (passages, chat)
}
