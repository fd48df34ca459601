//! Online retrieval: seed selection, reasoner-guided hops and pruning.
//!
//! Retrieval runs in three stages. Seeds are the targets of the edges most
//! similar to the query. Each round, every frontier vertex picks at most one
//! out-edge; newly reached vertices form the next frontier and revisits only
//! raise their visit count. Finally every visited vertex is ranked by
//! helpfulness and the top `top_k` are returned.

mod reason;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::PassageGraph;
use crate::model::{Edge, Embedding, Features, Keywords, VisitCounter};
use crate::prompts::PromptTemplates;
use crate::providers::{ChatModel, Providers};
use crate::similarity::{helpfulness, hybrid_sim, importance};
use crate::storage::{EdgeIndex, VertexIndex};

pub use reason::{parse_choice, Choice, Verdict};

/// A query with its extracted features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRepr {
    pub raw: String,
    pub keywords: Keywords,
    pub embedding: Embedding,
}

impl Features for QueryRepr {
    fn keywords(&self) -> &Keywords {
        &self.keywords
    }
    fn embedding(&self) -> &Embedding {
        &self.embedding
    }
}

pub fn encode_query(text: &str, providers: &Providers) -> Result<QueryRepr> {
    if text.trim().is_empty() {
        return Err(Error::InvalidInput("query is empty".into()));
    }
    let embedding = providers
        .embedder
        .embed(text)
        .map_err(|e| Error::provider("query", e))?;
    Ok(QueryRepr {
        raw: text.to_string(),
        keywords: providers.keywords.extract(text),
        embedding,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasonerMode {
    /// Ask the chat model which out-edge to follow.
    #[default]
    Llm,
    /// Follow the out-edge most similar to the query.
    SimilarityMatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TraversalParams {
    pub top_k: usize,
    pub n_hop: usize,
    pub mode: ReasonerMode,
    /// Follow the most similar edge when the reasoner answers `none`.
    pub strict: bool,
}

impl Default for TraversalParams {
    fn default() -> Self {
        TraversalParams {
            top_k: 20,
            n_hop: 4,
            mode: ReasonerMode::Llm,
            strict: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub vertex_id: String,
    /// The matched edge, absent when seeding from vertices of an edgeless graph.
    pub via: Option<EdgeRef>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRef {
    pub source_id: String,
    pub target_id: String,
    pub question: String,
}

impl From<&Edge> for EdgeRef {
    fn from(e: &Edge) -> Self {
        EdgeRef {
            source_id: e.source_id.clone(),
            target_id: e.target_id.clone(),
            question: e.question.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopCandidate {
    pub target_id: String,
    pub question: String,
    pub score: f64,
}

/// One vertex's decision in one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hop {
    pub from: String,
    pub to: Option<String>,
    pub verdict: Verdict,
    pub candidates: Vec<HopCandidate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    pub llm_calls: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub frontier: Vec<String>,
    pub hops: Vec<Hop>,
    /// Vertices reached for the first time in this round.
    pub discovered: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPassage {
    pub id: String,
    pub text: String,
    pub helpfulness: f64,
    pub similarity: f64,
    pub importance: f64,
    pub visits: u64,
}

/// Everything that happened during one retrieval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraversalTrace {
    pub query: String,
    pub params: TraversalParams,
    pub seeds: Vec<Seed>,
    pub rounds: Vec<Round>,
    pub counter: VisitCounter,
    pub ranked: Vec<RankedPassage>,
    pub llm_calls: usize,
    pub warnings: Vec<String>,
}

impl TraversalTrace {
    pub fn passage_ids(&self) -> Vec<&str> {
        self.ranked.iter().map(|r| r.id.as_str()).collect()
    }
}

/// Graph plus the search indexes used at query time.
pub struct Retriever<'g> {
    graph: &'g PassageGraph,
    edges: EdgeIndex<'g>,
    vertices: VertexIndex<'g>,
    templates: PromptTemplates,
}

impl<'g> Retriever<'g> {
    pub fn new(graph: &'g PassageGraph) -> Result<Self> {
        Self::with_templates(graph, PromptTemplates::default())
    }

    pub fn with_templates(graph: &'g PassageGraph, templates: PromptTemplates) -> Result<Self> {
        templates.validate()?;
        Ok(Retriever {
            graph,
            edges: EdgeIndex::build(graph)?,
            vertices: VertexIndex::build(graph)?,
            templates,
        })
    }

    pub fn graph(&self) -> &'g PassageGraph {
        self.graph
    }

    /// Targets of the `top_k` edges most similar to the query. On a graph
    /// without edges the `top_k` most similar vertices are used instead.
    pub fn initial_retrieve(&self, query: &QueryRepr, top_k: usize) -> Result<Vec<Seed>> {
        if self.edges.is_empty() {
            return Ok(self
                .vertices
                .score_all(query)?
                .into_iter()
                .take(top_k)
                .map(|(v, score)| Seed {
                    vertex_id: v.id().to_string(),
                    via: None,
                    score,
                })
                .collect());
        }
        Ok(self
            .edges
            .score_all(query)?
            .into_iter()
            .take(top_k)
            .map(|(e, score)| Seed {
                vertex_id: e.target_id.clone(),
                via: Some(e.into()),
                score,
            })
            .collect())
    }

    /// Picks at most one out-edge of `vertex_id` to follow.
    pub fn reason_step(
        &self,
        vertex_id: &str,
        query: &QueryRepr,
        params: &TraversalParams,
        chat: Option<&dyn ChatModel>,
    ) -> Result<Hop> {
        if !self.graph.contains(vertex_id) {
            return Err(Error::Key(vertex_id.to_string()));
        }
        let edges = self.graph.out_edges(vertex_id);
        let mut hop = Hop {
            from: vertex_id.to_string(),
            to: None,
            verdict: Verdict::NoEdges,
            candidates: Vec::with_capacity(edges.len()),
            response: None,
            llm_calls: 0,
        };
        if edges.is_empty() {
            return Ok(hop);
        }
        let mut best = 0;
        for (i, e) in edges.iter().enumerate() {
            let score = hybrid_sim(e, query)?;
            if score > hop.candidates.get(best).map_or(f64::NEG_INFINITY, |c| c.score) {
                best = i;
            }
            hop.candidates.push(HopCandidate {
                target_id: e.target_id.clone(),
                question: e.question.clone(),
                score,
            });
        }
        let fallback = |hop: &mut Hop, reason: String| {
            hop.to = Some(edges[best].target_id.clone());
            hop.verdict = Verdict::Fallback { reason };
        };

        match params.mode {
            ReasonerMode::SimilarityMatch => {
                hop.to = Some(edges[best].target_id.clone());
                hop.verdict = Verdict::Similarity;
            }
            ReasonerMode::Llm => {
                let chat = chat.ok_or_else(|| {
                    Error::provider(
                        vertex_id,
                        crate::providers::ProviderError::NotConfigured("reasoner needs a chat model".into()),
                    )
                })?;
                let questions: Vec<&str> = edges.iter().map(|e| e.question.as_str()).collect();
                let prompt = self.templates.render_reasoning(&query.raw, &questions);
                hop.llm_calls = 1;
                match chat.chat(&prompt) {
                    Err(e) => {
                        tracing::warn!(vertex = vertex_id, "reasoner call failed: {e}");
                        fallback(&mut hop, format!("provider error: {e}"));
                    }
                    Ok(reply) => {
                        match parse_choice(&reply) {
                            Some(Choice::Index(n)) if (1..=edges.len()).contains(&n) => {
                                hop.to = Some(edges[n - 1].target_id.clone());
                                hop.verdict = Verdict::Chosen { index: n - 1 };
                            }
                            Some(Choice::Index(n)) => {
                                fallback(&mut hop, format!("answer {n} outside 1..={}", edges.len()))
                            }
                            Some(Choice::None) if params.strict => fallback(&mut hop, "declined in strict mode".into()),
                            Some(Choice::None) => hop.verdict = Verdict::Declined,
                            None => fallback(&mut hop, "unparseable answer".into()),
                        }
                        hop.response = Some(reply);
                    }
                }
            }
        }
        Ok(hop)
    }

    /// Runs up to `n_hop` rounds from the seeds, updating `counter`.
    pub fn traverse(
        &self,
        frontier: Vec<String>,
        counter: &mut VisitCounter,
        query: &QueryRepr,
        params: &TraversalParams,
        chat: Option<&dyn ChatModel>,
    ) -> Result<Vec<Round>> {
        let mut frontier = frontier;
        let mut rounds = Vec::new();
        for _ in 0..params.n_hop {
            if frontier.is_empty() {
                break;
            }
            let hops: Vec<Hop> = frontier
                .par_iter()
                .map(|v| self.reason_step(v, query, params, chat))
                .collect::<Result<_>>()?;
            let mut discovered = Vec::new();
            for hop in &hops {
                if let Some(t) = &hop.to {
                    if counter.visit(t.clone()) {
                        discovered.push(t.clone());
                    }
                }
            }
            rounds.push(Round {
                frontier: std::mem::take(&mut frontier),
                hops,
                discovered: discovered.clone(),
            });
            frontier = discovered;
        }
        Ok(rounds)
    }

    /// Visited vertices ordered by helpfulness (ties by id), top `top_k`.
    pub fn prune(&self, counter: &VisitCounter, query: &QueryRepr, top_k: usize) -> Result<Vec<RankedPassage>> {
        let mut ranked = counter
            .iter()
            .map(|(id, visits)| {
                let v = self.graph.vertex(id).ok_or_else(|| Error::Key(id.to_string()))?;
                Ok(RankedPassage {
                    id: id.to_string(),
                    text: v.passage.text.clone(),
                    helpfulness: helpfulness(v, query, counter)?,
                    similarity: hybrid_sim(&v.passage_features(), query)?,
                    importance: importance(counter, id)?,
                    visits,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ranked.sort_by(|a, b| b.helpfulness.total_cmp(&a.helpfulness).then_with(|| a.id.cmp(&b.id)));
        ranked.truncate(top_k);
        Ok(ranked)
    }

    /// Full retrieval for an encoded query.
    pub fn retrieve_encoded(
        &self,
        query: &QueryRepr,
        params: &TraversalParams,
        chat: Option<&dyn ChatModel>,
    ) -> Result<TraversalTrace> {
        let mut warnings = Vec::new();
        if self.edges.is_empty() {
            let msg = "graph has no edges; ranking passages by similarity only";
            tracing::warn!("{msg}");
            warnings.push(msg.to_string());
        }
        let seeds = self.initial_retrieve(query, params.top_k)?;
        let counter_ids: Vec<&str> = seeds.iter().map(|s| s.vertex_id.as_str()).collect();
        let mut counter = VisitCounter::from_occurrences(counter_ids.iter().copied());
        let mut frontier: Vec<String> = Vec::new();
        for id in counter_ids {
            if !frontier.iter().any(|f| f == id) {
                frontier.push(id.to_string());
            }
        }
        let rounds = self.traverse(frontier, &mut counter, query, params, chat)?;
        let ranked = self.prune(&counter, query, params.top_k)?;
        for r in &rounds {
            for h in &r.hops {
                if let Verdict::Fallback { reason } = &h.verdict {
                    warnings.push(format!("{}: {reason}", h.from));
                }
            }
        }
        Ok(TraversalTrace {
            query: query.raw.clone(),
            params: *params,
            llm_calls: rounds.iter().flat_map(|r| &r.hops).map(|h| h.llm_calls).sum(),
            seeds,
            rounds,
            counter,
            ranked,
            warnings,
        })
    }

    /// Encodes `query` and retrieves passages for it.
    pub fn retrieve(&self, query: &str, params: &TraversalParams, providers: &Providers) -> Result<TraversalTrace> {
        let q = encode_query(query, providers)?;
        let chat = match params.mode {
            ReasonerMode::Llm if params.n_hop > 0 => {
                Some(providers.chat().map_err(|e| Error::provider("reasoner", e))?)
            }
            _ => providers.chat.as_deref(),
        };
        self.retrieve_encoded(&q, params, chat)
    }
}

/// Convenience wrapper that builds a [`Retriever`] for a single query.
pub fn retrieve(
    graph: &PassageGraph,
    query: &str,
    params: &TraversalParams,
    providers: &Providers,
) -> Result<TraversalTrace> {
    Retriever::new(graph)?.retrieve(query, params, providers)
}
