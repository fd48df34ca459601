//! Offline graph construction: question simulation, feature extraction,
//! edge merging and edge capping.

mod corpus;
mod merge;
mod simulate;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::PassageGraph;
use crate::model::{Direction, Edge, Passage, QueryTriplet, Vertex};
use crate::prompts::PromptTemplates;
use crate::providers::Providers;

pub use corpus::{load_corpus, parse_corpus};
pub use merge::{cap_edges, dedup_edges, merge_edges, retain_edges};
pub use simulate::{parse_questions, simulate_queries, Simulation};

/// Upper bound on the number of retained edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeCapRule {
    /// `n * ceil(log2 n)` for `n` vertices.
    #[default]
    #[serde(rename = "nlogn")]
    NLogN,
    Fixed(usize),
    Unlimited,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndexConfig {
    pub min_in_questions: usize,
    pub min_out_questions: usize,
    /// Questions beyond this count are dropped, per direction.
    pub max_questions: Option<usize>,
    pub edge_cap: EdgeCapRule,
    /// Extra prompts allowed per direction when output falls short.
    pub retry_limit: usize,
    /// Worker threads for per-passage work; 0 uses all cores.
    pub workers: usize,
    /// In-coming pools larger than this use the approximate search.
    pub exact_search_limit: usize,
    pub prefilter_candidates: usize,
    #[serde(skip)]
    pub templates: PromptTemplates,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            min_in_questions: 2,
            min_out_questions: 4,
            max_questions: None,
            edge_cap: EdgeCapRule::NLogN,
            retry_limit: 2,
            workers: 0,
            exact_search_limit: 50_000,
            prefilter_candidates: 64,
            templates: PromptTemplates::default(),
        }
    }
}

impl IndexConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_in_questions == 0 || self.min_out_questions == 0 {
            return Err(Error::InvalidInput("question minimums must be positive".into()));
        }
        if let Some(max) = self.max_questions {
            if max < self.min_in_questions.max(self.min_out_questions) {
                return Err(Error::InvalidInput(format!(
                    "max_questions {max} is below the configured minimums"
                )));
            }
        }
        if self.prefilter_candidates == 0 {
            return Err(Error::InvalidInput("prefilter_candidates must be positive".into()));
        }
        self.templates.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexFailure {
    pub passage_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionCount {
    pub out_coming: usize,
    pub in_coming: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    /// Best matches before deduplication and capping.
    pub candidate_count: usize,
    pub edge_cap: Option<usize>,
    pub avg_out_degree: f64,
    pub question_counts: BTreeMap<String, QuestionCount>,
    pub llm_calls: usize,
    /// Passages excluded from the graph.
    pub failures: Vec<IndexFailure>,
    pub warnings: Vec<String>,
}

/// Cost estimate for a build, computed without calling any provider.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildPlan {
    pub passages: usize,
    pub documents: usize,
    pub min_llm_calls: usize,
    pub max_llm_calls: usize,
    /// Embedding calls when every passage yields exactly the minimum.
    pub min_embed_calls: usize,
    pub edge_cap: Option<usize>,
}

pub fn plan_build(corpus: &[Passage], config: &IndexConfig) -> BuildPlan {
    let n = corpus.len();
    let documents = corpus.iter().map(|p| p.doc_id.as_str()).collect::<BTreeSet<_>>().len();
    let cap = config.edge_cap.cap(n);
    BuildPlan {
        passages: n,
        documents,
        min_llm_calls: 2 * n,
        max_llm_calls: 2 * n * (1 + config.retry_limit),
        min_embed_calls: n * (1 + config.min_in_questions + config.min_out_questions),
        edge_cap: (cap != usize::MAX).then_some(cap),
    }
}

/// Extracts keywords and embeds each question.
pub fn build_triplets(
    passage_id: &str,
    questions: &[String],
    direction: Direction,
    providers: &Providers,
) -> Result<Vec<QueryTriplet>> {
    questions
        .iter()
        .enumerate()
        .map(|(ordinal, q)| {
            let embedding = providers
                .embedder
                .embed(q)
                .map_err(|e| Error::provider(passage_id, e))?;
            Ok(QueryTriplet {
                question: q.clone(),
                keywords: providers.keywords.extract(q),
                embedding,
                direction,
                ordinal,
            })
        })
        .collect()
}

struct Indexed {
    vertex: Vertex,
    llm_calls: usize,
    issues: Vec<String>,
}

fn index_passage(passage: &Passage, config: &IndexConfig, providers: &Providers) -> Result<Indexed> {
    let chat = providers.chat().map_err(|e| Error::provider(&passage.id, e))?;
    let sim = simulate_queries(passage, chat, config)?;
    let passage_embedding = providers
        .embedder
        .embed(&passage.text)
        .map_err(|e| Error::provider(&passage.id, e))?;
    let vertex = Vertex {
        passage: passage.clone(),
        out_triplets: build_triplets(&passage.id, &sim.out_questions, Direction::OutComing, providers)?,
        in_triplets: build_triplets(&passage.id, &sim.in_questions, Direction::InComing, providers)?,
        passage_keywords: providers.keywords.extract(&passage.text),
        passage_embedding,
    };
    Ok(Indexed {
        vertex,
        llm_calls: sim.llm_calls,
        issues: sim.issues,
    })
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))
}

fn question_count(v: &Vertex) -> QuestionCount {
    QuestionCount {
        out_coming: v.out_triplets.len(),
        in_coming: v.in_triplets.len(),
    }
}

/// Builds a passage graph from a corpus.
///
/// Passages whose simulation or provider calls fail are reported and left
/// out; the build fails only if no passage could be indexed.
pub fn build_graph(
    corpus: &[Passage],
    config: &IndexConfig,
    providers: &Providers,
) -> Result<(PassageGraph, IndexReport)> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::InvalidInput("corpus is empty".into()));
    }
    let mut seen = BTreeSet::new();
    for p in corpus {
        p.validate()?;
        if !seen.insert(p.id.as_str()) {
            return Err(Error::IdConflict(p.id.clone()));
        }
    }

    let results: Vec<Result<Indexed>> = thread_pool(config.workers)?
        .install(|| corpus.par_iter().map(|p| index_passage(p, config, providers)).collect());

    let mut report = IndexReport::default();
    let mut indexed = Vec::new();
    for (p, r) in corpus.iter().zip(results) {
        match r {
            Ok(ix) => indexed.push(ix),
            Err(e) => {
                tracing::warn!(passage = %p.id, "passage excluded: {e}");
                report.failures.push(IndexFailure {
                    passage_id: p.id.clone(),
                    reason: e.to_string(),
                });
            }
        }
    }
    let Some(first) = indexed.first() else {
        return Err(Error::EmptyIndex {
            failures: report.failures.len(),
        });
    };
    let dim = providers
        .embedder
        .dim()
        .unwrap_or_else(|| first.vertex.passage_embedding.dim());

    let mut graph = PassageGraph::new(dim);
    for ix in indexed {
        report.llm_calls += ix.llm_calls;
        let id = ix.vertex.id().to_string();
        for issue in ix.issues {
            report.warnings.push(format!("{id}: {issue}"));
        }
        let counts = question_count(&ix.vertex);
        match graph.insert_vertex(ix.vertex) {
            Ok(()) => {
                report.question_counts.insert(id, counts);
            }
            Err(e) => report.failures.push(IndexFailure {
                passage_id: id,
                reason: e.to_string(),
            }),
        }
    }
    if graph.vertex_count() == 0 {
        return Err(Error::EmptyIndex {
            failures: report.failures.len(),
        });
    }
    if graph.vertex_count() == 1 {
        report
            .warnings
            .push("graph has a single vertex and therefore no edges".into());
    }

    let vertices: Vec<&Vertex> = graph.vertices().collect();
    let candidates = thread_pool(config.workers)?.install(|| merge_edges(&vertices, config))?;
    relink(&mut graph, candidates, config.edge_cap);
    fill_report(&graph, &mut report);
    Ok((graph, report))
}

fn relink(graph: &mut PassageGraph, candidates: Vec<Edge>, rule: EdgeCapRule) {
    let n = graph.vertex_count();
    let retained = retain_edges(&candidates, n, rule);
    graph.set_edges(candidates, retained, rule.cap(n));
}

fn fill_report(graph: &PassageGraph, report: &mut IndexReport) {
    report.vertex_count = graph.vertex_count();
    report.edge_count = graph.edge_count();
    report.candidate_count = graph.candidates().len();
    report.edge_cap = (graph.edge_cap() != usize::MAX).then_some(graph.edge_cap());
    report.avg_out_degree = if graph.vertex_count() == 0 {
        0.0
    } else {
        graph.edge_count() as f64 / graph.vertex_count() as f64
    };
}

/// Outcome of [`add_passage`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AddReport {
    pub passage_id: String,
    pub questions: QuestionCount,
    pub llm_calls: usize,
    pub edge_count: usize,
    pub warnings: Vec<String>,
}

/// Inserts one passage into an existing graph.
///
/// Existing out-coming triplets are re-matched against the new passage's
/// in-coming triplets and the new out-coming triplets are matched against
/// the whole graph, so the result equals a batch build over the union.
pub fn add_passage(
    graph: &mut PassageGraph,
    passage: &Passage,
    config: &IndexConfig,
    providers: &Providers,
) -> Result<AddReport> {
    config.validate()?;
    passage.validate()?;
    if graph.contains(&passage.id) {
        return Err(Error::IdConflict(passage.id.clone()));
    }
    let ix = index_passage(passage, config, providers)?;
    ix.vertex.check_dim(graph.dim())?;
    let new = &ix.vertex;

    let mut by_slot: BTreeMap<(String, usize), Edge> = graph
        .candidates()
        .iter()
        .map(|e| ((e.source_id.clone(), e.out_ordinal), e.clone()))
        .collect();
    for v in graph.vertices() {
        for out in &v.out_triplets {
            let slot = (v.id().to_string(), out.ordinal);
            if let Some(challenger) = merge::best_against(v, out, &[new])? {
                match by_slot.get(&slot) {
                    Some(current)
                        if !merge::beats(
                            challenger.sim_score,
                            &challenger.target_id,
                            challenger.in_ordinal,
                            current,
                        ) => {}
                    _ => {
                        by_slot.insert(slot, challenger);
                    }
                }
            }
        }
    }
    let existing: Vec<&Vertex> = graph.vertices().collect();
    for out in &new.out_triplets {
        if let Some(e) = merge::best_against(new, out, &existing)? {
            by_slot.insert((new.id().to_string(), out.ordinal), e);
        }
    }

    let questions = question_count(new);
    let warnings = ix.issues.iter().map(|i| format!("{}: {i}", passage.id)).collect();
    graph.insert_vertex(ix.vertex)?;
    relink(graph, by_slot.into_values().collect(), config.edge_cap);
    Ok(AddReport {
        passage_id: passage.id.clone(),
        questions,
        llm_calls: ix.llm_calls,
        edge_count: graph.edge_count(),
        warnings,
    })
}
