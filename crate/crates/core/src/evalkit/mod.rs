//! Evaluation harness: datasets, metrics and parameter sweeps.

mod dataset;
mod metrics;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::PassageGraph;
use crate::prompts::PromptTemplates;
use crate::providers::Providers;
use crate::traversal::{encode_query, ReasonerMode, Retriever, TraversalParams};

pub use dataset::{load_dataset, parse_dataset, Dataset, DatasetFormat, EvalExample};
pub use metrics::{answer_f1, exact_match, normalize_answer, retrieval_prf, token_f1, Prf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    /// Every (top_k, n_hop) pair is evaluated.
    pub top_k: Vec<usize>,
    pub n_hop: Vec<usize>,
    pub mode: ReasonerMode,
    pub strict: bool,
    /// Generate answers and score them with EM and F1.
    pub generate_answers: bool,
    /// Evaluate only the first `limit` examples.
    pub limit: Option<usize>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            top_k: vec![20],
            n_hop: vec![4],
            mode: ReasonerMode::Llm,
            strict: false,
            generate_answers: false,
            limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleResult {
    pub id: String,
    pub retrieved: Vec<String>,
    pub retrieval: Prf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_match: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answer_f1: Option<f64>,
    /// Reasoner calls plus the answer call, if any.
    pub llm_calls: usize,
    /// Provider failure recorded while generating the answer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingReport {
    pub top_k: usize,
    pub n_hop: usize,
    pub mode: ReasonerMode,
    pub examples: usize,
    /// Macro averages over examples.
    pub retrieval: Prf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_match: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answer_f1: Option<f64>,
    pub llm_calls: usize,
    pub avg_llm_calls: f64,
    pub per_example: Vec<ExampleResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub graph_fingerprint: String,
    pub settings: Vec<SettingReport>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn evaluate_example(
    retriever: &Retriever<'_>,
    example: &EvalExample,
    params: &TraversalParams,
    generate: bool,
    templates: &PromptTemplates,
    providers: &Providers,
) -> Result<ExampleResult> {
    let query = encode_query(&example.question, providers)?;
    let chat = providers.chat.as_deref();
    if chat.is_none() && params.mode == ReasonerMode::Llm && params.n_hop > 0 {
        return Err(Error::InvalidInput(
            "LLM reasoner selected but no chat model configured".into(),
        ));
    }
    let trace = retriever.retrieve_encoded(&query, params, chat)?;
    let retrieved: Vec<String> = trace.ranked.iter().map(|r| r.id.clone()).collect();
    let retrieval = retrieval_prf(&retrieved, &example.supporting)?;
    let mut result = ExampleResult {
        id: example.id.clone(),
        retrieved,
        retrieval,
        answer: None,
        exact_match: None,
        answer_f1: None,
        llm_calls: trace.llm_calls,
        error: None,
    };
    if generate && !example.answers.is_empty() {
        let chat = providers.chat().map_err(|e| Error::provider("answer generation", e))?;
        let texts: Vec<&str> = trace.ranked.iter().map(|r| r.text.as_str()).collect();
        let prompt = templates.render_answer(&example.question, &texts);
        result.llm_calls += 1;
        let answer = match chat.chat(&prompt) {
            Ok(a) => a.trim().to_string(),
            Err(e) => {
                tracing::warn!(example = %example.id, "answer generation failed: {e}");
                result.error = Some(e.to_string());
                String::new()
            }
        };
        result.exact_match = Some(exact_match(&answer, &example.answers)?);
        result.answer_f1 = Some(answer_f1(&answer, &example.answers)?);
        result.answer = Some(answer);
    }
    Ok(result)
}

/// Runs one retrieval setting over the dataset.
pub fn evaluate_setting(
    graph: &PassageGraph,
    dataset: &Dataset,
    params: &TraversalParams,
    generate_answers: bool,
    templates: &PromptTemplates,
    providers: &Providers,
) -> Result<SettingReport> {
    let retriever = Retriever::with_templates(graph, templates.clone())?;
    let per_example: Vec<ExampleResult> = dataset
        .examples
        .par_iter()
        .map(|ex| evaluate_example(&retriever, ex, params, generate_answers, templates, providers))
        .collect::<Result<_>>()?;
    let n = per_example.len();
    let retrieval = Prf {
        precision: mean(per_example.iter().map(|r| r.retrieval.precision)).unwrap_or(0.0),
        recall: mean(per_example.iter().map(|r| r.retrieval.recall)).unwrap_or(0.0),
        f1: mean(per_example.iter().map(|r| r.retrieval.f1)).unwrap_or(0.0),
    };
    let llm_calls: usize = per_example.iter().map(|r| r.llm_calls).sum();
    Ok(SettingReport {
        top_k: params.top_k,
        n_hop: params.n_hop,
        mode: params.mode,
        examples: n,
        retrieval,
        exact_match: mean(per_example.iter().filter_map(|r| r.exact_match)),
        answer_f1: mean(per_example.iter().filter_map(|r| r.answer_f1)),
        llm_calls,
        avg_llm_calls: if n == 0 { 0.0 } else { llm_calls as f64 / n as f64 },
        per_example,
    })
}

/// Evaluates every configured (top_k, n_hop) setting. Graph vertices are
/// matched to supporting passages by id.
pub fn run_eval(
    graph: &PassageGraph,
    dataset: &Dataset,
    config: &EvalConfig,
    templates: &PromptTemplates,
    providers: &Providers,
) -> Result<EvalReport> {
    if config.top_k.is_empty() || config.n_hop.is_empty() {
        return Err(Error::EvalInput("sweep needs at least one top_k and one n_hop".into()));
    }
    if config.top_k.contains(&0) {
        return Err(Error::EvalInput("top_k must be positive".into()));
    }
    let mut subset = dataset.clone();
    if let Some(limit) = config.limit {
        subset.examples.truncate(limit);
    }
    let mut settings = Vec::new();
    for &top_k in &config.top_k {
        for &n_hop in &config.n_hop {
            let params = TraversalParams {
                top_k,
                n_hop,
                mode: config.mode,
                strict: config.strict,
            };
            settings.push(evaluate_setting(
                graph,
                &subset,
                &params,
                config.generate_answers,
                templates,
                providers,
            )?);
        }
    }
    Ok(EvalReport {
        dataset: dataset.name.clone(),
        graph_fingerprint: graph.fingerprint(),
        settings,
    })
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "dataset: {}  graph: {}",
            self.dataset,
            &self.graph_fingerprint[..12.min(self.graph_fingerprint.len())]
        )?;
        writeln!(
            f,
            "{:>6} {:>6} {:>9} {:>9} {:>9} {:>7} {:>7} {:>9} {:>10}",
            "top_k", "n_hop", "precision", "recall", "f1", "em", "ans_f1", "llm_calls", "calls/q"
        )?;
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        for s in &self.settings {
            writeln!(
                f,
                "{:>6} {:>6} {:>9.4} {:>9.4} {:>9.4} {:>7} {:>7} {:>9} {:>10.2}",
                s.top_k,
                s.n_hop,
                s.retrieval.precision,
                s.retrieval.recall,
                s.retrieval.f1,
                opt(s.exact_match),
                opt(s.answer_f1),
                s.llm_calls,
                s.avg_llm_calls
            )?;
        }
        Ok(())
    }
}
