//! Subcommand implementations.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hopgraph::evalkit::{self, EvalReport, SettingReport};
use hopgraph::indexer::{self, load_corpus, plan_build};
use hopgraph::providers::{ChatExchange, ExchangeLog, LoggedChat, Providers};
use hopgraph::storage::{self, BuildMetadata, GraphArchive};
use hopgraph::{IndexConfig, PassageGraph, PromptTemplates, ReasonerMode, Retriever, TraversalParams, TraversalTrace};
use serde::Serialize;

use crate::config::AppConfig;
use crate::error::{CliError, CliResult};
use crate::{BuildArgs, EvalArgs, QueryArgs, StatsArgs};

fn other(e: impl std::fmt::Display) -> CliError {
    CliError::Other(e.to_string())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(other)?;
    text.push('\n');
    write_text(path, &text)
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Storage(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Storage(format!("{}: {e}", path.display())))
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(other)?;
    writeln!(out, "{text}").map_err(other)
}

fn load_archive(path: &Path) -> CliResult<GraphArchive> {
    if !path.is_file() {
        return Err(CliError::Storage(format!("graph archive {} not found", path.display())));
    }
    storage::load(path).map_err(|e| CliError::classify(e, CliError::Storage))
}

fn graph_path(flag: Option<PathBuf>, cfg: &AppConfig) -> CliResult<PathBuf> {
    flag.or_else(|| cfg.paths.graph.clone())
        .ok_or_else(|| CliError::Config("no graph archive given (use --graph or paths.graph)".into()))
}

/// Wraps the chat model so every exchange is recorded.
fn with_exchange_log(providers: Providers, log: &Arc<ExchangeLog>) -> Providers {
    match providers.chat.clone() {
        Some(chat) => providers.with_chat(Arc::new(LoggedChat::new(chat, log.clone()))),
        None => providers,
    }
}

fn check_dim(providers: &Providers, graph: &PassageGraph) -> CliResult<()> {
    match providers.embedder.dim() {
        Some(d) if d != graph.dim() => Err(CliError::Config(format!(
            "embedder produces {d}-dimensional vectors but the graph uses {}",
            graph.dim()
        ))),
        _ => Ok(()),
    }
}

fn index_config(cfg: &AppConfig, templates: &PromptTemplates) -> IndexConfig {
    IndexConfig {
        templates: templates.clone(),
        ..cfg.index.clone()
    }
}

#[derive(Serialize)]
struct BuildOutput<'a> {
    archive: String,
    fingerprint: String,
    report_path: String,
    report: &'a indexer::IndexReport,
}

pub fn build(cfg: &AppConfig, args: BuildArgs, out: &mut dyn Write) -> CliResult<()> {
    let corpus_path = args
        .corpus
        .or_else(|| cfg.paths.corpus.clone())
        .ok_or_else(|| CliError::Config("no corpus given (use --corpus or paths.corpus)".into()))?;
    let output = graph_path(args.output, cfg)?;
    if !corpus_path.is_file() {
        return Err(CliError::Corpus(format!(
            "cannot read corpus {}",
            corpus_path.display()
        )));
    }
    let corpus = load_corpus(&corpus_path).map_err(|e| CliError::classify(e, CliError::Corpus))?;
    if corpus.is_empty() {
        return Err(CliError::Corpus(format!("corpus {} is empty", corpus_path.display())));
    }
    let templates = cfg.templates()?;
    let index = index_config(cfg, &templates);

    if args.dry_run {
        let plan = plan_build(&corpus, &index);
        if args.json {
            return print_json(out, &plan);
        }
        writeln!(out, "passages           {}", plan.passages).map_err(other)?;
        writeln!(out, "documents          {}", plan.documents).map_err(other)?;
        writeln!(
            out,
            "llm calls          {} to {}",
            plan.min_llm_calls, plan.max_llm_calls
        )
        .map_err(other)?;
        writeln!(out, "embedding calls    at least {}", plan.min_embed_calls).map_err(other)?;
        let cap = plan.edge_cap.map_or_else(|| "unlimited".to_string(), |c| c.to_string());
        writeln!(out, "edge cap           {cap}").map_err(other)?;
        return Ok(());
    }

    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        if !dir.is_dir() {
            return Err(CliError::Storage(format!(
                "output directory {} does not exist",
                dir.display()
            )));
        }
    }
    let mut providers = cfg.providers()?;
    if providers.chat.is_none() {
        return Err(CliError::Config("building a graph requires providers.chat".into()));
    }
    let trace_path = args
        .trace
        .or_else(|| cfg.paths.traces.as_ref().map(|d| d.join("build_exchanges.jsonl")));
    if let Some(path) = &trace_path {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::Storage(e.to_string()))?;
        }
        let log = Arc::new(ExchangeLog::with_mirror(path).map_err(|e| CliError::Storage(e.to_string()))?);
        providers = with_exchange_log(providers, &log);
    }

    let (graph, report) =
        indexer::build_graph(&corpus, &index, &providers).map_err(|e| CliError::classify(e, CliError::Corpus))?;
    let metadata = BuildMetadata {
        embedder: providers.embedder.name(),
        keywords: providers.keywords.name(),
        chat: providers.chat.as_ref().map(|c| c.name()).unwrap_or_default(),
        config_hash: cfg.index_digest(&templates),
        created_unix: BuildMetadata::now_unix(),
    };
    storage::save(&graph, &metadata, &output).map_err(|e| CliError::Storage(e.to_string()))?;

    let report_path = args.report.unwrap_or_else(|| match &cfg.paths.reports {
        Some(dir) => dir.join("build_report.json"),
        None => output.with_extension("report.json"),
    });
    write_json(&report_path, &report)?;

    let fingerprint = graph.fingerprint();
    if args.json {
        return print_json(
            out,
            &BuildOutput {
                archive: output.display().to_string(),
                fingerprint,
                report_path: report_path.display().to_string(),
                report: &report,
            },
        );
    }
    writeln!(out, "archive      {}", output.display()).map_err(other)?;
    writeln!(out, "fingerprint  {fingerprint}").map_err(other)?;
    writeln!(out, "vertices     {}", report.vertex_count).map_err(other)?;
    writeln!(
        out,
        "edges        {} (of {} candidates)",
        report.edge_count, report.candidate_count
    )
    .map_err(other)?;
    writeln!(out, "llm calls    {}", report.llm_calls).map_err(other)?;
    writeln!(out, "failures     {}", report.failures.len()).map_err(other)?;
    for f in &report.failures {
        writeln!(out, "  {}: {}", f.passage_id, f.reason).map_err(other)?;
    }
    writeln!(out, "report       {}", report_path.display()).map_err(other)?;
    Ok(())
}

fn traversal_params(
    cfg: &AppConfig,
    top_k: Option<usize>,
    n_hop: Option<usize>,
    no_llm: bool,
    strict: bool,
) -> CliResult<TraversalParams> {
    let mut p = cfg.traversal;
    if let Some(k) = top_k {
        p.top_k = k;
    }
    if let Some(h) = n_hop {
        p.n_hop = h;
    }
    if no_llm {
        p.mode = ReasonerMode::SimilarityMatch;
    }
    p.strict |= strict;
    if p.top_k == 0 {
        return Err(CliError::Config("top_k must be positive".into()));
    }
    Ok(p)
}

const NO_CHAT: &str = "the LLM reasoner needs providers.chat; pass --no-llm for similarity-only traversal";

/// Trace file written by `query --trace`.
#[derive(Serialize)]
struct QueryTraceFile<'a> {
    trace: &'a TraversalTrace,
    exchanges: Vec<ChatExchange>,
}

#[derive(Serialize)]
struct QueryOutput<'a> {
    query: &'a str,
    llm_calls: usize,
    passages: &'a [hopgraph::traversal::RankedPassage],
}

pub fn query(cfg: &AppConfig, args: QueryArgs, out: &mut dyn Write) -> CliResult<()> {
    let archive = load_archive(&graph_path(args.graph, cfg)?)?;
    let params = traversal_params(cfg, args.top_k, args.n_hop, args.no_llm, args.strict)?;
    let templates = cfg.templates()?;
    let mut providers = cfg.providers()?;
    check_dim(&providers, &archive.graph)?;
    if params.mode == ReasonerMode::Llm && params.n_hop > 0 && providers.chat.is_none() {
        return Err(CliError::Config(NO_CHAT.into()));
    }
    let log = Arc::new(ExchangeLog::new());
    let trace_path = args.trace;
    if trace_path.is_some() {
        providers = with_exchange_log(providers, &log);
    }

    let retriever =
        Retriever::with_templates(&archive.graph, templates).map_err(|e| CliError::Config(e.to_string()))?;
    let trace = retriever
        .retrieve(&args.question, &params, &providers)
        .map_err(|e| CliError::classify(e, other_msg))?;

    if let Some(path) = &trace_path {
        write_json(
            path,
            &QueryTraceFile {
                trace: &trace,
                exchanges: log.snapshot(),
            },
        )?;
    }
    if args.json {
        return print_json(
            out,
            &QueryOutput {
                query: &args.question,
                llm_calls: trace.llm_calls,
                passages: &trace.ranked,
            },
        );
    }
    for w in &trace.warnings {
        tracing::warn!("{w}");
    }
    for (i, p) in trace.ranked.iter().enumerate() {
        writeln!(
            out,
            "{:>2}. [{}] H={:.4} sim={:.4} imp={:.4} visits={}",
            i + 1,
            p.id,
            p.helpfulness,
            p.similarity,
            p.importance,
            p.visits
        )
        .map_err(other)?;
        writeln!(out, "    {}", p.text).map_err(other)?;
    }
    Ok(())
}

fn other_msg(m: String) -> CliError {
    CliError::Other(m)
}

fn setting_file(dir: &Path, s: &SettingReport) -> PathBuf {
    dir.join(format!("setting_k{}_h{}.json", s.top_k, s.n_hop))
}

pub fn eval(cfg: &AppConfig, args: EvalArgs, out: &mut dyn Write) -> CliResult<()> {
    let archive = load_archive(&graph_path(args.graph, cfg)?)?;
    if !args.dataset.is_file() {
        return Err(CliError::Corpus(format!(
            "cannot read dataset {}",
            args.dataset.display()
        )));
    }
    let format = args.format.unwrap_or(cfg.eval.format);
    let dataset = evalkit::load_dataset(&args.dataset, format).map_err(|e| CliError::classify(e, CliError::Corpus))?;

    let mut mode = cfg.traversal.mode;
    if args.no_llm {
        mode = ReasonerMode::SimilarityMatch;
    }
    let config = evalkit::EvalConfig {
        top_k: if args.top_k.is_empty() {
            cfg.eval.top_k.clone()
        } else {
            args.top_k
        },
        n_hop: if args.n_hop.is_empty() {
            cfg.eval.n_hop.clone()
        } else {
            args.n_hop
        },
        mode,
        strict: cfg.traversal.strict || args.strict,
        generate_answers: cfg.eval.generate_answers || args.generate,
        limit: args.limit.or(cfg.eval.limit),
    };
    if config.top_k.is_empty() || config.n_hop.is_empty() || config.top_k.contains(&0) {
        return Err(CliError::Config(
            "top_k and n_hop lists must be non-empty and top_k positive".into(),
        ));
    }
    let templates = cfg.templates()?;
    let providers = cfg.providers()?;
    check_dim(&providers, &archive.graph)?;
    let needs_chat = config.generate_answers || (mode == ReasonerMode::Llm && config.n_hop.iter().any(|&h| h > 0));
    if needs_chat && providers.chat.is_none() {
        return Err(CliError::Config(if config.generate_answers {
            "answer generation needs providers.chat".into()
        } else {
            NO_CHAT.into()
        }));
    }

    let out_dir = args.out_dir.or_else(|| cfg.paths.reports.clone());
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
                mode,
                strict: config.strict,
            };
            let s = evalkit::evaluate_setting(
                &archive.graph,
                &subset,
                &params,
                config.generate_answers,
                &templates,
                &providers,
            )
            .map_err(|e| CliError::classify(e, other_msg))?;
            if let Some(dir) = &out_dir {
                write_json(&setting_file(dir, &s), &s)?;
            }
            settings.push(s);
        }
    }
    let report = EvalReport {
        dataset: dataset.name.clone(),
        graph_fingerprint: archive.graph.fingerprint(),
        settings,
    };
    if let Some(dir) = &out_dir {
        write_json(&dir.join("report.json"), &report)?;
        write_text(&dir.join("report.txt"), &report.to_string())?;
    }
    if args.json {
        return print_json(out, &report);
    }
    write!(out, "{report}").map_err(other)
}

pub fn stats(cfg: &AppConfig, args: StatsArgs, out: &mut dyn Write) -> CliResult<()> {
    let archive = load_archive(&graph_path(args.graph, cfg)?)?;
    let stats = storage::stats(&archive.graph);
    if args.json {
        return print_json(out, &stats);
    }
    writeln!(out, "{stats}").map_err(other)?;
    writeln!(out, "{:<22}{}", "fingerprint", archive.graph.fingerprint()).map_err(other)?;
    writeln!(out, "{:<22}{}", "embedder", archive.metadata.embedder).map_err(other)?;
    writeln!(out, "{:<22}{}", "chat model", archive.metadata.chat).map_err(other)?;
    Ok(())
}
