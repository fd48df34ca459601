//! TOML configuration.
//!
//! ```toml
//! [providers.chat]
//! kind = "scripted"            # none | scripted | echo | openai
//! script = "script.json"
//!
//! [providers.embedding]
//! kind = "hash"                # hash | openai
//! dim = 256
//!
//! [index]
//! min_out_questions = 4
//!
//! [traversal]
//! top_k = 20
//! n_hop = 4
//!
//! [paths]
//! corpus = "corpus.jsonl"
//! graph = "graph.hgra"
//! ```
//!
//! Relative paths are resolved against the directory of the config file.
//! Command-line flags override file values; `HOPGRAPH_CHAT_*` and
//! `HOPGRAPH_EMBED_*` environment variables (`_ENDPOINT`, `_API_KEY`,
//! `_MODEL`) override provider connection settings.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use hopgraph::evalkit::DatasetFormat;
use hopgraph::providers::{
    CachedEmbedder, ChatModel, EchoChat, Embedder, HashEmbedder, OpenAiChat, OpenAiEmbedder, ProviderConfig,
    RuleKeywordExtractor, ScriptedChat,
};
use hopgraph::{IndexConfig, PromptTemplates, Providers, TraversalParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CHAT_ENV_PREFIX: &str = "HOPGRAPH_CHAT";
pub const EMBED_ENV_PREFIX: &str = "HOPGRAPH_EMBED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChatSection {
    #[default]
    None,
    Scripted {
        script: PathBuf,
    },
    Echo,
    Openai(ProviderConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EmbeddingSection {
    Hash {
        dim: usize,
    },
    Openai {
        #[serde(flatten)]
        config: ProviderConfig,
        dim: Option<usize>,
    },
}

impl Default for EmbeddingSection {
    fn default() -> Self {
        EmbeddingSection::Hash { dim: 256 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KeywordSection {
    #[default]
    Rule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderSection {
    pub chat: ChatSection,
    pub embedding: EmbeddingSection,
    pub keywords: KeywordSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub top_k: Vec<usize>,
    pub n_hop: Vec<usize>,
    pub generate_answers: bool,
    pub limit: Option<usize>,
    pub format: DatasetFormat,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            top_k: vec![20],
            n_hop: vec![4],
            generate_answers: false,
            limit: None,
            format: DatasetFormat::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PathSection {
    pub corpus: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    /// Directory with template overrides.
    pub prompts: Option<PathBuf>,
    /// Directory for query traces and chat exchange logs.
    pub traces: Option<PathBuf>,
    /// Directory for build and evaluation reports.
    pub reports: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoggingSection {
    /// `tracing` filter directive, e.g. `info` or `hopgraph=debug`.
    pub level: String,
}

impl Default for LoggingSection {
    fn default() -> Self {
        LoggingSection { level: "warn".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub providers: ProviderSection,
    pub index: IndexConfig,
    pub traversal: TraversalParams,
    pub eval: EvalSection,
    pub paths: PathSection,
    pub logging: LoggingSection,
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl AppConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut cfg: AppConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// File config if given, defaults otherwise.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    fn resolve_paths(&mut self, base: &Path) {
        if let ChatSection::Scripted { script } = &mut self.providers.chat {
            resolve(base, script);
        }
        let p = &mut self.paths;
        for slot in [
            &mut p.corpus,
            &mut p.graph,
            &mut p.prompts,
            &mut p.traces,
            &mut p.reports,
        ]
        .into_iter()
        .flatten()
        {
            resolve(base, slot);
        }
    }

    pub fn apply_env(&mut self) {
        self.apply_vars(|k| std::env::var(k).ok());
    }

    pub(crate) fn apply_vars(&mut self, get: impl Fn(&str) -> Option<String>) {
        if let ChatSection::Openai(c) = &mut self.providers.chat {
            c.apply_vars(CHAT_ENV_PREFIX, &get);
        }
        if let EmbeddingSection::Openai { config, .. } = &mut self.providers.embedding {
            config.apply_vars(EMBED_ENV_PREFIX, &get);
        }
    }

    pub fn templates(&self) -> Result<PromptTemplates, CliError> {
        match &self.paths.prompts {
            Some(dir) if !dir.is_dir() => Err(CliError::Config(format!(
                "prompt directory {} does not exist",
                dir.display()
            ))),
            Some(dir) => PromptTemplates::load_dir(dir).map_err(|e| CliError::Config(e.to_string())),
            None => Ok(PromptTemplates::default()),
        }
    }

    pub fn has_chat(&self) -> bool {
        !matches!(self.providers.chat, ChatSection::None)
    }

    /// Validates settings that do not require touching providers.
    pub fn validate(&self) -> Result<(), CliError> {
        self.index.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.traversal.top_k == 0 {
            return Err(CliError::Config("traversal.top_k must be positive".into()));
        }
        if let EmbeddingSection::Hash { dim: 0 } = self.providers.embedding {
            return Err(CliError::Config("providers.embedding.dim must be positive".into()));
        }
        if let ChatSection::Scripted { script } = &self.providers.chat {
            if !script.is_file() {
                return Err(CliError::Config(format!("chat script {} not found", script.display())));
            }
        }
        Ok(())
    }

    pub fn chat(&self) -> Result<Option<Arc<dyn ChatModel>>, CliError> {
        Ok(match &self.providers.chat {
            ChatSection::None => None,
            ChatSection::Scripted { script } => Some(Arc::new(
                ScriptedChat::load(script).map_err(|e| CliError::Config(e.to_string()))?,
            )),
            ChatSection::Echo => Some(Arc::new(EchoChat)),
            ChatSection::Openai(c) => Some(Arc::new(
                OpenAiChat::new(c.clone()).map_err(|e| CliError::Config(e.to_string()))?,
            )),
        })
    }

    pub fn embedder(&self) -> Result<Arc<dyn Embedder>, CliError> {
        Ok(match &self.providers.embedding {
            EmbeddingSection::Hash { dim } => Arc::new(HashEmbedder::new(*dim)),
            EmbeddingSection::Openai { config, dim } => Arc::new(CachedEmbedder::new(Arc::new(
                OpenAiEmbedder::new(config.clone(), *dim).map_err(|e| CliError::Config(e.to_string()))?,
            ))),
        })
    }

    pub fn providers(&self) -> Result<Providers, CliError> {
        Ok(Providers {
            embedder: self.embedder()?,
            keywords: match self.providers.keywords {
                KeywordSection::Rule => Arc::new(RuleKeywordExtractor),
            },
            chat: self.chat()?,
        })
    }

    /// Stable digest of everything that influences graph construction.
    pub fn index_digest(&self, templates: &PromptTemplates) -> String {
        let index = toml::to_string(&self.index).unwrap_or_default();
        let embedding = match &self.providers.embedding {
            EmbeddingSection::Hash { dim } => format!("hash:{dim}"),
            EmbeddingSection::Openai { config, dim } => format!("openai:{}:{dim:?}", config.model_name),
        };
        let text = format!("{index}\n{embedding}\n{}", templates.digest());
        format!("{:016x}", hopgraph::providers::fnv1a64(text.as_bytes()))
    }
}
