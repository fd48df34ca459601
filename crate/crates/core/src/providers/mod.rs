//! Adapters for the three external capabilities the pipeline needs:
//! text embedding, keyword extraction and chat completion.
//!
//! Each has a deterministic offline implementation ([`HashEmbedder`],
//! [`RuleKeywordExtractor`], [`ScriptedChat`]) and, where a network service
//! is involved, an OpenAI-compatible HTTP client.

mod chat;
mod config;
mod embed;
mod http;
mod text;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Embedding, Keywords};

pub use chat::{prompt_fingerprint, EchoChat, ExchangeLog, LoggedChat, ScriptFile, ScriptRule, ScriptedChat};
pub use config::{ProviderConfig, Secret};
pub use embed::{fnv1a64, CachedEmbedder, HashEmbedder};
pub use http::{OpenAiChat, OpenAiEmbedder};
pub use text::{is_stopword, tokenize, RuleKeywordExtractor, STOPWORDS};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ProviderError {
    #[error("request failed after {attempts} attempt(s) (last status: {}): {message}",
        last_status.map_or_else(|| "none".to_string(), |s| s.to_string()))]
    Exhausted {
        attempts: u32,
        last_status: Option<u16>,
        message: String,
    },
    #[error("HTTP {status}: {message}")]
    Http { status: u16, message: String },
    #[error("malformed provider response: {0}")]
    Malformed(String),
    #[error("embedding dimension drift: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("no scripted response for prompt {fingerprint}")]
    Unscripted { fingerprint: String },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("provider not configured: {0}")]
    NotConfigured(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub input: u64,
    pub output: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatReply {
    pub text: String,
    /// Reported by the service when available.
    pub usage: Option<TokenUsage>,
}

impl ChatReply {
    pub fn text(text: impl Into<String>) -> Self {
        ChatReply {
            text: text.into(),
            usage: None,
        }
    }
}

/// One logged prompt/response pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatExchange {
    pub model: String,
    pub prompt: String,
    pub response: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub latency_ms: u64,
}

pub trait Embedder: Send + Sync {
    fn name(&self) -> String;

    /// Output dimension when known ahead of the first call.
    fn dim(&self) -> Option<usize>;

    fn embed(&self, text: &str) -> Result<Embedding, ProviderError>;
}

pub trait KeywordExtractor: Send + Sync {
    fn name(&self) -> String;

    fn extract(&self, text: &str) -> Keywords;
}

pub trait ChatModel: Send + Sync {
    fn name(&self) -> String;

    fn complete(&self, prompt: &str) -> Result<ChatReply, ProviderError>;

    fn chat(&self, prompt: &str) -> Result<String, ProviderError> {
        self.complete(prompt).map(|r| r.text)
    }
}

impl<F> ChatModel for F
where
    F: Fn(&str) -> Result<String, ProviderError> + Send + Sync,
{
    fn name(&self) -> String {
        "closure".into()
    }

    fn complete(&self, prompt: &str) -> Result<ChatReply, ProviderError> {
        self(prompt).map(ChatReply::text)
    }
}

/// The provider set used by indexing, traversal and evaluation.
#[derive(Clone)]
pub struct Providers {
    pub embedder: Arc<dyn Embedder>,
    pub keywords: Arc<dyn KeywordExtractor>,
    pub chat: Option<Arc<dyn ChatModel>>,
}

impl Providers {
    /// Hash embedder and rule-based keywords, no chat model.
    pub fn offline(dim: usize) -> Self {
        Providers {
            embedder: Arc::new(HashEmbedder::new(dim)),
            keywords: Arc::new(RuleKeywordExtractor),
            chat: None,
        }
    }

    pub fn with_chat(mut self, chat: Arc<dyn ChatModel>) -> Self {
        self.chat = Some(chat);
        self
    }

    pub fn chat(&self) -> Result<&dyn ChatModel, ProviderError> {
        self.chat
            .as_deref()
            .ok_or_else(|| ProviderError::NotConfigured("no chat model configured".into()))
    }
}

impl std::fmt::Debug for Providers {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Providers")
            .field("embedder", &self.embedder.name())
            .field("keywords", &self.keywords.name())
            .field("chat", &self.chat.as_ref().map(|c| c.name()))
            .finish()
    }
}
