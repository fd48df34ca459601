use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::embed::fnv1a64;
use super::{ChatExchange, ChatModel, ChatReply, ProviderError, TokenUsage};

/// Stable key for a prompt: FNV-1a of its UTF-8 bytes as 16 hex digits.
pub fn prompt_fingerprint(prompt: &str) -> String {
    format!("{:016x}", fnv1a64(prompt.as_bytes()))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptRule {
    /// Every string must occur in the prompt.
    pub contains: Vec<String>,
    pub response: String,
}

/// On-disk form of a [`ScriptedChat`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScriptFile {
    /// prompt fingerprint -> response
    pub responses: BTreeMap<String, String>,
    pub rules: Vec<ScriptRule>,
    pub default: Option<String>,
}

/// Deterministic chat double.
///
/// Lookup order: exact prompt fingerprint, then the first rule whose
/// substrings all occur in the prompt, then the default response.
#[derive(Debug, Default)]
pub struct ScriptedChat {
    script: ScriptFile,
    calls: AtomicU64,
}

impl ScriptedChat {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_script(script: ScriptFile) -> Self {
        ScriptedChat {
            script,
            calls: AtomicU64::new(0),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let script = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Ok(Self::from_script(script))
    }

    pub fn respond_to(mut self, prompt: &str, response: impl Into<String>) -> Self {
        self.script
            .responses
            .insert(prompt_fingerprint(prompt), response.into());
        self
    }

    pub fn rule<I, S>(mut self, contains: I, response: impl Into<String>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.script.rules.push(ScriptRule {
            contains: contains.into_iter().map(Into::into).collect(),
            response: response.into(),
        });
        self
    }

    pub fn default_response(mut self, response: impl Into<String>) -> Self {
        self.script.default = Some(response.into());
        self
    }

    pub fn script(&self) -> &ScriptFile {
        &self.script
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

impl ChatModel for ScriptedChat {
    fn name(&self) -> String {
        "scripted".into()
    }

    fn complete(&self, prompt: &str) -> Result<ChatReply, ProviderError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let fingerprint = prompt_fingerprint(prompt);
        let hit = self
            .script
            .responses
            .get(&fingerprint)
            .or_else(|| {
                self.script
                    .rules
                    .iter()
                    .find(|r| r.contains.iter().all(|s| prompt.contains(s.as_str())))
                    .map(|r| &r.response)
            })
            .or(self.script.default.as_ref());
        match hit {
            Some(text) => Ok(ChatReply::text(text.clone())),
            None => Err(ProviderError::Unscripted { fingerprint }),
        }
    }
}

/// Returns the prompt unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct EchoChat;

impl ChatModel for EchoChat {
    fn name(&self) -> String {
        "echo".into()
    }

    fn complete(&self, prompt: &str) -> Result<ChatReply, ProviderError> {
        Ok(ChatReply::text(prompt))
    }
}

/// Collected exchanges, optionally mirrored line by line to a JSONL file.
#[derive(Default)]
pub struct ExchangeLog {
    entries: Mutex<Vec<ChatExchange>>,
    mirror: Option<Mutex<BufWriter<File>>>,
}

impl ExchangeLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_mirror(path: &Path) -> Result<Self> {
        Ok(ExchangeLog {
            entries: Mutex::new(Vec::new()),
            mirror: Some(Mutex::new(BufWriter::new(File::create(path)?))),
        })
    }

    pub fn record(&self, exchange: ChatExchange) {
        if let Some(mirror) = &self.mirror {
            let mut w = mirror.lock().expect("trace mirror poisoned");
            let line = serde_json::to_string(&exchange).expect("exchange serializes");
            if let Err(e) = writeln!(w, "{line}").and_then(|_| w.flush()) {
                tracing::warn!("failed to mirror chat exchange: {e}");
            }
        }
        self.entries.lock().expect("exchange log poisoned").push(exchange);
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("exchange log poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn snapshot(&self) -> Vec<ChatExchange> {
        self.entries.lock().expect("exchange log poisoned").clone()
    }
}

/// Records every call of the wrapped model into an [`ExchangeLog`].
pub struct LoggedChat {
    inner: Arc<dyn ChatModel>,
    log: Arc<ExchangeLog>,
}

impl LoggedChat {
    pub fn new(inner: Arc<dyn ChatModel>, log: Arc<ExchangeLog>) -> Self {
        LoggedChat { inner, log }
    }

    pub fn log(&self) -> &Arc<ExchangeLog> {
        &self.log
    }
}

fn word_count(s: &str) -> u64 {
    s.split_whitespace().count() as u64
}

impl ChatModel for LoggedChat {
    fn name(&self) -> String {
        self.inner.name()
    }

    fn complete(&self, prompt: &str) -> Result<ChatReply, ProviderError> {
        let started = Instant::now();
        let result = self.inner.complete(prompt);
        let latency_ms = started.elapsed().as_millis() as u64;
        let (response, error, usage) = match &result {
            Ok(r) => (r.text.clone(), None, r.usage),
            Err(e) => (String::new(), Some(e.to_string()), None),
        };
        let usage = usage.unwrap_or(TokenUsage {
            input: word_count(prompt),
            output: word_count(&response),
        });
        self.log.record(ChatExchange {
            model: self.inner.name(),
            prompt: prompt.to_string(),
            response,
            error,
            input_tokens: usage.input,
            output_tokens: usage.output,
            latency_ms,
        });
        result
    }
}
