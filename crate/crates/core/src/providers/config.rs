use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::ProviderError;

/// A credential that never appears in `Debug` output or serialized configs.
#[derive(Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(transparent)]
pub struct Secret(String);

impl Secret {
    pub fn new(value: impl Into<String>) -> Self {
        Secret(value.into())
    }

    pub fn expose(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Debug for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str("Secret(<empty>)")
        } else {
            f.write_str("Secret(<redacted>)")
        }
    }
}

impl Serialize for Secret {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(if self.0.is_empty() { "" } else { "<redacted>" })
    }
}

/// Connection settings for an OpenAI-compatible endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    /// Base URL, e.g. `https://api.openai.com/v1`.
    pub endpoint: String,
    pub model_name: String,
    pub api_key: Secret,
    #[serde(with = "millis")]
    pub timeout: Duration,
    pub max_retries: u32,
    pub temperature: f64,
    pub max_tokens: u32,
    /// First retry delay; doubles on each further attempt.
    #[serde(with = "millis")]
    pub retry_backoff: Duration,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            endpoint: "https://api.openai.com/v1".into(),
            model_name: "gpt-4o-mini".into(),
            api_key: Secret::default(),
            timeout: Duration::from_secs(60),
            max_retries: 3,
            temperature: 0.1,
            max_tokens: 2048,
            retry_backoff: Duration::from_millis(500),
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.timeout.is_zero() {
            return Err(ProviderError::InvalidRequest("timeout must be positive".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(ProviderError::InvalidRequest(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if self.endpoint.trim().is_empty() {
            return Err(ProviderError::InvalidRequest("endpoint must be set".into()));
        }
        Ok(())
    }

    /// Applies `{prefix}_ENDPOINT`, `{prefix}_API_KEY` and `{prefix}_MODEL`
    /// from the environment, overriding file values.
    pub fn apply_env(&mut self, prefix: &str) {
        self.apply_vars(prefix, |k| std::env::var(k).ok());
    }

    pub fn apply_vars(&mut self, prefix: &str, get: impl Fn(&str) -> Option<String>) {
        if let Some(v) = get(&format!("{prefix}_ENDPOINT")).filter(|v| !v.is_empty()) {
            self.endpoint = v;
        }
        if let Some(v) = get(&format!("{prefix}_API_KEY")).filter(|v| !v.is_empty()) {
            self.api_key = Secret::new(v);
        }
        if let Some(v) = get(&format!("{prefix}_MODEL")).filter(|v| !v.is_empty()) {
            self.model_name = v;
        }
    }
}

mod millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}
