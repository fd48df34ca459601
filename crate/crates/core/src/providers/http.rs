//! Blocking clients for OpenAI-compatible `/chat/completions` and
//! `/embeddings` endpoints.

use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::header::RETRY_AFTER;
use reqwest::StatusCode;
use serde_json::{json, Value};

use crate::model::Embedding;

use super::{ChatModel, ChatReply, Embedder, ProviderConfig, ProviderError, TokenUsage};

const MAX_BACKOFF: Duration = Duration::from_secs(30);
const MAX_RETRY_AFTER: Duration = Duration::from_secs(60);

#[derive(Debug, Clone)]
struct Transport {
    config: ProviderConfig,
    client: Client,
}

impl Transport {
    fn new(config: ProviderConfig) -> Result<Self, ProviderError> {
        config.validate()?;
        let client = Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| ProviderError::InvalidRequest(format!("http client: {e}")))?;
        Ok(Transport { config, client })
    }

    fn url(&self, path: &str) -> String {
        format!("{}/{}", self.config.endpoint.trim_end_matches('/'), path)
    }

    fn backoff(&self, attempt: u32) -> Duration {
        let factor = 1u32.checked_shl(attempt.saturating_sub(1)).unwrap_or(u32::MAX);
        self.config.retry_backoff.saturating_mul(factor).min(MAX_BACKOFF)
    }

    /// POSTs `body`, retrying transport errors, 429 and 5xx responses up to
    /// `max_retries` times. Other 4xx responses fail immediately.
    fn post(&self, path: &str, body: &Value) -> Result<Value, ProviderError> {
        let url = self.url(path);
        let attempts = self.config.max_retries + 1;
        let mut last_status = None;
        let mut last_message = String::new();
        let mut wait = Duration::ZERO;

        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(wait.max(self.backoff(attempt)));
                wait = Duration::ZERO;
            }
            let mut request = self.client.post(&url).json(body);
            if !self.config.api_key.is_empty() {
                request = request.bearer_auth(self.config.api_key.expose());
            }
            match request.send() {
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        return resp
                            .json::<Value>()
                            .map_err(|e| ProviderError::Malformed(e.to_string()));
                    }
                    let retry_after = resp
                        .headers()
                        .get(RETRY_AFTER)
                        .and_then(|v| v.to_str().ok())
                        .and_then(|v| v.trim().parse::<u64>().ok())
                        .map(|s| Duration::from_secs(s).min(MAX_RETRY_AFTER));
                    let text = resp.text().unwrap_or_default();
                    if status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error() {
                        tracing::debug!(%url, %status, attempt, "retryable provider response");
                        last_status = Some(status.as_u16());
                        last_message = text;
                        wait = retry_after.unwrap_or(Duration::ZERO);
                        continue;
                    }
                    return Err(ProviderError::Http {
                        status: status.as_u16(),
                        message: text,
                    });
                }
                Err(e) => {
                    tracing::debug!(%url, attempt, "transport error: {e}");
                    last_status = None;
                    last_message = e.to_string();
                }
            }
        }
        Err(ProviderError::Exhausted {
            attempts,
            last_status,
            message: last_message,
        })
    }
}

/// Chat client speaking the `/chat/completions` request shape.
#[derive(Debug, Clone)]
pub struct OpenAiChat {
    transport: Transport,
}

impl OpenAiChat {
    pub fn new(config: ProviderConfig) -> Result<Self, ProviderError> {
        Ok(OpenAiChat {
            transport: Transport::new(config)?,
        })
    }

    fn request_body(&self, prompt: &str) -> Value {
        let c = &self.transport.config;
        json!({
            "model": c.model_name,
            "messages": [{ "role": "user", "content": prompt }],
            "temperature": c.temperature,
            "max_tokens": c.max_tokens,
        })
    }
}

pub(crate) fn parse_chat_response(v: &Value) -> Result<ChatReply, ProviderError> {
    let text = v
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| ProviderError::Malformed("missing choices[0].message.content".into()))?;
    let usage = v.get("usage").and_then(|u| {
        Some(TokenUsage {
            input: u.get("prompt_tokens")?.as_u64()?,
            output: u.get("completion_tokens")?.as_u64()?,
        })
    });
    Ok(ChatReply {
        text: text.to_string(),
        usage,
    })
}

impl ChatModel for OpenAiChat {
    fn name(&self) -> String {
        self.transport.config.model_name.clone()
    }

    fn complete(&self, prompt: &str) -> Result<ChatReply, ProviderError> {
        if prompt.trim().is_empty() {
            return Err(ProviderError::InvalidRequest("empty prompt".into()));
        }
        let v = self.transport.post("chat/completions", &self.request_body(prompt))?;
        parse_chat_response(&v)
    }
}

/// Embedding client speaking the `/embeddings` request shape.
#[derive(Debug, Clone)]
pub struct OpenAiEmbedder {
    transport: Transport,
    dim: Option<usize>,
}

impl OpenAiEmbedder {
    pub fn new(config: ProviderConfig, dim: Option<usize>) -> Result<Self, ProviderError> {
        Ok(OpenAiEmbedder {
            transport: Transport::new(config)?,
            dim,
        })
    }
}

pub(crate) fn parse_embedding_response(v: &Value) -> Result<Embedding, ProviderError> {
    let values = v
        .pointer("/data/0/embedding")
        .and_then(Value::as_array)
        .ok_or_else(|| ProviderError::Malformed("missing data[0].embedding".into()))?
        .iter()
        .map(|x| {
            x.as_f64()
                .ok_or_else(|| ProviderError::Malformed("non-numeric component".into()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Embedding::new(values).map_err(|e| ProviderError::Malformed(e.to_string()))
}

impl Embedder for OpenAiEmbedder {
    fn name(&self) -> String {
        self.transport.config.model_name.clone()
    }

    fn dim(&self) -> Option<usize> {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<Embedding, ProviderError> {
        if text.trim().is_empty() {
            return Err(ProviderError::InvalidRequest("cannot embed empty text".into()));
        }
        let body = json!({ "model": self.transport.config.model_name, "input": text });
        let e = parse_embedding_response(&self.transport.post("embeddings", &body)?)?;
        if let Some(expected) = self.dim {
            if e.dim() != expected {
                return Err(ProviderError::Dimension {
                    expected,
                    found: e.dim(),
                });
            }
        }
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::{Arc, Mutex};
    use std::thread::JoinHandle;

    /// Serves one canned `(status, body)` per connection, in order, and
    /// records each request body.
    fn mock_server(replies: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<String>>>, JoinHandle<()>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let seen = Arc::new(Mutex::new(Vec::new()));
        let seen2 = seen.clone();
        let handle = std::thread::spawn(move || {
            for (status, body) in replies {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut content_length = 0usize;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                    let lower = line.to_ascii_lowercase();
                    if let Some(v) = lower.strip_prefix("content-length:") {
                        content_length = v.trim().parse().unwrap();
                    }
                }
                let mut buf = vec![0u8; content_length];
                reader.read_exact(&mut buf).unwrap();
                seen2.lock().unwrap().push(String::from_utf8(buf).unwrap());
                let mut stream = stream;
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                )
                .unwrap();
            }
        });
        (format!("http://{addr}/v1"), seen, handle)
    }

    fn config(endpoint: String, max_retries: u32) -> ProviderConfig {
        ProviderConfig {
            endpoint,
            max_retries,
            timeout: Duration::from_secs(5),
            retry_backoff: Duration::from_millis(1),
            ..Default::default()
        }
    }

    fn completion(text: &str) -> String {
        json!({
            "choices": [{ "index": 0, "message": { "role": "assistant", "content": text } }],
            "usage": { "prompt_tokens": 7, "completion_tokens": 2 }
        })
        .to_string()
    }

    #[test]
    fn chat_request_and_response_shape() {
        let (url, seen, handle) = mock_server(vec![(200, completion("hi there"))]);
        let chat = OpenAiChat::new(config(url, 0)).unwrap();
        let reply = chat.complete("hello").unwrap();
        handle.join().unwrap();
        assert_eq!(reply.text, "hi there");
        assert_eq!(reply.usage, Some(TokenUsage { input: 7, output: 2 }));
        let sent: Value = serde_json::from_str(&seen.lock().unwrap()[0]).unwrap();
        assert_eq!(sent["model"], "gpt-4o-mini");
        assert_eq!(sent["messages"][0]["content"], "hello");
        assert_eq!(sent["temperature"], 0.1);
        assert_eq!(sent["max_tokens"], 2048);
    }

    #[test]
    fn transient_429_is_retried() {
        let (url, _, handle) = mock_server(vec![(429, "{}".into()), (503, "{}".into()), (200, completion("ok"))]);
        let chat = OpenAiChat::new(config(url, 2)).unwrap();
        assert_eq!(chat.chat("p").unwrap(), "ok");
        handle.join().unwrap();
    }

    #[test]
    fn exhausted_retries_carry_last_status() {
        let (url, _, handle) = mock_server(vec![(500, "boom".into()), (429, "slow down".into())]);
        let chat = OpenAiChat::new(config(url, 1)).unwrap();
        let err = chat.chat("p").unwrap_err();
        handle.join().unwrap();
        assert_eq!(
            err,
            ProviderError::Exhausted {
                attempts: 2,
                last_status: Some(429),
                message: "slow down".into()
            }
        );
    }

    #[test]
    fn client_errors_are_not_retried() {
        let (url, seen, handle) = mock_server(vec![(401, "bad key".into())]);
        let chat = OpenAiChat::new(config(url, 3)).unwrap();
        let err = chat.chat("p").unwrap_err();
        handle.join().unwrap();
        assert_eq!(
            err,
            ProviderError::Http {
                status: 401,
                message: "bad key".into()
            }
        );
        assert_eq!(seen.lock().unwrap().len(), 1);
    }

    #[test]
    fn embedding_shape_and_dimension_check() {
        let body = json!({ "data": [{ "embedding": [0.5, 0.25, 0.0] }] }).to_string();
        let (url, seen, handle) = mock_server(vec![(200, body.clone()), (200, body)]);
        let ok = OpenAiEmbedder::new(config(url.clone(), 0), Some(3)).unwrap();
        assert_eq!(ok.embed("text").unwrap().values(), &[0.5, 0.25, 0.0]);
        let strict = OpenAiEmbedder::new(config(url, 0), Some(4)).unwrap();
        assert_eq!(
            strict.embed("text").unwrap_err(),
            ProviderError::Dimension { expected: 4, found: 3 }
        );
        handle.join().unwrap();
        let sent: Value = serde_json::from_str(&seen.lock().unwrap()[0]).unwrap();
        assert_eq!(sent["input"], "text");
    }

    #[test]
    fn malformed_payloads() {
        assert!(parse_chat_response(&json!({"choices": []})).is_err());
        assert!(parse_embedding_response(&json!({"data": [{"embedding": ["x"]}]})).is_err());
    }

    #[test]
    fn backoff_doubles_and_caps() {
        let t = Transport::new(ProviderConfig {
            retry_backoff: Duration::from_millis(100),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(t.backoff(1), Duration::from_millis(100));
        assert_eq!(t.backoff(3), Duration::from_millis(400));
        assert_eq!(t.backoff(40), MAX_BACKOFF);
    }
}
