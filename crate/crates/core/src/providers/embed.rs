use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::model::Embedding;

use super::text::{is_stopword, tokenize};
use super::{Embedder, ProviderError};

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes
        .iter()
        .fold(OFFSET, |h, b| (h ^ u64::from(*b)).wrapping_mul(PRIME))
}

/// Bag-of-tokens embedder for offline runs.
///
/// Each lowercased non-stopword token adds 1.0 to bucket
/// `fnv1a64(token) % dim`; the result is L2-normalized. Texts with no such
/// token embed to the zero vector.
#[derive(Debug, Clone, Copy)]
pub struct HashEmbedder {
    dim: usize,
}

impl HashEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        HashEmbedder { dim }
    }

    pub fn bucket(&self, token: &str) -> usize {
        (fnv1a64(token.as_bytes()) % self.dim as u64) as usize
    }
}

impl Embedder for HashEmbedder {
    fn name(&self) -> String {
        format!("hash-{}", self.dim)
    }

    fn dim(&self) -> Option<usize> {
        Some(self.dim)
    }

    fn embed(&self, text: &str) -> Result<Embedding, ProviderError> {
        if text.trim().is_empty() {
            return Err(ProviderError::InvalidRequest("cannot embed empty text".into()));
        }
        let mut v = vec![0.0; self.dim];
        for token in tokenize(text) {
            let lower = token.to_lowercase();
            if !is_stopword(&lower) {
                v[self.bucket(&lower)] += 1.0;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        Embedding::new(v).map_err(|e| ProviderError::Malformed(e.to_string()))
    }
}

/// Memoizes another embedder keyed by `(model name, text)` and pins the
/// output dimension to the first one observed (or the configured one).
pub struct CachedEmbedder {
    inner: Arc<dyn Embedder>,
    model: String,
    expected_dim: OnceLock<usize>,
    cache: Mutex<HashMap<(String, String), Embedding>>,
}

impl CachedEmbedder {
    pub fn new(inner: Arc<dyn Embedder>) -> Self {
        let expected_dim = OnceLock::new();
        if let Some(d) = inner.dim() {
            let _ = expected_dim.set(d);
        }
        CachedEmbedder {
            model: inner.name(),
            inner,
            expected_dim,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn len(&self) -> usize {
        self.cache.lock().expect("embedding cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Embedder for CachedEmbedder {
    fn name(&self) -> String {
        self.model.clone()
    }

    fn dim(&self) -> Option<usize> {
        self.expected_dim.get().copied()
    }

    fn embed(&self, text: &str) -> Result<Embedding, ProviderError> {
        let key = (self.model.clone(), text.to_string());
        if let Some(hit) = self.cache.lock().expect("embedding cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let e = self.inner.embed(text)?;
        let expected = *self.expected_dim.get_or_init(|| e.dim());
        if e.dim() != expected {
            return Err(ProviderError::Dimension {
                expected,
                found: e.dim(),
            });
        }
        self.cache
            .lock()
            .expect("embedding cache poisoned")
            .insert(key, e.clone());
        Ok(e)
    }
}
