//! Domain types shared by indexing, traversal and storage.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An atomic text chunk of the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Passage {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub doc_id: String,
}

impl Passage {
    pub fn new(id: impl Into<String>, text: impl Into<String>, doc_id: impl Into<String>) -> Result<Self> {
        let passage = Passage {
            id: id.into(),
            text: text.into(),
            doc_id: doc_id.into(),
        };
        passage.validate()?;
        Ok(passage)
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(Error::InvalidInput("passage id must be non-empty".into()));
        }
        if self.text.trim().is_empty() {
            return Err(Error::InvalidInput(format!("passage `{}` has empty text", self.id)));
        }
        Ok(())
    }
}

/// A case-folded, deduplicated keyword set.
///
/// Backed by a `BTreeSet` so iteration order (and therefore hashing and
/// serialization) is deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Keywords(BTreeSet<String>);

impl Keywords {
    pub fn empty() -> Self {
        Keywords(BTreeSet::new())
    }

    /// Builds a set from raw terms, lowercasing and trimming each one and
    /// discarding terms that end up empty.
    pub fn new<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Keywords(
            terms
                .into_iter()
                .map(|t| t.as_ref().trim().to_lowercase())
                .filter(|t| !t.is_empty())
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.0.contains(term)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn intersection_count(&self, other: &Keywords) -> usize {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.0.iter().filter(|t| large.0.contains(*t)).count()
    }

    pub fn union(&self, other: &Keywords) -> Keywords {
        Keywords(self.0.union(&other.0).cloned().collect())
    }
}

impl<S: AsRef<str>> FromIterator<S> for Keywords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Keywords::new(iter)
    }
}

/// A dense vector with finite components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Embedding(Vec<f64>);

impl Embedding {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("embedding must have dim > 0".into()));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("embedding component {pos} is not finite")));
        }
        Ok(Embedding(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::Dimension {
                expected,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for Embedding {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Embedding::new(values)
    }
}

impl From<Embedding> for Vec<f64> {
    fn from(e: Embedding) -> Self {
        e.0
    }
}

/// Anything carrying the sparse + dense feature pair scored by hybrid similarity.
pub trait Features {
    fn keywords(&self) -> &Keywords;
    fn embedding(&self) -> &Embedding;
}

/// Borrowed feature pair.
#[derive(Debug, Clone, Copy)]
pub struct FeatureRef<'a> {
    pub keywords: &'a Keywords,
    pub embedding: &'a Embedding,
}

impl Features for FeatureRef<'_> {
    fn keywords(&self) -> &Keywords {
        self.keywords
    }
    fn embedding(&self) -> &Embedding {
        self.embedding
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Raised by the passage but answered elsewhere.
    OutComing,
    /// Answered by the passage itself.
    InComing,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::OutComing => f.write_str("out-coming"),
            Direction::InComing => f.write_str("in-coming"),
        }
    }
}

/// A pseudo-query together with its keywords and embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryTriplet {
    pub question: String,
    pub keywords: Keywords,
    pub embedding: Embedding,
    pub direction: Direction,
    pub ordinal: usize,
}

impl Features for QueryTriplet {
    fn keywords(&self) -> &Keywords {
        &self.keywords
    }
    fn embedding(&self) -> &Embedding {
        &self.embedding
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub passage: Passage,
    pub out_triplets: Vec<QueryTriplet>,
    pub in_triplets: Vec<QueryTriplet>,
    pub passage_keywords: Keywords,
    pub passage_embedding: Embedding,
}

impl Vertex {
    pub fn id(&self) -> &str {
        &self.passage.id
    }

    pub fn passage_features(&self) -> FeatureRef<'_> {
        FeatureRef {
            keywords: &self.passage_keywords,
            embedding: &self.passage_embedding,
        }
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        self.passage_embedding.check_dim(dim)?;
        for t in self.out_triplets.iter().chain(&self.in_triplets) {
            t.embedding.check_dim(dim)?;
        }
        Ok(())
    }
}

/// A directed logical link `source -> target`.
///
/// The features are aggregated from the matched triplet pair: the in-coming
/// question and embedding of the target, and the union of both keyword sets.
/// `out_ordinal` / `in_ordinal` identify the originating pair so the score can
/// be recomputed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source_id: String,
    pub target_id: String,
    pub question: String,
    pub keywords: Keywords,
    pub embedding: Embedding,
    pub sim_score: f64,
    pub out_ordinal: usize,
    pub in_ordinal: usize,
}

impl Edge {
    /// Total order used for every deterministic tie-break on edges.
    pub fn canonical_cmp(&self, other: &Edge) -> std::cmp::Ordering {
        (
            self.source_id.as_str(),
            self.target_id.as_str(),
            self.out_ordinal,
            self.in_ordinal,
        )
            .cmp(&(
                other.source_id.as_str(),
                other.target_id.as_str(),
                other.out_ordinal,
                other.in_ordinal,
            ))
    }

    pub(crate) fn same_features(&self, other: &Edge) -> bool {
        self.source_id == other.source_id
            && self.target_id == other.target_id
            && self.question == other.question
            && self.keywords == other.keywords
            && self.embedding == other.embedding
    }
}

impl Features for Edge {
    fn keywords(&self) -> &Keywords {
        &self.keywords
    }
    fn embedding(&self) -> &Embedding {
        &self.embedding
    }
}

/// Per-vertex visit tally accumulated during traversal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VisitCounter {
    counts: BTreeMap<String, u64>,
}

impl VisitCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Counts every occurrence, so duplicated ids start above 1.
    pub fn from_occurrences<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut counter = Self::new();
        for id in ids {
            counter.visit(id);
        }
        counter
    }

    /// Records one visit; returns true when the id was not counted before.
    pub fn visit(&mut self, id: impl Into<String>) -> bool {
        let slot = self.counts.entry(id.into()).or_insert(0);
        *slot += 1;
        *slot == 1
    }

    pub fn get(&self, id: &str) -> Option<u64> {
        self.counts.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.counts.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, v)| (k.as_str(), *v))
    }
}
