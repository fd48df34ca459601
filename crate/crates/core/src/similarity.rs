//! Hybrid lexical/dense similarity and the visit-based ranking scores.
//!
//! Every score here lies in `[0, 1]`:
//!
//! * `jaccard` is 0 when both keyword sets are empty.
//! * `cosine` is clamped below at 0 and is 0 when either vector is all-zero.
//! * `hybrid_sim` is the arithmetic mean of the two.
//! * `importance` is a vertex's share of all recorded visits.
//! * `helpfulness` is the mean of passage similarity and importance.

use crate::error::{Error, Result};
use crate::model::{Embedding, Features, Keywords, Vertex, VisitCounter};

pub fn jaccard(a: &Keywords, b: &Keywords) -> f64 {
    let inter = a.intersection_count(b);
    let union = a.len() + b.len() - inter;
    if union == 0 {
        return 0.0;
    }
    inter as f64 / union as f64
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine from precomputed norms. Shared with the vector index so both
/// paths produce bit-identical scores.
pub(crate) fn cosine_with_norms(a: &[f64], norm_a: f64, b: &[f64], norm_b: f64) -> f64 {
    if norm_a == 0.0 || norm_b == 0.0 {
        return 0.0;
    }
    (dot(a, b) / (norm_a * norm_b)).clamp(0.0, 1.0)
}

pub fn cosine(a: &Embedding, b: &Embedding) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let (a, b) = (a.values(), b.values());
    Ok(cosine_with_norms(a, norm(a), b, norm(b)))
}

pub fn hybrid_sim<A, B>(a: &A, b: &B) -> Result<f64>
where
    A: Features + ?Sized,
    B: Features + ?Sized,
{
    let dense = cosine(a.embedding(), b.embedding())?;
    Ok((jaccard(a.keywords(), b.keywords()) + dense) / 2.0)
}

pub fn importance(counter: &VisitCounter, id: &str) -> Result<f64> {
    let count = counter.get(id).ok_or_else(|| Error::Key(id.to_string()))?;
    Ok(count as f64 / counter.total() as f64)
}

pub fn helpfulness<Q>(vertex: &Vertex, query: &Q, counter: &VisitCounter) -> Result<f64>
where
    Q: Features + ?Sized,
{
    let imp = importance(counter, vertex.id())?;
    let sim = hybrid_sim(&vertex.passage_features(), query)?;
    Ok((sim + imp) / 2.0)
}
