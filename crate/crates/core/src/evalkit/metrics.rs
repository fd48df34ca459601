//! Answer and retrieval metrics.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lowercases, strips ASCII punctuation and the articles `a`, `an`, `the`,
/// and collapses whitespace.
pub fn normalize_answer(s: &str) -> String {
    let lowered: String = s.to_lowercase().chars().filter(|c| !c.is_ascii_punctuation()).collect();
    lowered
        .split_whitespace()
        .filter(|w| !matches!(*w, "a" | "an" | "the"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn require_golds<S: AsRef<str>>(golds: &[S]) -> Result<()> {
    if golds.is_empty() {
        return Err(Error::EvalInput("no gold answers".into()));
    }
    Ok(())
}

/// 1.0 if the normalized prediction equals any normalized gold answer.
pub fn exact_match<S: AsRef<str>>(prediction: &str, golds: &[S]) -> Result<f64> {
    require_golds(golds)?;
    let p = normalize_answer(prediction);
    Ok(if golds.iter().any(|g| normalize_answer(g.as_ref()) == p) {
        1.0
    } else {
        0.0
    })
}

/// Token-level F1 against one gold answer. Two answers that both normalize
/// to nothing score 1.
pub fn token_f1(prediction: &str, gold: &str) -> f64 {
    let p = normalize_answer(prediction);
    let g = normalize_answer(gold);
    let pt: Vec<&str> = p.split_whitespace().collect();
    let gt: Vec<&str> = g.split_whitespace().collect();
    if pt.is_empty() && gt.is_empty() {
        return 1.0;
    }
    if pt.is_empty() || gt.is_empty() {
        return 0.0;
    }
    let mut gold_counts: HashMap<&str, usize> = HashMap::new();
    for t in &gt {
        *gold_counts.entry(t).or_default() += 1;
    }
    let mut common = 0usize;
    for t in &pt {
        if let Some(c) = gold_counts.get_mut(t) {
            if *c > 0 {
                *c -= 1;
                common += 1;
            }
        }
    }
    if common == 0 {
        return 0.0;
    }
    let precision = common as f64 / pt.len() as f64;
    let recall = common as f64 / gt.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Best token F1 over the gold answers.
pub fn answer_f1<S: AsRef<str>>(prediction: &str, golds: &[S]) -> Result<f64> {
    require_golds(golds)?;
    Ok(golds
        .iter()
        .map(|g| token_f1(prediction, g.as_ref()))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Set-based precision, recall and F1 of retrieved ids against relevant ids.
pub fn retrieval_prf<S: AsRef<str>, T: AsRef<str>>(retrieved: &[S], relevant: &[T]) -> Result<Prf> {
    let relevant: BTreeSet<&str> = relevant.iter().map(AsRef::as_ref).collect();
    if relevant.is_empty() {
        return Err(Error::EvalInput("relevant set is empty".into()));
    }
    let retrieved: BTreeSet<&str> = retrieved.iter().map(AsRef::as_ref).collect();
    if retrieved.is_empty() {
        return Ok(Prf::default());
    }
    let hit = retrieved.intersection(&relevant).count() as f64;
    let precision = hit / retrieved.len() as f64;
    let recall = hit / relevant.len() as f64;
    let f1 = if hit == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Prf { precision, recall, f1 })
}
