//! Hop selection at a single vertex.

use serde::{Deserialize, Serialize};

/// Parsed reasoner reply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Choice {
    /// 1-based candidate number.
    Index(usize),
    None,
}

/// Reads a reply that starts with `none` or contains a candidate number.
/// Returns `None` when neither is present.
pub fn parse_choice(reply: &str) -> Option<Choice> {
    let text = reply
        .trim()
        .trim_start_matches(['*', '"', '\'', '(', '['])
        .to_lowercase();
    if text.starts_with("none") {
        return Some(Choice::None);
    }
    let start = text.find(|c: char| c.is_ascii_digit())?;
    let digits: String = text[start..].chars().take_while(char::is_ascii_digit).collect();
    digits.parse().ok().map(Choice::Index)
}

/// How a hop target was chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    /// The reasoner picked a candidate (0-based).
    Chosen { index: usize },
    /// The reasoner answered `none`.
    Declined,
    /// Highest-similarity candidate, used when the reasoner's answer was
    /// unusable or when it declined in strict mode.
    Fallback { reason: String },
    /// Similarity-match mode.
    Similarity,
    /// The vertex has no out-edges.
    NoEdges,
}
