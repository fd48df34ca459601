use crate::model::Keywords;

use super::KeywordExtractor;

/// English function words, question words and auxiliaries.
pub const STOPWORDS: &[&str] = &[
    "a",
    "about",
    "above",
    "after",
    "again",
    "against",
    "all",
    "also",
    "am",
    "an",
    "and",
    "any",
    "are",
    "as",
    "at",
    "be",
    "because",
    "been",
    "before",
    "being",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "could",
    "did",
    "do",
    "does",
    "doing",
    "down",
    "during",
    "each",
    "else",
    "few",
    "for",
    "from",
    "further",
    "had",
    "has",
    "have",
    "having",
    "he",
    "her",
    "here",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "i",
    "if",
    "in",
    "into",
    "is",
    "it",
    "its",
    "itself",
    "just",
    "may",
    "me",
    "might",
    "more",
    "most",
    "must",
    "my",
    "myself",
    "no",
    "nor",
    "not",
    "now",
    "of",
    "off",
    "on",
    "once",
    "only",
    "or",
    "other",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "same",
    "shall",
    "she",
    "should",
    "so",
    "some",
    "such",
    "than",
    "that",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "to",
    "too",
    "under",
    "until",
    "up",
    "very",
    "was",
    "we",
    "were",
    "what",
    "when",
    "where",
    "which",
    "while",
    "who",
    "whom",
    "whose",
    "why",
    "will",
    "with",
    "would",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
];

pub fn is_stopword(lower: &str) -> bool {
    STOPWORDS.binary_search(&lower).is_ok()
}

/// Splits on every non-alphanumeric character. Case is preserved.
pub fn tokenize(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty())
}

/// Offline keyword extractor.
///
/// For each token: numeric tokens are kept; stopwords are dropped; single
/// characters are kept only when capitalized (initials); everything else is
/// kept. Survivors are case-folded into a set.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleKeywordExtractor;

impl RuleKeywordExtractor {
    fn keep(token: &str, lower: &str) -> bool {
        if token.chars().all(|c| c.is_numeric()) {
            return true;
        }
        if is_stopword(lower) {
            return false;
        }
        let mut chars = token.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => c.is_uppercase(),
            _ => true,
        }
    }
}

impl KeywordExtractor for RuleKeywordExtractor {
    fn name(&self) -> String {
        "rules".into()
    }

    fn extract(&self, text: &str) -> Keywords {
        Keywords::new(tokenize(text).filter_map(|t| {
            let lower = t.to_lowercase();
            Self::keep(t, &lower).then_some(lower)
        }))
    }
}
