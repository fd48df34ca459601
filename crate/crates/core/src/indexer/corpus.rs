//! Corpus files: JSON Lines of passages, or a JSON array of passages.
//!
//! Each passage is `{"id": "...", "text": "...", "doc_id": "..."}` with
//! `doc_id` optional.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::Passage;

fn parse_err(path: &Path, message: impl ToString) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

/// Parses corpus text; `path` is only used in error messages. Ids must be
/// unique and texts non-empty.
pub fn parse_corpus(text: &str, path: &Path) -> Result<Vec<Passage>> {
    let passages: Vec<Passage> = if text.trim_start().starts_with('[') {
        serde_json::from_str(text).map_err(|e| parse_err(path, e))?
    } else {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| parse_err(path, format!("line {}: {e}", i + 1))))
            .collect::<Result<_>>()?
    };
    let mut seen = BTreeSet::new();
    for p in &passages {
        p.validate()?;
        if !seen.insert(p.id.as_str()) {
            return Err(Error::IdConflict(p.id.clone()));
        }
    }
    Ok(passages)
}

pub fn load_corpus(path: &Path) -> Result<Vec<Passage>> {
    parse_corpus(&std::fs::read_to_string(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_and_array_forms() {
        let p = Path::new("c.jsonl");
        let lines = "{\"id\": \"a\", \"text\": \"A.\", \"doc_id\": \"d\"}\n\n{\"id\": \"b\", \"text\": \"B.\"}\n";
        let parsed = parse_corpus(lines, p).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[1].doc_id, "");
        let array = serde_json::to_string(&parsed).unwrap();
        assert_eq!(parse_corpus(&array, p).unwrap(), parsed);
    }

    #[test]
    fn bad_corpora() {
        let p = Path::new("c.jsonl");
        assert!(matches!(parse_corpus("{\"id\": 1}", p), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_corpus("{\"id\": \"a\", \"text\": \"x\"}\n{\"id\": \"a\", \"text\": \"y\"}", p),
            Err(Error::IdConflict(_))
        ));
        assert!(parse_corpus("{\"id\": \"a\", \"text\": \" \"}", p).is_err());
    }
}
