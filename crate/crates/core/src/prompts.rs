//! Prompt templates for question generation, hop selection and answering.
//!
//! Templates are plain text with `{placeholder}` markers. Defaults ship in
//! `prompts/` and can be replaced by files of the same name in a directory
//! passed to [`PromptTemplates::load_dir`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_INCOMING: &str = include_str!("../prompts/incoming.txt");
pub const DEFAULT_OUTGOING: &str = include_str!("../prompts/outgoing.txt");
pub const DEFAULT_REASONING: &str = include_str!("../prompts/reasoning.txt");
pub const DEFAULT_ANSWER: &str = include_str!("../prompts/answer.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplates {
    /// Questions answered by the passage. Requires `{passage}`.
    pub incoming: String,
    /// Questions raised but not answered by the passage. Requires `{passage}`.
    pub outgoing: String,
    /// Hop choice. Requires `{query}` and `{numbered_questions}`.
    pub reasoning: String,
    /// Answer generation. Requires `{context}` and `{question}`.
    pub answer: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        PromptTemplates {
            incoming: DEFAULT_INCOMING.into(),
            outgoing: DEFAULT_OUTGOING.into(),
            reasoning: DEFAULT_REASONING.into(),
            answer: DEFAULT_ANSWER.into(),
        }
    }
}

const REQUIRED: [(&str, &[&str]); 4] = [
    ("incoming.txt", &["{passage}"]),
    ("outgoing.txt", &["{passage}"]),
    ("reasoning.txt", &["{query}", "{numbered_questions}"]),
    ("answer.txt", &["{context}", "{question}"]),
];

impl PromptTemplates {
    /// Defaults overridden by `incoming.txt`, `outgoing.txt`, `reasoning.txt`
    /// and `answer.txt` where present in `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut t = Self::default();
        for (file, slot) in [
            ("incoming.txt", &mut t.incoming),
            ("outgoing.txt", &mut t.outgoing),
            ("reasoning.txt", &mut t.reasoning),
            ("answer.txt", &mut t.answer),
        ] {
            let path = dir.join(file);
            if path.is_file() {
                *slot = std::fs::read_to_string(&path)?;
            }
        }
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for ((file, needed), text) in
            REQUIRED
                .iter()
                .zip([&self.incoming, &self.outgoing, &self.reasoning, &self.answer])
        {
            for p in *needed {
                if !text.contains(p) {
                    return Err(Error::InvalidInput(format!("template {file} lacks {p}")));
                }
            }
        }
        Ok(())
    }

    pub fn render_incoming(&self, passage: &str, min_questions: usize) -> String {
        fill(
            &self.incoming,
            &[("passage", passage), ("min_questions", &min_questions.to_string())],
        )
    }

    pub fn render_outgoing(&self, passage: &str, min_questions: usize) -> String {
        fill(
            &self.outgoing,
            &[("passage", passage), ("min_questions", &min_questions.to_string())],
        )
    }

    /// Candidates are numbered from 1.
    pub fn render_reasoning<S: AsRef<str>>(&self, query: &str, questions: &[S]) -> String {
        let numbered = questions
            .iter()
            .enumerate()
            .map(|(i, q)| format!("{}. {}", i + 1, q.as_ref()))
            .collect::<Vec<_>>()
            .join("\n");
        fill(&self.reasoning, &[("query", query), ("numbered_questions", &numbered)])
    }

    pub fn render_answer<S: AsRef<str>>(&self, question: &str, passages: &[S]) -> String {
        let context = passages
            .iter()
            .enumerate()
            .map(|(i, p)| format!("[{}] {}", i + 1, p.as_ref()))
            .collect::<Vec<_>>()
            .join("\n");
        fill(&self.answer, &[("context", &context), ("question", question)])
    }

    /// Stable hash of all four templates, for build metadata.
    pub fn digest(&self) -> String {
        let mut bytes = Vec::new();
        for t in [&self.incoming, &self.outgoing, &self.reasoning, &self.answer] {
            bytes.extend_from_slice(&(t.len() as u64).to_le_bytes());
            bytes.extend_from_slice(t.as_bytes());
        }
        format!("{:016x}", crate::providers::fnv1a64(&bytes))
    }
}

/// Single-pass substitution, so placeholder-like text inside the values is
/// left untouched.
fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(start) = rest.find('{') {
        out.push_str(&rest[..start]);
        let after = &rest[start + 1..];
        let hit = after.find('}').and_then(|end| {
            let name = &after[..end];
            vars.iter().find(|(k, _)| *k == name).map(|(_, v)| (end, *v))
        });
        match hit {
            Some((end, value)) => {
                out.push_str(value);
                rest = &after[end + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        PromptTemplates::default().validate().unwrap();
    }

    #[test]
    fn fill_is_single_pass() {
        assert_eq!(fill("a {x} {y} {z}", &[("x", "{y}"), ("y", "2")]), "a {y} 2 {z}");
    }

    #[test]
    fn reasoning_numbers_from_one() {
        let p = PromptTemplates::default().render_reasoning("Q?", &["first?", "second?"]);
        assert!(p.contains("1. first?\n2. second?"));
        assert!(p.contains("Q?"));
    }

    #[test]
    fn load_dir_overrides_and_validates() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("incoming.txt"), "IN {passage}").unwrap();
        let t = PromptTemplates::load_dir(dir.path()).unwrap();
        assert_eq!(t.render_incoming("P", 2), "IN P");
        assert_eq!(t.outgoing, DEFAULT_OUTGOING);
        std::fs::write(dir.path().join("reasoning.txt"), "no placeholders").unwrap();
        assert!(PromptTemplates::load_dir(dir.path()).is_err());
    }
}
