//! Evaluation datasets and loaders for common multi-hop QA formats.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Passage;
use crate::providers::fnv1a64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalExample {
    pub id: String,
    pub question: String,
    #[serde(default)]
    pub answers: Vec<String>,
    /// Ids of the passages needed to answer the question.
    pub supporting: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    #[serde(default)]
    pub name: String,
    pub passages: Vec<Passage>,
    pub examples: Vec<EvalExample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetFormat {
    /// Chosen from the file contents.
    #[default]
    Auto,
    /// `{"passages": [...], "examples": [...]}`.
    Native,
    /// One example per line, each with its own `passages`.
    Jsonl,
    /// HotpotQA and 2WikiMultihopQA: `context` of `[title, sentences]` and
    /// `supporting_facts` of `[title, sentence index]`.
    Hotpot,
    /// MuSiQue: one example per line with `paragraphs`.
    Musique,
}

impl std::str::FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "native" | "json" => Ok(Self::Native),
            "jsonl" => Ok(Self::Jsonl),
            "hotpot" | "hotpotqa" | "2wiki" => Ok(Self::Hotpot),
            "musique" => Ok(Self::Musique),
            other => Err(Error::EvalInput(format!("unknown dataset format `{other}`"))),
        }
    }
}

impl Dataset {
    /// Checks that ids are unique and every example is answerable from the
    /// corpus.
    pub fn validate(&self) -> Result<()> {
        let mut ids = BTreeMap::new();
        for p in &self.passages {
            p.validate()?;
            if ids.insert(p.id.as_str(), ()).is_some() {
                return Err(Error::EvalInput(format!("duplicate passage id `{}`", p.id)));
            }
        }
        if self.examples.is_empty() {
            return Err(Error::EvalInput("dataset has no examples".into()));
        }
        let mut example_ids = BTreeMap::new();
        for ex in &self.examples {
            if example_ids.insert(ex.id.as_str(), ()).is_some() {
                return Err(Error::EvalInput(format!("duplicate example id `{}`", ex.id)));
            }
            if ex.question.trim().is_empty() {
                return Err(Error::EvalInput(format!("example `{}` has an empty question", ex.id)));
            }
            if ex.supporting.is_empty() {
                return Err(Error::EvalInput(format!(
                    "example `{}` has no supporting passages",
                    ex.id
                )));
            }
            if let Some(missing) = ex.supporting.iter().find(|s| !ids.contains_key(s.as_str())) {
                return Err(Error::EvalInput(format!(
                    "example `{}` cites unknown passage `{missing}`",
                    ex.id
                )));
            }
        }
        Ok(())
    }
}

fn parse_err(path: &Path, message: impl ToString) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

/// Collects passages by id; identical repeats are merged, conflicting ones
/// rejected.
#[derive(Default)]
struct Corpus {
    order: Vec<String>,
    by_id: BTreeMap<String, Passage>,
}

impl Corpus {
    fn add(&mut self, p: Passage) -> Result<()> {
        match self.by_id.get(&p.id) {
            Some(existing) if existing.text != p.text => Err(Error::EvalInput(format!(
                "passage `{}` appears with different texts",
                p.id
            ))),
            Some(_) => Ok(()),
            None => {
                self.order.push(p.id.clone());
                self.by_id.insert(p.id.clone(), p);
                Ok(())
            }
        }
    }

    fn into_vec(mut self) -> Vec<Passage> {
        self.order.iter().filter_map(|id| self.by_id.remove(id)).collect()
    }
}

#[derive(Deserialize)]
struct JsonlRow {
    id: String,
    question: String,
    #[serde(default)]
    answers: Vec<String>,
    supporting: Vec<String>,
    passages: Vec<Passage>,
}

#[derive(Deserialize)]
struct HotpotRow {
    #[serde(alias = "id")]
    _id: String,
    question: String,
    #[serde(default)]
    answer: Option<String>,
    supporting_facts: Vec<(String, usize)>,
    context: Vec<(String, Vec<String>)>,
}

#[derive(Deserialize)]
struct MusiqueParagraph {
    title: String,
    paragraph_text: String,
    #[serde(default)]
    is_supporting: bool,
}

#[derive(Deserialize)]
struct MusiqueRow {
    id: String,
    question: String,
    #[serde(default)]
    answer: Option<String>,
    #[serde(default)]
    answer_aliases: Vec<String>,
    paragraphs: Vec<MusiqueParagraph>,
}

fn json_lines<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| parse_err(path, format!("line {}: {e}", i + 1))))
        .collect()
}

fn from_jsonl(rows: Vec<JsonlRow>) -> Result<Dataset> {
    let mut corpus = Corpus::default();
    let mut examples = Vec::new();
    for row in rows {
        for p in row.passages {
            corpus.add(p)?;
        }
        examples.push(EvalExample {
            id: row.id,
            question: row.question,
            answers: row.answers,
            supporting: row.supporting,
        });
    }
    Ok(Dataset {
        name: String::new(),
        passages: corpus.into_vec(),
        examples,
    })
}

/// Sentence-level passages with ids `title#index`.
fn from_hotpot(rows: Vec<HotpotRow>) -> Result<Dataset> {
    let mut corpus = Corpus::default();
    let mut examples = Vec::new();
    for row in rows {
        for (title, sentences) in &row.context {
            for (i, s) in sentences.iter().enumerate() {
                if s.trim().is_empty() {
                    continue;
                }
                corpus.add(Passage::new(format!("{title}#{i}"), s.trim(), title.as_str())?)?;
            }
        }
        let mut supporting: Vec<String> = row.supporting_facts.iter().map(|(t, i)| format!("{t}#{i}")).collect();
        supporting.dedup();
        examples.push(EvalExample {
            id: row._id,
            question: row.question,
            answers: row.answer.into_iter().collect(),
            supporting,
        });
    }
    Ok(Dataset {
        name: String::new(),
        passages: corpus.into_vec(),
        examples,
    })
}

/// Paragraph-level passages with ids `title#<text hash>`.
fn from_musique(rows: Vec<MusiqueRow>) -> Result<Dataset> {
    let mut corpus = Corpus::default();
    let mut examples = Vec::new();
    for row in rows {
        let mut supporting = Vec::new();
        for p in &row.paragraphs {
            let id = format!("{}#{:08x}", p.title, fnv1a64(p.paragraph_text.as_bytes()) as u32);
            corpus.add(Passage::new(id.clone(), p.paragraph_text.trim(), p.title.as_str())?)?;
            if p.is_supporting {
                supporting.push(id);
            }
        }
        let mut answers: Vec<String> = row.answer.into_iter().collect();
        answers.extend(row.answer_aliases);
        examples.push(EvalExample {
            id: row.id,
            question: row.question,
            answers,
            supporting,
        });
    }
    Ok(Dataset {
        name: String::new(),
        passages: corpus.into_vec(),
        examples,
    })
}

fn detect(text: &str) -> DatasetFormat {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        return DatasetFormat::Hotpot;
    }
    if let Ok(serde_json::Value::Object(obj)) = serde_json::from_str::<serde_json::Value>(text) {
        if obj.contains_key("examples") {
            return DatasetFormat::Native;
        }
    }
    let first = trimmed.lines().next().unwrap_or("");
    if first.contains("\"paragraphs\"") {
        DatasetFormat::Musique
    } else {
        DatasetFormat::Jsonl
    }
}

/// Parses dataset text. `path` is only used in error messages.
pub fn parse_dataset(text: &str, format: DatasetFormat, path: &Path) -> Result<Dataset> {
    let format = match format {
        DatasetFormat::Auto => detect(text),
        f => f,
    };
    let mut ds = match format {
        DatasetFormat::Native => serde_json::from_str(text).map_err(|e| parse_err(path, e))?,
        DatasetFormat::Jsonl => from_jsonl(json_lines(path, text)?)?,
        DatasetFormat::Hotpot => from_hotpot(serde_json::from_str(text).map_err(|e| parse_err(path, e))?)?,
        DatasetFormat::Musique => from_musique(json_lines(path, text)?)?,
        DatasetFormat::Auto => unreachable!("resolved above"),
    };
    if ds.name.is_empty() {
        ds.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    ds.validate()?;
    Ok(ds)
}

pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    parse_dataset(&text, format, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("test.json")
    }

    #[test]
    fn native_round_trip() {
        let ds = Dataset {
            name: "tiny".into(),
            passages: vec![Passage::new("a", "Alpha text.", "d").unwrap()],
            examples: vec![EvalExample {
                id: "q1".into(),
                question: "What is alpha?".into(),
                answers: vec!["text".into()],
                supporting: vec!["a".into()],
            }],
        };
        let text = serde_json::to_string(&ds).unwrap();
        assert_eq!(parse_dataset(&text, DatasetFormat::Auto, p()).unwrap(), ds);
    }

    #[test]
    fn hotpot_sentences_become_passages() {
        let text = r#"[{"_id": "h1", "question": "Where was the author of X born?", "answer": "Hanau",
            "supporting_facts": [["X", 0], ["Grimm", 1]],
            "context": [["X", ["X is a tale by Grimm.", "It is short."]], ["Grimm", ["Grimm was a writer.", "Grimm was born in Hanau."]]]}]"#;
        let ds = parse_dataset(text, DatasetFormat::Auto, p()).unwrap();
        assert_eq!(ds.passages.len(), 4);
        assert_eq!(ds.passages[3].id, "Grimm#1");
        assert_eq!(ds.passages[3].doc_id, "Grimm");
        assert_eq!(ds.examples[0].supporting, ["X#0", "Grimm#1"]);
        assert_eq!(ds.examples[0].answers, ["Hanau"]);
    }

    #[test]
    fn musique_paragraphs() {
        let text = concat!(
            r#"{"id": "m1", "question": "Q?", "answer": "A", "answer_aliases": ["a1"], "paragraphs": [{"idx": 0, "title": "T", "paragraph_text": "Para one.", "is_supporting": true}, {"idx": 1, "title": "U", "paragraph_text": "Para two.", "is_supporting": false}]}"#,
            "\n",
            r#"{"id": "m2", "question": "Q2?", "answer": "B", "paragraphs": [{"idx": 0, "title": "T", "paragraph_text": "Para one.", "is_supporting": true}]}"#
        );
        let ds = parse_dataset(text, DatasetFormat::Auto, p()).unwrap();
        assert_eq!(ds.passages.len(), 2);
        assert_eq!(ds.examples[0].answers, ["A", "a1"]);
        assert_eq!(ds.examples[1].supporting, ds.examples[0].supporting);
    }

    #[test]
    fn jsonl_examples_share_passages() {
        let text = concat!(
            r#"{"id": "1", "question": "Q?", "answers": ["x"], "supporting": ["a"], "passages": [{"id": "a", "text": "A."}]}"#,
            "\n",
            r#"{"id": "2", "question": "R?", "supporting": ["a", "b"], "passages": [{"id": "a", "text": "A."}, {"id": "b", "text": "B."}]}"#
        );
        let ds = parse_dataset(text, DatasetFormat::Jsonl, p()).unwrap();
        assert_eq!(ds.passages.len(), 2);
    }

    #[test]
    fn invalid_datasets_are_rejected() {
        let conflicting = concat!(
            r#"{"id": "1", "question": "Q?", "supporting": ["a"], "passages": [{"id": "a", "text": "A."}]}"#,
            "\n",
            r#"{"id": "2", "question": "Q?", "supporting": ["a"], "passages": [{"id": "a", "text": "Other."}]}"#
        );
        assert!(matches!(
            parse_dataset(conflicting, DatasetFormat::Jsonl, p()),
            Err(Error::EvalInput(_))
        ));
        let dangling = r#"{"passages": [{"id": "a", "text": "A."}], "examples": [{"id": "1", "question": "Q?", "supporting": ["zz"]}]}"#;
        assert!(matches!(
            parse_dataset(dangling, DatasetFormat::Auto, p()),
            Err(Error::EvalInput(_))
        ));
        assert!(matches!(
            parse_dataset("{not json", DatasetFormat::Native, p()),
            Err(Error::Parse { .. })
        ));
        assert!("xml".parse::<DatasetFormat>().is_err());
    }
}
