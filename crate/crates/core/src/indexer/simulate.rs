//! Pseudo-query generation and parsing.

use crate::error::{Error, Result};
use crate::model::Passage;
use crate::providers::ChatModel;

use super::IndexConfig;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Simulation {
    pub out_questions: Vec<String>,
    pub in_questions: Vec<String>,
    pub llm_calls: usize,
    /// Non-fatal problems, e.g. fewer questions than the configured minimum.
    pub issues: Vec<String>,
}

/// Strips list markers (`-`, `*`, `•`, `1.`, `2)`, `Q3:`) from a line.
fn strip_marker(line: &str) -> &str {
    let line = line.trim();
    let line = line.trim_start_matches(['-', '*', '•']).trim_start();
    let body = line
        .strip_prefix(['Q', 'q'])
        .filter(|r| r.starts_with(|c: char| c.is_ascii_digit()))
        .unwrap_or(line);
    let digits = body.len() - body.trim_start_matches(|c: char| c.is_ascii_digit()).len();
    if digits > 0 {
        let rest = &body[digits..];
        if let Some(r) = rest.strip_prefix(['.', ')', ':']) {
            return r.trim();
        }
    }
    line
}

/// Parses one question per line. Returns the questions (deduplicated, in
/// order) and the number of non-empty lines that were not questions.
pub fn parse_questions(text: &str) -> (Vec<String>, usize) {
    let mut questions: Vec<String> = Vec::new();
    let mut rejected = 0;
    for raw in text.lines() {
        let line = strip_marker(raw);
        if line.is_empty() {
            continue;
        }
        if line.ends_with('?') {
            if !questions.iter().any(|q| q == line) {
                questions.push(line.to_string());
            }
        } else {
            rejected += 1;
        }
    }
    (questions, rejected)
}

struct Generated {
    questions: Vec<String>,
    calls: usize,
}

fn reminder(min: usize) -> String {
    format!(
        "\n\nReminder: output at least {min} questions, one per line, each ending with a question mark, and nothing else."
    )
}

/// Prompts until at least `min` questions are collected. A response with
/// non-question lines is re-prompted once even if the minimum is met.
fn generate(
    chat: &dyn ChatModel,
    passage_id: &str,
    prompt: &str,
    min: usize,
    config: &IndexConfig,
) -> Result<Generated> {
    let mut questions: Vec<String> = Vec::new();
    let mut calls = 0;
    for attempt in 0..=config.retry_limit {
        let p = if attempt == 0 {
            prompt.to_string()
        } else {
            format!("{prompt}{}", reminder(min))
        };
        let reply = chat.chat(&p).map_err(|e| Error::provider(passage_id, e))?;
        calls += 1;
        let (parsed, rejected) = parse_questions(&reply);
        for q in parsed {
            if !questions.contains(&q) {
                questions.push(q);
            }
        }
        if questions.len() >= min && (rejected == 0 || attempt >= 1) {
            break;
        }
    }
    if let Some(max) = config.max_questions {
        questions.truncate(max);
    }
    Ok(Generated { questions, calls })
}

/// Generates out-coming and in-coming questions for one passage.
///
/// A shortfall below the configured minimum is reported in `issues`; a
/// direction with no parseable question at all is an error.
pub fn simulate_queries(passage: &Passage, chat: &dyn ChatModel, config: &IndexConfig) -> Result<Simulation> {
    passage.validate()?;
    let t = &config.templates;
    let outs = generate(
        chat,
        &passage.id,
        &t.render_outgoing(&passage.text, config.min_out_questions),
        config.min_out_questions,
        config,
    )?;
    let ins = generate(
        chat,
        &passage.id,
        &t.render_incoming(&passage.text, config.min_in_questions),
        config.min_in_questions,
        config,
    )?;

    let mut issues = Vec::new();
    for (label, got, min) in [
        ("out-coming", outs.questions.len(), config.min_out_questions),
        ("in-coming", ins.questions.len(), config.min_in_questions),
    ] {
        if got == 0 {
            return Err(Error::Simulation {
                passage_id: passage.id.clone(),
                reason: format!("no parseable {label} questions"),
            });
        }
        if got < min {
            issues.push(format!("{got} {label} question(s), expected at least {min}"));
        }
    }
    Ok(Simulation {
        out_questions: outs.questions,
        in_questions: ins.questions,
        llm_calls: outs.calls + ins.calls,
        issues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::ScriptedChat;

    fn rose() -> Passage {
        Passage::new("rose", "Rose is the princess in the story The Frog Prince", "frog").unwrap()
    }

    fn config() -> IndexConfig {
        IndexConfig::default()
    }

    #[test]
    fn parse_strips_markers_and_rejects_statements() {
        let text = "1. Who is Rose?\n2) Where is the castle?\n- What is the frog?\nQ4: Why?\n\nHere are some questions\n* Who is Rose?";
        let (qs, rejected) = parse_questions(text);
        assert_eq!(
            qs,
            ["Who is Rose?", "Where is the castle?", "What is the frog?", "Why?"]
        );
        assert_eq!(rejected, 1);
    }

    #[test]
    fn parse_keeps_questions_starting_with_numbers() {
        let (qs, _) = parse_questions("1990 was the year of what event?");
        assert_eq!(qs, ["1990 was the year of what event?"]);
    }

    #[test]
    fn example_passage_questions() {
        let p = rose();
        let cfg = config();
        let chat = ScriptedChat::new()
            .respond_to(
                &cfg.templates.render_outgoing(&p.text, 4),
                "How is the frog connected to Rose?\nWho wrote The Frog Prince?\nWhat happens to the frog?\nWhere does the story take place?",
            )
            .respond_to(
                &cfg.templates.render_incoming(&p.text, 2),
                "What is the name of the princess?\nWhich story features Rose?",
            );
        let sim = simulate_queries(&p, &chat, &cfg).unwrap();
        assert!(sim
            .in_questions
            .iter()
            .any(|q| q == "What is the name of the princess?"));
        assert!(sim
            .out_questions
            .iter()
            .any(|q| q == "How is the frog connected to Rose?"));
        assert_eq!((sim.out_questions.len(), sim.in_questions.len()), (4, 2));
        assert!(sim.issues.is_empty());
        assert_eq!(sim.llm_calls, 2);
    }

    #[test]
    fn shortfall_reprompts_then_records_issue() {
        let p = rose();
        let cfg = config();
        let chat = ScriptedChat::new()
            .rule(["cannot answer"], "Who is the frog?")
            .rule(["answered by the passage"], "Who is Rose?\nWhat is Rose?");
        let sim = simulate_queries(&p, &chat, &cfg).unwrap();
        assert_eq!(sim.out_questions, ["Who is the frog?"]);
        assert_eq!(sim.issues.len(), 1);
        assert_eq!(sim.llm_calls, 1 + cfg.retry_limit + 1);
    }

    #[test]
    fn unparseable_output_is_a_simulation_error() {
        let chat = ScriptedChat::new().default_response("I cannot help with that.");
        let err = simulate_queries(&rose(), &chat, &config()).unwrap_err();
        assert!(matches!(err, Error::Simulation { .. }));
    }

    #[test]
    fn non_question_lines_trigger_one_reprompt() {
        let p = rose();
        let cfg = config();
        let base_out = cfg.templates.render_outgoing(&p.text, 4);
        let chat = ScriptedChat::new()
            .respond_to(&base_out, "Sure! Here they are:\nA?\nB?\nC?\nD?")
            .rule(["cannot answer", "Reminder"], "A?\nB?\nC?\nD?\nE?")
            .rule(["answered by the passage"], "X?\nY?");
        let sim = simulate_queries(&p, &chat, &cfg).unwrap();
        assert_eq!(sim.out_questions, ["A?", "B?", "C?", "D?", "E?"]);
        assert_eq!(sim.llm_calls, 3);
    }

    #[test]
    fn max_questions_truncates() {
        let cfg = IndexConfig {
            max_questions: Some(2),
            min_out_questions: 1,
            ..config()
        };
        let chat = ScriptedChat::new().default_response("A?\nB?\nC?");
        let sim = simulate_queries(&rose(), &chat, &cfg).unwrap();
        assert_eq!(sim.out_questions, ["A?", "B?"]);
    }
}
