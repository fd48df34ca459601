//! Generated corpus of three-passage fact chains with distractors.
//!
//! Chain `i` links an artefact to its founder (head), the founder to an
//! employer (middle) and the employer to a city (tail). A gazette passage
//! mentions the artefact and asks about its founder, and a fair passage
//! hangs off the city. Pseudo-queries are scripted so each passage's
//! out-coming questions are answered by the next passage in the chain.
//! Only the artefact name ties a query to its chain: no pseudo-query
//! shares the query's generic words.

use std::sync::Arc;

use hopgraph::evalkit::{Dataset, EvalExample};
use hopgraph::indexer::IndexConfig;
use hopgraph::providers::ScriptedChat;
use hopgraph::{build_graph, Passage, PassageGraph, PromptTemplates, Providers};

pub const CHAINS: usize = 50;
pub const DIM: usize = 512;

struct Names {
    artefact: String,
    founder: String,
    employer: String,
    city: String,
    gazette: String,
    fair: String,
}

fn names(i: usize) -> Names {
    Names {
        artefact: format!("Zerith{i}"),
        founder: format!("Malvo{i}"),
        employer: format!("Corvix{i}"),
        city: format!("Tallin{i}"),
        gazette: format!("Quill{i}"),
        fair: format!("Brisk{i}"),
    }
}

/// (id, text, in-coming questions, out-coming questions)
type Spec = (String, String, Vec<String>, Vec<String>);

fn chain(i: usize) -> Vec<Spec> {
    let Names {
        artefact: a,
        founder: b,
        employer: c,
        city: d,
        gazette: e,
        fair: f,
    } = names(i);
    let p = format!("c{i:02}");
    vec![
        (
            format!("{p}-head"),
            format!("{a} was created by its founder {b}."),
            vec![format!("Who created {a}?"), format!("Who designed {a}?")],
            vec![
                format!("Who pays {b}?"),
                format!("Which company employs {b}?"),
                format!("Where does {b} work?"),
                format!("Who hires {b}?"),
            ],
        ),
        (
            format!("{p}-mid"),
            format!("{b} has {c} as employer."),
            vec![format!("Who pays {b}?"), format!("Which company employs {b}?")],
            vec![
                format!("Where is {c} based?"),
                format!("Where is {c} located?"),
                format!("What is the base of {c}?"),
                format!("Which town is home to {c}?"),
            ],
        ),
        (
            format!("{p}-tail"),
            format!("{c} has headquarters in {d}."),
            vec![format!("Where is {c} based?"), format!("What company is based in {d}?")],
            vec![
                format!("What is {d} known for?"),
                format!("Which fair takes place in {d}?"),
                format!("How large is {d}?"),
                format!("Where is {d}?"),
            ],
        ),
        (
            format!("{p}-gazette"),
            format!("{a} appeared in the {e} gazette."),
            vec![
                format!("Which gazette featured {a}?"),
                format!("What did the {e} gazette cover?"),
            ],
            vec![
                format!("Who created {a}?"),
                format!("Who designed {a}?"),
                format!("Who made {a}?"),
                format!("Which person built {a}?"),
            ],
        ),
        (
            format!("{p}-fair"),
            format!("{d} is known for its {f} fair."),
            vec![
                format!("What is {d} known for?"),
                format!("Which fair takes place in {d}?"),
            ],
            vec![
                format!("Who organizes the {f} fair?"),
                format!("When is the {f} fair held?"),
                format!("Who visits the {f} fair?"),
                format!("What is sold at the {f} fair?"),
            ],
        ),
    ]
}

pub struct Synthetic {
    pub graph: PassageGraph,
    pub dataset: Dataset,
    pub providers: Providers,
}

/// Builds the corpus through the real indexer with a scripted chat model.
/// The reasoner always picks the first candidate.
pub fn build() -> Synthetic {
    let config = IndexConfig::default();
    let templates = PromptTemplates::default();
    let mut chat = ScriptedChat::new().default_response("1");
    let mut passages = Vec::new();
    let mut examples = Vec::new();
    for i in 0..CHAINS {
        let specs = chain(i);
        for (id, text, ins, outs) in &specs {
            chat = chat
                .respond_to(
                    &templates.render_incoming(text, config.min_in_questions),
                    ins.join("\n"),
                )
                .respond_to(
                    &templates.render_outgoing(text, config.min_out_questions),
                    outs.join("\n"),
                );
            passages.push(Passage::new(id.clone(), text.clone(), format!("chain{i:02}")).unwrap());
        }
        let n = names(i);
        examples.push(EvalExample {
            id: format!("q{i:02}"),
            question: format!(
                "Which city hosts the headquarters of the employer of the founder of {}?",
                n.artefact
            ),
            answers: vec![n.city],
            supporting: specs[..3].iter().map(|s| s.0.clone()).collect(),
        });
    }
    let providers = Providers::offline(DIM).with_chat(Arc::new(chat));
    let (graph, report) = build_graph(&passages, &config, &providers).expect("synthetic corpus builds");
    assert!(report.failures.is_empty(), "{:?}", report.failures);
    Synthetic {
        graph,
        dataset: Dataset {
            name: "synthetic-chains".into(),
            passages,
            examples,
        },
        providers,
    }
}
