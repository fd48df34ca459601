use serde::{Deserialize, Serialize};

use crate::graph::PassageGraph;

/// Corpus and graph statistics in the shape of a dataset summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub vertices: usize,
    pub edges: usize,
    pub avg_out_degree: f64,
    pub avg_passage_chars: f64,
    pub avg_out_questions: f64,
    pub avg_in_questions: f64,
    pub documents: usize,
    pub dim: usize,
}

pub fn stats(graph: &PassageGraph) -> GraphStats {
    let n = graph.vertex_count();
    let mean = |total: usize| if n == 0 { 0.0 } else { total as f64 / n as f64 };
    let chars: usize = graph.vertices().map(|v| v.passage.text.chars().count()).sum();
    let outs: usize = graph.vertices().map(|v| v.out_triplets.len()).sum();
    let ins: usize = graph.vertices().map(|v| v.in_triplets.len()).sum();
    let mut docs: Vec<&str> = graph.vertices().map(|v| v.passage.doc_id.as_str()).collect();
    docs.sort_unstable();
    docs.dedup();
    GraphStats {
        vertices: n,
        edges: graph.edge_count(),
        avg_out_degree: mean(graph.edge_count()),
        avg_passage_chars: mean(chars),
        avg_out_questions: mean(outs),
        avg_in_questions: mean(ins),
        documents: docs.len(),
        dim: graph.dim(),
    }
}

impl std::fmt::Display for GraphStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{:<22}{}", "vertices", self.vertices)?;
        writeln!(f, "{:<22}{}", "edges", self.edges)?;
        writeln!(f, "{:<22}{:.2}", "avg out-degree", self.avg_out_degree)?;
        writeln!(f, "{:<22}{:.2}", "avg text length", self.avg_passage_chars)?;
        writeln!(f, "{:<22}{:.2}", "avg out questions", self.avg_out_questions)?;
        writeln!(f, "{:<22}{:.2}", "avg in questions", self.avg_in_questions)?;
        writeln!(f, "{:<22}{}", "documents", self.documents)?;
        write!(f, "{:<22}{}", "embedding dim", self.dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Edge, Embedding, Keywords, Passage, Vertex};

    fn graph(n: usize, edges: &[(usize, usize)]) -> PassageGraph {
        let mut g = PassageGraph::new(1);
        for i in 0..n {
            g.insert_vertex(Vertex {
                passage: Passage::new(format!("v{i}"), "abcd", format!("d{}", i % 2)).unwrap(),
                out_triplets: vec![],
                in_triplets: vec![],
                passage_keywords: Keywords::empty(),
                passage_embedding: Embedding::new(vec![1.0]).unwrap(),
            })
            .unwrap();
        }
        for (k, (s, t)) in edges.iter().enumerate() {
            g.insert_edge(Edge {
                source_id: format!("v{s}"),
                target_id: format!("v{t}"),
                question: "q?".into(),
                keywords: Keywords::empty(),
                embedding: Embedding::new(vec![1.0]).unwrap(),
                sim_score: 0.5,
                out_ordinal: k,
                in_ordinal: 0,
            })
            .unwrap();
        }
        g
    }

    #[test]
    fn average_out_degree() {
        let s = stats(&graph(4, &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 0), (3, 1)]));
        assert_eq!(s.vertices, 4);
        assert_eq!(s.edges, 6);
        assert_eq!(s.avg_out_degree, 1.5);
        assert_eq!(s.avg_passage_chars, 4.0);
        assert_eq!(s.documents, 2);
    }

    #[test]
    fn edgeless_and_empty_graphs() {
        assert_eq!(stats(&graph(3, &[])).avg_out_degree, 0.0);
        let empty = stats(&PassageGraph::new(4));
        assert_eq!(empty.avg_out_degree, 0.0);
        assert_eq!(empty.avg_passage_chars, 0.0);
    }
}
