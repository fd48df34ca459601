//! Canonical little-endian binary encoding of a [`PassageGraph`].
//!
//! Layout (all integers `u64` LE unless noted, strings are a `u64` byte
//! length followed by UTF-8 bytes, floats are IEEE-754 bits as `u64` LE):
//!
//! ```text
//! graph      := dim edge_cap vertex_count vertex* candidate_count edge* edge_count edge*
//! vertex     := id text doc_id keywords embedding out_count triplet* in_count triplet*
//! triplet    := question keywords embedding direction(u8: 0 out, 1 in) ordinal
//! edge       := source target question keywords embedding sim_score out_ordinal in_ordinal
//! keywords   := count str*
//! embedding  := f64 * dim
//! ```
//!
//! Vertices are written in ascending id order and retained edges in
//! canonical order, so equal graphs always encode to equal bytes.

use crate::error::{Error, Result};
use crate::graph::PassageGraph;
use crate::model::{Direction, Edge, Embedding, Keywords, Passage, QueryTriplet, Vertex};

#[derive(Default)]
pub(crate) struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub(crate) fn into_inner(self) -> Vec<u8> {
        self.buf
    }

    pub(crate) fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub(crate) fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }

    fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }

    pub(crate) fn str(&mut self, s: &str) {
        self.usize(s.len());
        self.buf.extend_from_slice(s.as_bytes());
    }

    fn keywords(&mut self, k: &Keywords) {
        self.usize(k.len());
        for t in k.iter() {
            self.str(t);
        }
    }

    fn embedding(&mut self, e: &Embedding) {
        for v in e.values() {
            self.f64(*v);
        }
    }

    fn triplet(&mut self, t: &QueryTriplet) {
        self.str(&t.question);
        self.keywords(&t.keywords);
        self.embedding(&t.embedding);
        self.u8(match t.direction {
            Direction::OutComing => 0,
            Direction::InComing => 1,
        });
        self.usize(t.ordinal);
    }

    fn edge(&mut self, e: &Edge) {
        self.str(&e.source_id);
        self.str(&e.target_id);
        self.str(&e.question);
        self.keywords(&e.keywords);
        self.embedding(&e.embedding);
        self.f64(e.sim_score);
        self.usize(e.out_ordinal);
        self.usize(e.in_ordinal);
    }

    fn vertex(&mut self, v: &Vertex) {
        self.str(&v.passage.id);
        self.str(&v.passage.text);
        self.str(&v.passage.doc_id);
        self.keywords(&v.passage_keywords);
        self.embedding(&v.passage_embedding);
        self.usize(v.out_triplets.len());
        for t in &v.out_triplets {
            self.triplet(t);
        }
        self.usize(v.in_triplets.len());
        for t in &v.in_triplets {
            self.triplet(t);
        }
    }

    pub(crate) fn graph(&mut self, g: &PassageGraph) {
        self.usize(g.dim);
        self.usize(g.edge_cap);
        self.usize(g.vertices.len());
        for v in g.vertices.values() {
            self.vertex(v);
        }
        self.usize(g.candidates.len());
        for e in &g.candidates {
            self.edge(e);
        }
        self.usize(g.edge_count());
        for e in g.edges() {
            self.edge(e);
        }
    }
}

pub(crate) fn encode_graph(g: &PassageGraph) -> Vec<u8> {
    let mut w = Writer::default();
    w.graph(g);
    w.into_inner()
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    pub(crate) fn is_exhausted(&self) -> bool {
        self.pos == self.buf.len()
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|end| *end <= self.buf.len())
            .ok_or_else(|| Error::Format(format!("unexpected end of data at byte {}", self.pos)))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    pub(crate) fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        let bytes: [u8; 8] = self.take(8)?.try_into().expect("slice of length 8");
        Ok(u64::from_le_bytes(bytes))
    }

    fn usize(&mut self) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| Error::Format(format!("length {v} out of range")))
    }

    /// A length that must fit in the remaining bytes at `min_item` bytes per item.
    fn count(&mut self, min_item: usize) -> Result<usize> {
        let n = self.usize()?;
        let remaining = self.buf.len() - self.pos;
        if n.saturating_mul(min_item) > remaining {
            return Err(Error::Format(format!("count {n} exceeds remaining data")));
        }
        Ok(n)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    pub(crate) fn string(&mut self) -> Result<String> {
        let n = self.count(1)?;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|e| Error::Format(format!("invalid UTF-8: {e}")))
    }

    fn keywords(&mut self) -> Result<Keywords> {
        let n = self.count(8)?;
        let mut terms = Vec::with_capacity(n);
        for _ in 0..n {
            terms.push(self.string()?);
        }
        Ok(Keywords::new(terms))
    }

    fn embedding(&mut self, dim: usize) -> Result<Embedding> {
        if dim.saturating_mul(8) > self.buf.len() - self.pos {
            return Err(Error::Format("embedding exceeds remaining data".into()));
        }
        let values = (0..dim).map(|_| self.f64()).collect::<Result<Vec<_>>>()?;
        Embedding::new(values).map_err(|e| Error::Format(e.to_string()))
    }

    fn triplet(&mut self, dim: usize) -> Result<QueryTriplet> {
        let question = self.string()?;
        let keywords = self.keywords()?;
        let embedding = self.embedding(dim)?;
        let direction = match self.u8()? {
            0 => Direction::OutComing,
            1 => Direction::InComing,
            other => return Err(Error::Format(format!("bad direction tag {other}"))),
        };
        Ok(QueryTriplet {
            question,
            keywords,
            embedding,
            direction,
            ordinal: self.usize()?,
        })
    }

    fn edge(&mut self, dim: usize) -> Result<Edge> {
        Ok(Edge {
            source_id: self.string()?,
            target_id: self.string()?,
            question: self.string()?,
            keywords: self.keywords()?,
            embedding: self.embedding(dim)?,
            sim_score: self.f64()?,
            out_ordinal: self.usize()?,
            in_ordinal: self.usize()?,
        })
    }

    fn vertex(&mut self, dim: usize) -> Result<Vertex> {
        let passage = Passage {
            id: self.string()?,
            text: self.string()?,
            doc_id: self.string()?,
        };
        let passage_keywords = self.keywords()?;
        let passage_embedding = self.embedding(dim)?;
        let n_out = self.count(8)?;
        let out_triplets = (0..n_out).map(|_| self.triplet(dim)).collect::<Result<_>>()?;
        let n_in = self.count(8)?;
        let in_triplets = (0..n_in).map(|_| self.triplet(dim)).collect::<Result<_>>()?;
        Ok(Vertex {
            passage,
            out_triplets,
            in_triplets,
            passage_keywords,
            passage_embedding,
        })
    }

    pub(crate) fn graph(&mut self) -> Result<PassageGraph> {
        let dim = self.usize()?;
        if dim == 0 {
            return Err(Error::Format("embedding dimension is zero".into()));
        }
        let edge_cap = self.usize()?;
        let mut graph = PassageGraph::new(dim);
        let n_vertices = self.count(8)?;
        for _ in 0..n_vertices {
            let v = self.vertex(dim)?;
            graph.insert_vertex(v).map_err(|e| Error::Format(e.to_string()))?;
        }
        let n_candidates = self.count(8)?;
        let mut candidates = Vec::with_capacity(n_candidates);
        for _ in 0..n_candidates {
            let e = self.edge(dim)?;
            graph.validate_edge(&e).map_err(|e| Error::Format(e.to_string()))?;
            candidates.push(e);
        }
        let n_edges = self.count(8)?;
        if n_edges > edge_cap {
            return Err(Error::Format(format!(
                "{n_edges} edges exceed the stored cap of {edge_cap}"
            )));
        }
        let mut retained = Vec::with_capacity(n_edges);
        for _ in 0..n_edges {
            let e = self.edge(dim)?;
            graph.validate_edge(&e).map_err(|e| Error::Format(e.to_string()))?;
            retained.push(e);
        }
        graph.set_edges(candidates, retained, edge_cap);
        Ok(graph)
    }
}

#[cfg(test)]
pub(crate) fn decode_graph(bytes: &[u8]) -> Result<PassageGraph> {
    let mut r = Reader::new(bytes);
    let g = r.graph()?;
    if !r.is_exhausted() {
        return Err(Error::Format("trailing bytes after graph".into()));
    }
    Ok(g)
}
