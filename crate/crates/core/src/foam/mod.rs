//! Cell 2-complexes stored as group presentations.
//!
//! Edges are generators and faces are relator words. A foam may carry several
//! vertices, in which case every face word must trace a closed directed path;
//! analysis code works on the one-vertex form returned by [`reduce`].

mod builtin;
mod homology;
mod parse;
mod tietze;

use std::collections::VecDeque;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use builtin::{builtin, genus, random_presentation, CATALOGUE};
pub use homology::{cellular_homology, integer_rank, CellularReport};
pub use parse::parse_foam;
pub use tietze::{tietze1_collapse, tietze1_expand, tietze2_add_face};

/// One letter `e^{±1}` of a face word. `edge` indexes [`Foam::edges`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub edge: usize,
    pub exponent: i8,
}

impl Letter {
    pub fn new(edge: usize, exponent: i8) -> Self {
        assert!(exponent == 1 || exponent == -1, "exponent must be ±1");
        Letter { edge, exponent }
    }

    pub fn inverse(self) -> Self {
        Letter {
            edge: self.edge,
            exponent: -self.exponent,
        }
    }
}

/// Boundary word of a face, read left to right.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FaceWord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub letters: Vec<Letter>,
}

impl FaceWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        FaceWord { name: None, letters }
    }

    pub fn named(name: impl Into<String>, letters: Vec<Letter>) -> Self {
        FaceWord {
            name: Some(name.into()),
            letters,
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// The inverse word, without a name.
    pub fn inverse(&self) -> FaceWord {
        FaceWord::new(self.letters.iter().rev().map(|l| l.inverse()).collect())
    }
}

/// A directed edge between two vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub source: usize,
    pub target: usize,
}

impl Edge {
    /// A loop at vertex 0.
    pub fn looped(id: impl Into<String>) -> Self {
        Edge {
            id: id.into(),
            source: 0,
            target: 0,
        }
    }
}

/// Cell 2-complex given by vertices, directed edges and face words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Foam {
    pub name: String,
    pub vertices: usize,
    pub edges: Vec<Edge>,
    pub faces: Vec<FaceWord>,
}

impl Foam {
    /// Build and validate a foam.
    pub fn new(name: impl Into<String>, vertices: usize, edges: Vec<Edge>, faces: Vec<FaceWord>) -> Result<Self> {
        let foam = Foam {
            name: name.into(),
            vertices,
            edges,
            faces,
        };
        foam.validate()?;
        Ok(foam)
    }

    /// One-vertex foam from edge names and words over them.
    pub fn reduced(name: impl Into<String>, edges: &[&str], faces: Vec<FaceWord>) -> Result<Self> {
        Foam::new(name, 1, edges.iter().map(|e| Edge::looped(*e)).collect(), faces)
    }

    fn validate(&self) -> Result<()> {
        if self.vertices == 0 {
            return Err(Error::InvalidParameter("a foam needs at least one vertex".into()));
        }
        for (i, e) in self.edges.iter().enumerate() {
            if !parse::is_identifier(&e.id) {
                return Err(Error::InvalidParameter(format!("bad edge identifier `{}`", e.id)));
            }
            if self.edges[..i].iter().any(|f| f.id == e.id) {
                return Err(Error::DuplicateEdge(e.id.clone()));
            }
            if e.source >= self.vertices || e.target >= self.vertices {
                return Err(Error::InvalidParameter(format!(
                    "edge `{}` references a vertex outside 0..{}",
                    e.id, self.vertices
                )));
            }
        }
        for (fi, f) in self.faces.iter().enumerate() {
            for l in &f.letters {
                if l.edge >= self.edges.len() || !(l.exponent == 1 || l.exponent == -1) {
                    return Err(Error::InvalidParameter(format!("face {fi} has an invalid letter")));
                }
            }
            self.check_chaining(fi, &f.letters)?;
        }
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(())
    }

    pub(crate) fn check_chaining(&self, face: usize, letters: &[Letter]) -> Result<()> {
        if self.vertices == 1 || letters.is_empty() {
            return Ok(());
        }
        let ends = |l: &Letter| {
            let e = &self.edges[l.edge];
            if l.exponent > 0 {
                (e.source, e.target)
            } else {
                (e.target, e.source)
            }
        };
        let start = ends(&letters[0]).0;
        let mut at = start;
        for (i, l) in letters.iter().enumerate() {
            let (s, t) = ends(l);
            if s != at {
                return Err(Error::NonChainingWord { face, position: i });
            }
            at = t;
        }
        if at != start {
            return Err(Error::NonChainingWord {
                face,
                position: letters.len(),
            });
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; self.vertices];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Undirected adjacency: vertex -> (neighbour, edge index).
    pub(crate) fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertices];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.source].push((e.target, i));
            if e.source != e.target {
                adj[e.target].push((e.source, i));
            }
        }
        adj
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    /// `V − E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    pub fn is_reduced(&self) -> bool {
        self.vertices == 1
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    /// Parse a word such as `a b^-1` over this foam's edges.
    pub fn word(&self, text: &str) -> Result<FaceWord> {
        parse::parse_word(self, text)
    }

    /// Render a word in file syntax.
    pub fn word_string(&self, word: &FaceWord) -> String {
        let mut s = String::new();
        for (i, l) in word.letters.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(&self.edges[l.edge].id);
            if l.exponent < 0 {
                s.push_str("^-1");
            }
        }
        s
    }

    /// Number of occurrences of `edge` in face `face`, and their net exponent.
    pub fn occurrences(&self, face: usize, edge: usize) -> (usize, i64) {
        self.faces[face]
            .letters
            .iter()
            .filter(|l| l.edge == edge)
            .fold((0, 0), |(n, s), l| (n + 1, s + l.exponent as i64))
    }

    /// Canonical text form, accepted by [`parse_foam`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.name.is_empty() {
            let _ = writeln!(out, "name: {}", self.name);
        }
        if self.vertices > 1 {
            let _ = writeln!(out, "vertices: {}", self.vertices);
        }
        let ids: Vec<&str> = self.edges.iter().map(|e| e.id.as_str()).collect();
        let _ = writeln!(out, "edges: {}", ids.join(" "));
        if self.vertices > 1 {
            for e in &self.edges {
                let _ = writeln!(out, "edge {}: {} {}", e.id, e.source, e.target);
            }
        }
        for f in &self.faces {
            match &f.name {
                Some(n) => {
                    let _ = write!(out, "face {n}:");
                }
                None => out.push_str("face:"),
            }
            if !f.is_empty() {
                out.push(' ');
                out.push_str(&self.word_string(f));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("foam serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Foam = serde_json::from_str(text).map_err(|e| Error::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        raw.validate()?;
        Ok(raw)
    }
}

impl fmt::Display for Foam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Contract a spanning tree of the 1-skeleton to a single vertex.
///
/// Tree edges are deleted from the edge list and from every face word; the
/// remaining edges keep their relative order. One-vertex input is returned
/// unchanged.
pub fn reduce(foam: &Foam) -> Result<Foam> {
    if foam.is_reduced() {
        return Ok(foam.clone());
    }
    if !foam.is_connected() {
        return Err(Error::Disconnected);
    }
    let adj = foam.adjacency();
    let mut tree = vec![false; foam.edges.len()];
    let mut seen = vec![false; foam.vertices];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &(w, e) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                tree[e] = true;
                queue.push_back(w);
            }
        }
    }
    let mut new_index = vec![usize::MAX; foam.edges.len()];
    let mut edges = Vec::new();
    for (i, e) in foam.edges.iter().enumerate() {
        if !tree[i] {
            new_index[i] = edges.len();
            edges.push(Edge::looped(e.id.clone()));
        }
    }
    let faces = foam
        .faces
        .iter()
        .map(|f| FaceWord {
            name: f.name.clone(),
            letters: f
                .letters
                .iter()
                .filter(|l| !tree[l.edge])
                .map(|l| Letter::new(new_index[l.edge], l.exponent))
                .collect(),
        })
        .collect();
    Foam::new(foam.name.clone(), 1, edges, faces)
}

#[cfg(test)]
mod tests;
