use super::{parse, Edge, FaceWord, Foam, Letter};
use crate::error::{Error, Result};

/// Add a generator `new_edge` together with the relation `new_edge = word`,
/// i.e. the face `new_edge · word⁻¹`. Both are appended at the end.
pub fn tietze1_expand(foam: &Foam, word: &str, new_edge: &str) -> Result<Foam> {
    if !parse::is_identifier(new_edge) {
        return Err(Error::InvalidParameter(format!("bad edge identifier `{new_edge}`")));
    }
    if foam.edge_index(new_edge).is_some() {
        return Err(Error::NameCollision(new_edge.to_string()));
    }
    let w = match foam.word(word) {
        Err(Error::UndeclaredEdge { edge, .. }) if edge == new_edge => {
            return Err(Error::WordReferencesNewEdge(edge));
        }
        other => other?,
    };
    check_path(foam, &w)?;
    let (source, target) = endpoints(foam, &w);
    let mut edges = foam.edges.clone();
    let idx = edges.len();
    edges.push(Edge {
        id: new_edge.to_string(),
        source,
        target,
    });
    let mut letters = vec![Letter::new(idx, 1)];
    letters.extend(w.inverse().letters);
    let mut faces = foam.faces.clone();
    faces.push(FaceWord::new(letters));
    Foam::new(foam.name.clone(), foam.vertices, edges, faces)
}

// The word only needs to chain; the new edge closes it.
fn check_path(foam: &Foam, w: &FaceWord) -> Result<()> {
    let mut at = None;
    for (i, l) in w.letters.iter().enumerate() {
        let e = &foam.edges[l.edge];
        let (s, t) = if l.exponent > 0 {
            (e.source, e.target)
        } else {
            (e.target, e.source)
        };
        if at.is_some_and(|a| a != s) {
            return Err(Error::NonChainingWord {
                face: foam.n_faces(),
                position: i,
            });
        }
        at = Some(t);
    }
    Ok(())
}

fn endpoints(foam: &Foam, w: &FaceWord) -> (usize, usize) {
    let end = |l: &Letter, first: bool| {
        let e = &foam.edges[l.edge];
        match (l.exponent > 0, first) {
            (true, true) | (false, false) => e.source,
            _ => e.target,
        }
    };
    match (w.letters.first(), w.letters.last()) {
        (Some(a), Some(b)) => (end(a, true), end(b, false)),
        _ => (0, 0),
    }
}

/// Remove an edge that occurs exactly once, in exactly one face, together
/// with that face. Inverse of [`tietze1_expand`].
pub fn tietze1_collapse(foam: &Foam, edge: &str) -> Result<Foam> {
    let idx = foam
        .edge_index(edge)
        .ok_or_else(|| Error::InvalidParameter(format!("no edge `{edge}`")))?;
    let hits: Vec<(usize, usize)> = (0..foam.n_faces())
        .map(|f| (f, foam.occurrences(f, idx).0))
        .filter(|&(_, n)| n > 0)
        .collect();
    let face = match hits.as_slice() {
        [(f, 1)] => *f,
        _ => return Err(Error::NotCollapsible(edge.to_string())),
    };
    let mut edges = foam.edges.clone();
    edges.remove(idx);
    let faces = foam
        .faces
        .iter()
        .enumerate()
        .filter(|&(f, _)| f != face)
        .map(|(_, w)| FaceWord {
            name: w.name.clone(),
            letters: w
                .letters
                .iter()
                .map(|l| Letter::new(if l.edge > idx { l.edge - 1 } else { l.edge }, l.exponent))
                .collect(),
        })
        .collect();
    Foam::new(foam.name.clone(), foam.vertices, edges, faces)
}

/// Append a face with the given word. Whether the relation is implied by the
/// others is the caller's claim; see `connection::verify_redundancy`.
pub fn tietze2_add_face(foam: &Foam, word: &str) -> Result<Foam> {
    let w = foam.word(word)?;
    let mut faces = foam.faces.clone();
    faces.push(w);
    Foam::new(foam.name.clone(), foam.vertices, foam.edges.clone(), faces)
}
