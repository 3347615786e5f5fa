use super::{Edge, FaceWord, Foam, Letter};
use crate::error::{Error, Result};

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(s: &str, offset: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        if c.is_whitespace() {
            if let Some(b) = start.take() {
                out.push((offset + b + 1, &s[b..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(b) = start {
        out.push((offset + b + 1, &s[b..]));
    }
    out
}

struct RawFace {
    name: Option<String>,
    line: usize,
    letters: Vec<(usize, String, i8)>,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn parse_letter(tok: &str, line: usize, col: usize) -> Result<(String, i8)> {
    let (id, exp) = match tok.split_once('^') {
        None => (tok, 1),
        Some((id, "-1")) => (id, -1),
        Some((id, "1")) | Some((id, "+1")) => (id, 1),
        Some((_, e)) => {
            return Err(syntax(line, col, format!("exponent must be -1 or 1, got `{e}`")));
        }
    };
    if !is_identifier(id) {
        return Err(syntax(line, col, format!("bad edge identifier `{id}`")));
    }
    Ok((id.to_string(), exp))
}

fn parse_index(tok: &str, line: usize, col: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| syntax(line, col, format!("expected a non-negative integer, got `{tok}`")))
}

/// Parse the line-oriented foam format.
///
/// ```text
/// # torus
/// name: torus
/// edges: a b
/// face: a b a^-1 b^-1
/// ```
///
/// Multi-vertex foams add `vertices: N` and `edge <id>: <src> <dst>` lines;
/// an `edge` line for an undeclared id declares it.
pub fn parse_foam(text: &str) -> Result<Foam> {
    let mut name = String::new();
    let mut vertices: Option<usize> = None;
    let mut edges: Vec<Edge> = Vec::new();
    let mut faces: Vec<RawFace> = Vec::new();

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(colon) = content.find(':') else {
            let col = content.len() - content.trim_start().len() + 1;
            return Err(syntax(line, col, "expected `key: value`"));
        };
        let key_toks = tokens(&content[..colon], 0);
        let rest = &content[colon + 1..];
        let rest_toks = tokens(rest, colon + 1);
        let key_col = key_toks.first().map_or(1, |t| t.0);
        match key_toks.as_slice() {
            [(_, "name")] => name = rest.trim().to_string(),
            [(_, "vertices")] => {
                let [(c, t)] = rest_toks.as_slice() else {
                    return Err(syntax(line, colon + 2, "`vertices:` takes one integer"));
                };
                let n = parse_index(t, line, *c)?;
                if n == 0 {
                    return Err(syntax(line, *c, "a foam needs at least one vertex"));
                }
                vertices = Some(n);
            }
            [(_, "edges")] => {
                for (c, t) in rest_toks {
                    if !is_identifier(t) {
                        return Err(syntax(line, c, format!("bad edge identifier `{t}`")));
                    }
                    if edges.iter().any(|e| e.id == t) {
                        return Err(Error::DuplicateEdge(t.to_string()));
                    }
                    edges.push(Edge::looped(t));
                }
            }
            [(_, "edge"), (c, id)] => {
                if !is_identifier(id) {
                    return Err(syntax(line, *c, format!("bad edge identifier `{id}`")));
                }
                let [(cs, s), (ct, t)] = rest_toks.as_slice() else {
                    return Err(syntax(line, colon + 2, "`edge <id>:` takes a source and a target vertex"));
                };
                let (s, t) = (parse_index(s, line, *cs)?, parse_index(t, line, *ct)?);
                match edges.iter_mut().find(|e| e.id == *id) {
                    Some(e) => {
                        e.source = s;
                        e.target = t;
                    }
                    None => edges.push(Edge {
                        id: id.to_string(),
                        source: s,
                        target: t,
                    }),
                }
            }
            [(_, "face"), rest_key @ ..] if rest_key.len() <= 1 => {
                let fname = rest_key.first().map(|(_, n)| n.to_string());
                let mut letters = Vec::new();
                for (c, t) in rest_toks {
                    let (id, exp) = parse_letter(t, line, c)?;
                    letters.push((c, id, exp));
                }
                faces.push(RawFace {
                    name: fname,
                    line,
                    letters,
                });
            }
            _ => {
                return Err(syntax(
                    line,
                    key_col,
                    format!("unknown key `{}`", content[..colon].trim()),
                ))
            }
        }
    }

    let vertices = vertices.unwrap_or(1);
    for e in &edges {
        if e.source >= vertices || e.target >= vertices {
            return Err(Error::InvalidParameter(format!(
                "edge `{}` references a vertex outside 0..{vertices}",
                e.id
            )));
        }
    }
    let mut words = Vec::with_capacity(faces.len());
    for f in faces {
        let mut letters = Vec::with_capacity(f.letters.len());
        for (column, id, exp) in f.letters {
            let Some(i) = edges.iter().position(|e| e.id == id) else {
                return Err(Error::UndeclaredEdge {
                    edge: id,
                    line: f.line,
                    column,
                });
            };
            letters.push(Letter::new(i, exp));
        }
        words.push(FaceWord { name: f.name, letters });
    }
    Foam::new(name, vertices, edges, words)
}

/// Parse a bare word over the edges of `foam`.
pub(crate) fn parse_word(foam: &Foam, text: &str) -> Result<FaceWord> {
    let mut letters = Vec::new();
    for (c, t) in tokens(text, 0) {
        let (id, exp) = parse_letter(t, 1, c)?;
        let Some(i) = foam.edge_index(&id) else {
            return Err(Error::UndeclaredEdge {
                edge: id,
                line: 1,
                column: c,
            });
        };
        letters.push(Letter::new(i, exp));
    }
    Ok(FaceWord::new(letters))
}
