use super::{FaceWord, Foam, Letter};
use crate::error::{Error, Result};

fn word(pairs: &[(usize, i8)]) -> FaceWord {
    FaceWord::new(pairs.iter().map(|&(e, x)| Letter::new(e, x)).collect())
}

/// Closed orientable surface of genus `g ≥ 1`: edges `a1 b1 … ag bg`, one
/// face `[a1,b1]⋯[ag,bg]`. The torus uses plain `a b`.
pub fn genus(g: usize) -> Result<Foam> {
    if g == 0 {
        return Err(Error::InvalidParameter(
            "genus needs g >= 1; use `sphere` for g = 0".into(),
        ));
    }
    let names: Vec<String> = if g == 1 {
        vec!["a".into(), "b".into()]
    } else {
        (1..=g).flat_map(|i| [format!("a{i}"), format!("b{i}")]).collect()
    };
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut letters = Vec::with_capacity(4 * g);
    for i in 0..g {
        let (a, b) = (2 * i, 2 * i + 1);
        letters.extend([(a, 1), (b, 1), (a, -1), (b, -1)]);
    }
    let name = if g == 1 { "torus".to_string() } else { format!("genus:{g}") };
    Foam::reduced(name, &refs, vec![word(&letters)])
}

/// Catalogue lookup. Keys: `sphere`, `torus`, `genus:<g>` (also `genus(<g>)`),
/// `appendix`, `dunce_hat`, `projective_plane`.
pub fn builtin(key: &str) -> Result<Foam> {
    let key = key.trim();
    if let Some(g) = key
        .strip_prefix("genus:")
        .or_else(|| key.strip_prefix("genus(").and_then(|s| s.strip_suffix(')')))
    {
        let g: usize = g
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad genus `{g}`")))?;
        return genus(g);
    }
    match key {
        "sphere" => Foam::reduced("sphere", &[], vec![FaceWord::new(Vec::new())]),
        "torus" => genus(1),
        // [a,h] and [b,h]
        "appendix" => Foam::reduced(
            "appendix",
            &["a", "b", "h"],
            vec![
                word(&[(0, 1), (2, 1), (0, -1), (2, -1)]),
                word(&[(1, 1), (2, 1), (1, -1), (2, -1)]),
            ],
        ),
        "dunce_hat" => Foam::reduced("dunce_hat", &["a"], vec![word(&[(0, 1), (0, 1), (0, -1)])]),
        "projective_plane" => Foam::reduced("projective_plane", &["a"], vec![word(&[(0, 1), (0, 1)])]),
        other => Err(Error::UnknownBuiltin(other.to_string())),
    }
}

/// Keys used by the test suites when iterating the catalogue.
pub const CATALOGUE: &[&str] = &[
    "sphere",
    "torus",
    "genus:2",
    "genus:3",
    "appendix",
    "dunce_hat",
    "projective_plane",
];

/// Random one-vertex presentation with the given numbers of edges and faces.
/// Face lengths are uniform in `0..=max_len`; letters are uniform.
pub fn random_presentation<R: rand::Rng + ?Sized>(
    rng: &mut R,
    edges: usize,
    faces: usize,
    max_len: usize,
) -> Foam {
    let names: Vec<String> = (0..edges).map(|i| format!("e{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let words = (0..faces)
        .map(|_| {
            let len = if edges == 0 { 0 } else { rng.random_range(0..=max_len) };
            FaceWord::new(
                (0..len)
                    .map(|_| Letter::new(rng.random_range(0..edges), if rng.random_bool(0.5) { 1 } else { -1 }))
                    .collect(),
            )
        })
        .collect();
    Foam::reduced("random", &refs, words).expect("generated words are valid")
}
