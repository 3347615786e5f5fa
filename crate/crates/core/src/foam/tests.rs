use super::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn parse_torus_sphere_dunce() {
    let t = parse_foam("edges: a b\nface: a b a^-1 b^-1").unwrap();
    assert_eq!((t.n_vertices(), t.n_edges(), t.n_faces()), (1, 2, 1));
    assert_eq!(t.word_string(&t.faces[0]), "a b a^-1 b^-1");

    let s = parse_foam("edges:\nface:").unwrap();
    assert_eq!((s.n_vertices(), s.n_edges(), s.n_faces()), (1, 0, 1));
    assert_eq!(s.euler_characteristic(), 2);
    assert!(s.faces[0].is_empty());

    let d = parse_foam("edges: a\nface: a a a^-1").unwrap();
    assert_eq!(d.faces[0].len(), 3);
    assert_eq!(cellular_homology(&d).betti, [1, 0, 0]);
}

#[test]
fn parse_comments_names_and_order() {
    let text = "# a comment\nname: thing  # trailing\nedges: z y x\nface top: x^-1 z\nface: y^1\n";
    let f = parse_foam(text).unwrap();
    assert_eq!(f.name, "thing");
    let ids: Vec<_> = f.edges.iter().map(|e| e.id.as_str()).collect();
    assert_eq!(ids, ["z", "y", "x"]);
    assert_eq!(f.faces[0].name.as_deref(), Some("top"));
    assert_eq!(f.faces[0].letters, vec![Letter::new(2, -1), Letter::new(0, 1)]);
}

#[test]
fn parse_errors_carry_positions() {
    match parse_foam("edges: a\nface: a b") {
        Err(Error::UndeclaredEdge { edge, line, column }) => {
            assert_eq!((edge.as_str(), line, column), ("b", 2, 9));
        }
        other => panic!("{other:?}"),
    }
    match parse_foam("edges: a\nface: a^2") {
        Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 7)),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_foam("edges a"), Err(Error::Syntax { line: 1, .. })));
    assert!(matches!(parse_foam("bogus: 1"), Err(Error::Syntax { line: 1, column: 1, .. })));
    assert!(matches!(parse_foam("edges: a a"), Err(Error::DuplicateEdge(_))));
    assert!(matches!(parse_foam("edges: 1a"), Err(Error::Syntax { .. })));
}

const THETA: &str = "\
vertices: 2
edge p: 0 1
edge q: 0 1
edge r: 0 1
face: p q^-1
face: q r^-1
";

#[test]
fn multi_vertex_chaining() {
    let f = parse_foam(THETA).unwrap();
    assert_eq!((f.n_vertices(), f.n_edges(), f.n_faces()), (2, 3, 2));
    let bad = THETA.replace("face: q r^-1", "face: q r");
    assert!(matches!(parse_foam(&bad), Err(Error::NonChainingWord { face: 1, position: 1 })));
    assert!(matches!(
        parse_foam("vertices: 3\nedge a: 0 1\n"),
        Err(Error::Disconnected)
    ));
}

#[test]
fn reduce_theta_graph() {
    let f = parse_foam(THETA).unwrap();
    let r = reduce(&f).unwrap();
    assert_eq!((r.n_vertices(), r.n_edges(), r.n_faces()), (1, 2, 2));
    assert_eq!(r.word_string(&r.faces[0]), "q^-1");
    assert_eq!(r.word_string(&r.faces[1]), "q r^-1");
    assert_eq!(cellular_homology(&f).betti, cellular_homology(&r).betti);
    assert_eq!(reduce(&r).unwrap(), r);
    let t = builtin("torus").unwrap();
    assert_eq!(reduce(&t).unwrap(), t);
}

#[test]
fn builtin_catalogue() {
    let cases = [
        ("sphere", (0, 1), [1, 0, 1], 2),
        ("torus", (2, 1), [1, 2, 1], 0),
        ("genus:2", (4, 1), [1, 4, 1], -2),
        ("appendix", (3, 2), [1, 3, 2], 0),
        ("dunce_hat", (1, 1), [1, 0, 0], 1),
        ("projective_plane", (1, 1), [1, 0, 0], 1),
    ];
    for (key, (e, f), betti, chi) in cases {
        let foam = builtin(key).unwrap();
        assert_eq!((foam.n_edges(), foam.n_faces()), (e, f), "{key}");
        let rep = cellular_homology(&foam);
        assert_eq!(rep.betti, betti, "{key}");
        assert_eq!(rep.euler, chi, "{key}");
    }
    assert_eq!(builtin("genus(2)").unwrap().faces[0].len(), 8);
    assert_eq!(builtin("genus:1").unwrap(), builtin("torus").unwrap());
    assert!(matches!(builtin("genus:0"), Err(Error::InvalidParameter(_))));
    assert!(matches!(builtin("klein"), Err(Error::UnknownBuiltin(_))));
}

#[test]
fn tietze_moves() {
    let t = builtin("torus").unwrap();
    let e = tietze1_expand(&t, "a b", "c").unwrap();
    assert_eq!((e.n_edges(), e.n_faces()), (3, 2));
    assert_eq!(e.word_string(&e.faces[1]), "c b^-1 a^-1");
    assert_eq!(e.euler_characteristic(), t.euler_characteristic());
    assert_eq!(cellular_homology(&e).betti[2], cellular_homology(&t).betti[2]);
    assert_eq!(tietze1_collapse(&e, "c").unwrap(), t);

    assert!(matches!(tietze1_expand(&t, "a", "b"), Err(Error::NameCollision(_))));
    assert!(matches!(tietze1_expand(&t, "a c", "c"), Err(Error::WordReferencesNewEdge(_))));
    assert!(matches!(tietze1_collapse(&t, "a"), Err(Error::NotCollapsible(_))));

    let d = tietze2_add_face(&t, "a b a^-1 b^-1").unwrap();
    assert_eq!((d.n_edges(), d.n_faces()), (2, 2));
    assert!(matches!(tietze2_add_face(&t, "z"), Err(Error::UndeclaredEdge { .. })));
}

#[test]
fn tietze_on_multi_vertex_foam() {
    let f = parse_foam(THETA).unwrap();
    let e = tietze1_expand(&f, "p q^-1 r", "s").unwrap();
    assert_eq!((e.edges[3].source, e.edges[3].target), (0, 1));
    assert_eq!(tietze1_collapse(&e, "s").unwrap(), f);
    assert!(matches!(tietze1_expand(&f, "p r", "s"), Err(Error::NonChainingWord { .. })));
}

#[test]
fn serializers_round_trip() {
    for key in CATALOGUE {
        let f = builtin(key).unwrap();
        assert_eq!(parse_foam(&f.to_text()).unwrap(), f, "{key}");
        assert_eq!(Foam::from_json(&f.to_json()).unwrap(), f, "{key}");
    }
    let f = parse_foam(THETA).unwrap();
    assert_eq!(parse_foam(&f.to_text()).unwrap(), f);
    let rep = cellular_homology(&f);
    let back: CellularReport = serde_json::from_str(&rep.to_json()).unwrap();
    assert_eq!(back, rep);
}

#[test]
fn bareiss_rank_matches_known_cases() {
    assert_eq!(integer_rank(&[]), 0);
    assert_eq!(integer_rank(&[vec![0, 0], vec![0, 0]]), 0);
    assert_eq!(integer_rank(&[vec![2, 4], vec![1, 2]]), 1);
    assert_eq!(integer_rank(&[vec![0, 1, 2], vec![1, 0, 3], vec![1, 1, 5]]), 2);
    assert_eq!(integer_rank(&[vec![3, 1], vec![1, 3], vec![5, 5]]), 2);
}

/// Random connected multi-vertex foam whose faces are closed walks at 0.
fn random_multi_vertex(rng: &mut ChaCha8Rng) -> Foam {
    let v = rng.random_range(1..5);
    let mut edges = Vec::new();
    for w in 1..v {
        let u = rng.random_range(0..w);
        let (s, t) = if rng.random_bool(0.5) { (u, w) } else { (w, u) };
        edges.push(Edge { id: format!("t{w}"), source: s, target: t });
    }
    for i in 0..rng.random_range(0..4) {
        edges.push(Edge {
            id: format!("x{i}"),
            source: rng.random_range(0..v),
            target: rng.random_range(0..v),
        });
    }
    let dummy = Foam::new("g", v, edges.clone(), vec![]).unwrap();
    let adj = dummy.adjacency();
    let faces = (0..rng.random_range(0..4))
        .map(|_| {
            let mut at = 0;
            let mut letters = Vec::new();
            let steps = rng.random_range(0..6);
            let walk = |at: &mut usize, letters: &mut Vec<Letter>, rng: &mut ChaCha8Rng| {
                if adj[*at].is_empty() {
                    return;
                }
                let (w, e) = adj[*at][rng.random_range(0..adj[*at].len())];
                let ed = &edges[e];
                let exp = if ed.source == *at && (ed.target == w) && (ed.source != ed.target || rng.random_bool(0.5)) {
                    1
                } else {
                    -1
                };
                letters.push(Letter::new(e, exp));
                *at = w;
            };
            for _ in 0..steps {
                walk(&mut at, &mut letters, rng);
            }
            // walk home along parent pointers of the tree edges
            while at != 0 {
                let e = at - 1;
                let ed = &edges[e];
                let exp = if ed.source == at { 1 } else { -1 };
                letters.push(Letter::new(e, exp));
                at = if exp == 1 { ed.target } else { ed.source };
            }
            FaceWord::new(letters)
        })
        .collect();
    Foam::new("random", v, edges, faces).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chain_complex_and_euler(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_multi_vertex(&mut rng);
        let rep = cellular_homology(&f);
        prop_assert!(rep.boundary_product().iter().flatten().all(|&x| x == 0));
        let [b0, b1, b2] = rep.betti;
        prop_assert_eq!(b0 as i64 - b1 as i64 + b2 as i64, rep.euler);
        prop_assert_eq!(b0, 1);
    }

    #[test]
    fn reduce_preserves_homology(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_multi_vertex(&mut rng);
        let r = reduce(&f).unwrap();
        prop_assert_eq!(r.n_vertices(), 1);
        prop_assert_eq!(r.n_edges(), f.n_edges() + 1 - f.n_vertices());
        prop_assert_eq!(r.n_faces(), f.n_faces());
        prop_assert_eq!(cellular_homology(&r).betti, cellular_homology(&f).betti);
        prop_assert_eq!(reduce(&r).unwrap(), r);
    }

    #[test]
    fn text_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_multi_vertex(&mut rng);
        prop_assert_eq!(parse_foam(&f.to_text()).unwrap(), f.clone());
        prop_assert_eq!(Foam::from_json(&f.to_json()).unwrap(), f);
    }

    #[test]
    fn tietze1_round_trip(seed in any::<u64>(), e in 1usize..5, nf in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_presentation(&mut rng, e, nf, 6);
        let w = random_presentation(&mut rng, e, 1, 5);
        let word = f.word_string(&w.faces[0]);
        let x = tietze1_expand(&f, &word, "fresh").unwrap();
        prop_assert_eq!(x.euler_characteristic(), f.euler_characteristic());
        prop_assert_eq!(cellular_homology(&x).betti[2], cellular_homology(&f).betti[2]);
        prop_assert_eq!(tietze1_collapse(&x, "fresh").unwrap(), f);
    }
}
