//! Discrete connections on a reduced foam: holonomy, flatness, gauge action,
//! analytic flat families for the catalogue foams and a descent solver.

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foam::{self, Foam};
use crate::group::{Group, GroupElement};
use crate::linalg::FullSvd;
use crate::twisted;

/// Residual below which a connection counts as flat.
pub const FLAT_TOL: f64 = 1e-10;

/// One group element per edge, in the foam's edge order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Connection {
    pub group: Group,
    pub elements: Vec<GroupElement>,
}

impl Connection {
    pub fn new(group: Group, elements: Vec<GroupElement>) -> Self {
        assert!(elements.iter().all(|g| g.group() == group), "mixed groups in connection");
        Connection { group, elements }
    }

    pub fn trivial(group: Group, edges: usize) -> Self {
        Connection::new(group, vec![group.identity(); edges])
    }

    pub fn haar<R: Rng + ?Sized>(group: Group, edges: usize, rng: &mut R) -> Self {
        Connection::new(group, (0..edges).map(|_| group.haar_sample(rng)).collect())
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `g_e ↦ exp(u_e) g_e` with `u` stacked edge by edge.
    pub fn perturbed(&self, u: &DVector<f64>) -> Connection {
        let d = self.group.dim();
        Connection {
            group: self.group,
            elements: self
                .elements
                .iter()
                .enumerate()
                .map(|(e, g)| self.group.exp(&self.group.vector(u.rows(e * d, d).as_slice())) * *g)
                .collect(),
        }
    }
}

/// `P_0 = 𝟙, P_i = ℓ₁⋯ℓ_i` along face `f`.
pub fn prefixes(foam: &Foam, a: &Connection, f: usize) -> Vec<GroupElement> {
    let mut out = Vec::with_capacity(foam.faces[f].len() + 1);
    let mut p = a.group.identity();
    out.push(p);
    for l in &foam.faces[f].letters {
        p = p * a.elements[l.edge].pow(l.exponent as i32);
        out.push(p);
    }
    out
}

/// Left-to-right product of the face word; the empty word gives `𝟙`.
pub fn holonomy(foam: &Foam, a: &Connection, f: usize) -> GroupElement {
    word_holonomy(&foam.faces[f], a)
}

pub fn word_holonomy(word: &foam::FaceWord, a: &Connection) -> GroupElement {
    word.letters
        .iter()
        .fold(a.group.identity(), |p, l| p * a.elements[l.edge].pow(l.exponent as i32))
}

/// `Σ_f distance(H_f)²`.
pub fn flatness_residual(foam: &Foam, a: &Connection) -> f64 {
    (0..foam.n_faces())
        .map(|f| holonomy(foam, a, f).distance().powi(2))
        .sum()
}

/// `h · A = (h g_e h⁻¹)_e`.
pub fn gauge_act(h: &GroupElement, a: &Connection) -> Connection {
    let hi = h.inverse();
    Connection {
        group: a.group,
        elements: a.elements.iter().map(|g| *h * *g * hi).collect(),
    }
}

/// A flat connection with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatSample {
    pub connection: Connection,
    pub residual: f64,
    pub b0: usize,
    pub b2: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component_tag: Option<String>,
    /// Descent iterations spent (0 for analytic samples).
    pub iterations: usize,
    /// Set once samples of the same component have been compared.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub possibly_singular: Option<bool>,
}

impl FlatSample {
    /// Wrap a connection, computing residual and Betti numbers.
    pub fn new(foam: &Foam, connection: Connection, tag: Option<String>, iterations: usize) -> Result<Self> {
        let residual = flatness_residual(foam, &connection);
        let rep = twisted::cohomology(foam, &connection)?;
        Ok(FlatSample {
            connection,
            residual,
            b0: rep.b0,
            b2: rep.b2,
            component_tag: tag,
            iterations,
            possibly_singular: None,
        })
    }

    pub fn tag(&self) -> &str {
        self.component_tag.as_deref().unwrap_or("unknown")
    }
}

/// Descent parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatOptions {
    pub max_iters: usize,
    pub step: f64,
    pub tol: f64,
    /// Cut-locus restarts allowed before giving up.
    pub restarts: usize,
    /// Below this residual, try least-squares (Gauss-Newton) steps before
    /// falling back to the gradient.
    pub polish_below: f64,
    /// Record the residual after every accepted step.
    pub record_history: bool,
}

impl Default for FlatOptions {
    fn default() -> Self {
        FlatOptions {
            max_iters: 5000,
            step: 0.1,
            tol: FLAT_TOL,
            restarts: 10,
            polish_below: 1e-3,
            record_history: false,
        }
    }
}

/// Outcome of one descent run.
#[derive(Debug, Clone)]
pub struct Descent {
    pub connection: Connection,
    pub residual: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

fn face_logs(foam: &Foam, a: &Connection) -> Result<DVector<f64>> {
    let d = a.group.dim();
    let mut x = DVector::zeros(d * foam.n_faces());
    for f in 0..foam.n_faces() {
        let v = holonomy(foam, a, f).log()?;
        x.rows_mut(f * d, d).copy_from_slice(v.components());
    }
    Ok(x)
}

/// Minimize the flatness residual from `start` by Riemannian gradient
/// descent with backtracking, finishing with least-squares steps.
pub fn descend(foam: &Foam, start: Connection, opts: &FlatOptions) -> Result<Descent> {
    let mut a = start;
    let mut x = face_logs(foam, &a)?;
    let mut r = x.norm_squared();
    let mut step = opts.step;
    let mut history = Vec::new();
    if opts.record_history {
        history.push(r);
    }
    let mut it = 0;
    // Continue past `tol` while cheap: rank decisions want residuals far
    // below the flatness tolerance.
    let target = (opts.tol * 1e-16).max(1e-30);
    while it < opts.max_iters && r > target {
        it += 1;
        let d1 = twisted::build_delta1(foam, &a);
        let mut accepted = false;
        if r < opts.polish_below {
            let u = -FullSvd::new(&d1).solve(&x);
            let mut t = 1.0;
            for _ in 0..6 {
                let cand = a.perturbed(&(&u * t));
                if let Ok(xc) = face_logs(foam, &cand) {
                    let rc = xc.norm_squared();
                    if rc < r {
                        a = cand;
                        x = xc;
                        r = rc;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
        }
        if !accepted {
            let grad = d1.transpose() * &x * 2.0;
            if grad.norm() == 0.0 {
                break;
            }
            loop {
                let cand = a.perturbed(&(&grad * -step));
                let xc = face_logs(foam, &cand);
                let rc = xc.as_ref().map_or(f64::INFINITY, |x| x.norm_squared());
                if let (true, Ok(xc)) = (rc < r, xc) {
                    a = cand;
                    x = xc;
                    r = rc;
                    step *= 1.5;
                    accepted = true;
                    break;
                }
                step *= 0.5;
                if step < 1e-18 {
                    break;
                }
            }
        }
        if !accepted {
            break;
        }
        if opts.record_history {
            history.push(r);
        }
    }
    Ok(Descent {
        connection: a,
        residual: r,
        iterations: it,
        history,
    })
}

/// Random restart loop around [`descend`]. The returned sample carries a
/// post hoc component tag for catalogue foams.
pub fn find_flat<R: Rng + ?Sized>(foam: &Foam, group: Group, rng: &mut R, opts: &FlatOptions) -> Result<FlatSample> {
    if !foam.is_reduced() {
        return Err(Error::NotReduced);
    }
    let mut start = Connection::haar(group, foam.n_edges(), rng);
    let mut restarts = 0;
    loop {
        match descend(foam, start.clone(), opts) {
            Ok(d) if d.residual < opts.tol => {
                let tag = tag_component(foam, &d.connection);
                return FlatSample::new(foam, d.connection, tag, d.iterations);
            }
            Ok(d) => {
                return Err(Error::NoConvergence {
                    residual: d.residual,
                    iterations: d.iterations,
                })
            }
            Err(Error::CutLocus { .. }) => {
                restarts += 1;
                if restarts > opts.restarts {
                    return Err(Error::RestartBudget(opts.restarts));
                }
                let d = group.dim() * foam.n_edges();
                let u = DVector::from_fn(d, |_, _| rng.random_range(-0.1..0.1));
                start = start.perturbed(&u);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Which catalogue foam, if any, this is structurally.
pub fn catalogue_key(foam: &Foam) -> Option<&'static str> {
    let key = foam::CATALOGUE.iter().find(|k| {
        foam::builtin(k).is_ok_and(|b| b.edges == foam.edges && b.faces == foam.faces && b.vertices == foam.vertices)
    })?;
    Some(match *key {
        "genus:2" | "genus:3" => "genus",
        k => k,
    })
}

const TAG_TOL: f64 = 1e-6;

/// Component label for catalogue foams: torus `plus`/`minus`/`central`,
/// appendix `irred`/`red`; `None` elsewhere.
pub fn tag_component(foam: &Foam, a: &Connection) -> Option<String> {
    if a.group != Group::Su2 {
        return None;
    }
    let q = |i: usize| a.elements[i].as_quat().expect("su2");
    match catalogue_key(foam)? {
        "torus" => {
            let (qa, qb) = (q(0), q(1));
            if qa.vec_norm() < TAG_TOL && qb.vec_norm() < TAG_TOL {
                return Some("central".into());
            }
            // Write a = exp(ψ_a n̂) with ψ_a ∈ [0, π]; then b = exp(±ψ_b n̂).
            let (u, v) = if qa.vec_norm() >= TAG_TOL { (qa, qb) } else { (qb, qa) };
            let dot = u.x * v.x + u.y * v.y + u.z * v.z;
            Some(if dot >= 0.0 { "plus" } else { "minus" }.into())
        }
        "appendix" => Some(if q(2).vec_norm() < TAG_TOL { "irred" } else { "red" }.into()),
        _ => None,
    }
}

/// Closed-form flat families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum AnalyticFamily {
    /// `a = exp(ψ_a n̂), b = exp(sign · ψ_b n̂)`.
    Torus {
        psi_a: f64,
        psi_b: f64,
        axis: [f64; 3],
        sign: i8,
    },
    /// `a, b` Haar, `h = sign · 𝟙`.
    AppendixIrred { sign: i8 },
    /// `a, b, h` on a common random axis.
    AppendixRed,
    /// The trivial connection.
    Trivial,
}

fn random_axis<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    match Group::Su2.haar_sample(rng).as_quat() {
        Some(q) if q.vec_norm() > 1e-6 => [q.x, q.y, q.z],
        _ => [0.0, 0.0, 1.0],
    }
}

/// Build a flat sample from an analytic family.
pub fn analytic_flat<R: Rng + ?Sized>(foam: &Foam, family: &AnalyticFamily, rng: &mut R) -> Result<FlatSample> {
    let key = catalogue_key(foam);
    let (conn, tag) = match (family, key) {
        (AnalyticFamily::Trivial, _) => (Connection::trivial(Group::Su2, foam.n_edges()), None),
        (&AnalyticFamily::Torus { psi_a, psi_b, axis, sign }, Some("torus")) => {
            if !(0.0..=std::f64::consts::PI).contains(&psi_a) || !(0.0..=std::f64::consts::PI).contains(&psi_b) {
                return Err(Error::InvalidParameter("torus angles must lie in [0, π]".into()));
            }
            if sign != 1 && sign != -1 {
                return Err(Error::InvalidParameter("torus sign must be ±1".into()));
            }
            let a = GroupElement::su2_axis_angle(psi_a, axis);
            let b = GroupElement::su2_axis_angle(sign as f64 * psi_b, axis);
            let tag = if sign > 0 { "plus" } else { "minus" };
            (Connection::new(Group::Su2, vec![a, b]), Some(tag.to_string()))
        }
        (&AnalyticFamily::AppendixIrred { sign }, Some("appendix")) => {
            if sign != 1 && sign != -1 {
                return Err(Error::InvalidParameter("appendix sign must be ±1".into()));
            }
            let h = if sign > 0 {
                Group::Su2.identity()
            } else {
                GroupElement::Su2(-crate::group::Quat::IDENTITY)
            };
            let (a, b) = (Group::Su2.haar_sample(rng), Group::Su2.haar_sample(rng));
            (Connection::new(Group::Su2, vec![a, b, h]), Some("irred".to_string()))
        }
        (AnalyticFamily::AppendixRed, Some("appendix")) => {
            let axis = random_axis(rng);
            let mut angle = || rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let (x, y, z) = (angle(), angle(), angle());
            let els = [x, y, z].map(|t| GroupElement::su2_axis_angle(t, axis));
            (Connection::new(Group::Su2, els.to_vec()), Some("red".to_string()))
        }
        (f, k) => {
            return Err(Error::InvalidParameter(format!(
                "family {f:?} does not apply to foam `{}` ({})",
                foam.name,
                k.unwrap_or("not in the catalogue")
            )))
        }
    };
    FlatSample::new(foam, conn, tag, 0)
}

/// A flat sample by the cheapest available route: an analytic family for
/// catalogue foams, a Haar sample when every relator is abelian-trivial in
/// U(1), otherwise descent.
pub fn sample_flat<R: Rng + ?Sized>(foam: &Foam, group: Group, rng: &mut R, opts: &FlatOptions) -> Result<FlatSample> {
    if !foam.is_reduced() {
        return Err(Error::NotReduced);
    }
    if group == Group::U1 {
        let rep = foam::cellular_homology(foam);
        if rep.boundary2.iter().flatten().all(|&x| x == 0) {
            let conn = Connection::haar(group, foam.n_edges(), rng);
            return FlatSample::new(foam, conn, None, 0);
        }
        return find_flat(foam, group, rng, opts);
    }
    let family = match catalogue_key(foam) {
        Some("sphere") => AnalyticFamily::Trivial,
        Some("torus") => AnalyticFamily::Torus {
            psi_a: rng.random_range(0.0..std::f64::consts::PI),
            psi_b: rng.random_range(0.0..std::f64::consts::PI),
            axis: random_axis(rng),
            sign: if rng.random_bool(0.5) { 1 } else { -1 },
        },
        Some("appendix") => {
            if rng.random_bool(0.5) {
                AnalyticFamily::AppendixIrred {
                    sign: if rng.random_bool(0.5) { 1 } else { -1 },
                }
            } else {
                AnalyticFamily::AppendixRed
            }
        }
        _ => return find_flat(foam, group, rng, opts),
    };
    analytic_flat(foam, &family, rng)
}

/// Evaluate `word` at `samples` flat connections of `foam` and return the
/// largest distance of its holonomy from the identity. Small values support
/// the claim that the relation is implied by the faces of `foam`.
pub fn verify_redundancy<R: Rng + ?Sized>(
    foam: &Foam,
    group: Group,
    word: &str,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let w = foam.word(word)?;
    let opts = FlatOptions::default();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let s = sample_flat(foam, group, rng, &opts)?;
        worst = worst.max(word_holonomy(&w, &s.connection).distance());
    }
    Ok(worst)
}

/// Right-trivialized directional derivative of every face holonomy by
/// central differences, used as an oracle for `δ¹`.
pub fn holonomy_derivative(foam: &Foam, a: &Connection, u: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
    let d = a.group.dim();
    let plus = a.perturbed(&(u * t));
    let minus = a.perturbed(&(u * -t));
    let mut out = DVector::zeros(d * foam.n_faces());
    for f in 0..foam.n_faces() {
        let h0 = holonomy(foam, a, f).inverse();
        let lp = (holonomy(foam, &plus, f) * h0).log()?;
        let lm = (holonomy(foam, &minus, f) * h0).log()?;
        let diff: Vec<f64> = lp
            .components()
            .iter()
            .zip(lm.components())
            .map(|(p, m)| (p - m) / (2.0 * t))
            .collect();
        out.rows_mut(f * d, d).copy_from_slice(&diff);
    }
    Ok(out)
}
