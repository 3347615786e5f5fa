//! Twisted cochain complex `𝔤 → 𝔤^E → 𝔤^F` at a connection on a reduced foam.
//!
//! Coordinates are right-trivialized in the orthonormal Lie basis: the
//! perturbation of edge `e` is `g_e ↦ exp(u_e) g_e`, and a face perturbation
//! is read off as `dH_f H_f⁻¹`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::connection::{self, Connection, FlatSample, FlatOptions};
use crate::error::{Error, Result};
use crate::foam::Foam;
use crate::linalg::{FullSvd, RankDecision};
use crate::par;

fn require_reduced(foam: &Foam, phi: &Connection) -> Result<()> {
    if !foam.is_reduced() {
        return Err(Error::NotReduced);
    }
    if phi.len() != foam.n_edges() {
        return Err(Error::InvalidParameter(format!(
            "connection has {} elements for {} edges",
            phi.len(),
            foam.n_edges()
        )));
    }
    Ok(())
}

/// `δ⁰`: edge block `I − Ad(g_e)`.
pub fn build_delta0(foam: &Foam, phi: &Connection) -> DMatrix<f64> {
    let d = phi.group.dim();
    let mut m = DMatrix::zeros(d * foam.n_edges(), d);
    for (e, g) in phi.elements.iter().enumerate() {
        let block = DMatrix::identity(d, d) - g.adjoint();
        m.view_mut((e * d, 0), (d, d)).copy_from(&block);
    }
    m
}

/// `δ¹`: for face word `ℓ₁⋯ℓ_k` with prefixes `P_i = ℓ₁⋯ℓ_i`, the `(f, e)`
/// block sums `+Ad(P_{i−1})` over occurrences `ℓ_i = e` and `−Ad(P_i)` over
/// occurrences `ℓ_i = e⁻¹`.
pub fn build_delta1(foam: &Foam, phi: &Connection) -> DMatrix<f64> {
    let d = phi.group.dim();
    let mut m = DMatrix::zeros(d * foam.n_faces(), d * foam.n_edges());
    for (f, word) in foam.faces.iter().enumerate() {
        let prefixes = connection::prefixes(foam, phi, f);
        for (i, l) in word.letters.iter().enumerate() {
            let (p, sign) = if l.exponent > 0 {
                (&prefixes[i], 1.0)
            } else {
                (&prefixes[i + 1], -1.0)
            };
            let mut view = m.view_mut((f * d, l.edge * d), (d, d));
            view += p.adjoint() * sign;
        }
    }
    m
}

/// Matrices of `δ⁰` and `δ¹` at one connection.
#[derive(Debug, Clone)]
pub struct TwistedComplex {
    pub group: crate::group::Group,
    pub delta0: DMatrix<f64>,
    pub delta1: DMatrix<f64>,
}

impl TwistedComplex {
    pub fn new(foam: &Foam, phi: &Connection) -> Result<Self> {
        require_reduced(foam, phi)?;
        Ok(TwistedComplex {
            group: phi.group,
            delta0: build_delta0(foam, phi),
            delta1: build_delta1(foam, phi),
        })
    }

    /// `max |(δ¹δ⁰)_{ij}|`.
    pub fn exactness_defect(&self) -> f64 {
        (&self.delta1 * &self.delta0).amax()
    }

    /// `dim C⁰, dim C¹, dim C²`.
    pub fn dims(&self) -> [usize; 3] {
        [self.delta0.ncols(), self.delta0.nrows(), self.delta1.nrows()]
    }
}

pub(crate) fn stack_rows(top: &DMatrix<f64>, bottom: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    m.view_mut((0, 0), top.shape()).copy_from(top);
    m.view_mut((top.nrows(), 0), bottom.shape()).copy_from(bottom);
    m
}

/// Classification flags of a flat connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Flags {
    /// `b² = 0`.
    pub regular: bool,
    /// `b⁰` larger than the dimension of the center.
    pub reducible: bool,
    /// `rank δ⁰ = 0`.
    pub central: bool,
    /// Some rank decision had a singular-value gap below the warning level.
    pub ill_conditioned: bool,
}

/// Ranks, twisted Betti numbers and diagnostics at one connection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohomologyReport {
    pub rank0: usize,
    pub rank1: usize,
    pub b0: usize,
    pub b1: usize,
    pub b2: usize,
    /// `dim ker δ¹`.
    pub kernel1: usize,
    pub delta0: RankDecision,
    pub delta1: RankDecision,
    /// Dimension of the harmonic space `ker δ⁰ᵀ ∩ ker δ¹`, computed
    /// independently of the ranks.
    pub harmonic1: usize,
    pub euler_ok: bool,
    /// `max |δ¹δ⁰|`.
    pub exactness: f64,
    pub flags: Flags,
}

/// Twisted cohomology of a connection on a reduced foam.
pub fn cohomology(foam: &Foam, phi: &Connection) -> Result<CohomologyReport> {
    let cx = TwistedComplex::new(foam, phi)?;
    Ok(report(&cx, foam.euler_characteristic()))
}

pub(crate) fn report(cx: &TwistedComplex, euler: i64) -> CohomologyReport {
    let [c0, c1, c2] = cx.dims();
    let s0 = FullSvd::new(&cx.delta0);
    let s1 = FullSvd::new(&cx.delta1);
    let (rank0, rank1) = (s0.rank(), s1.rank());
    let b0 = c0 - rank0;
    // off the flat set δ¹δ⁰ ≠ 0 and the ranks can overlap
    let b1 = c1.saturating_sub(rank0 + rank1);
    let b2 = c2 - rank1;
    // ker δ⁰ᵀ ∩ ker δ¹, from the stacked matrix rather than the ranks above.
    let stacked = stack_rows(&cx.delta0.transpose(), &cx.delta1);
    let harmonic1 = c1 - FullSvd::new(&stacked).rank();
    let dim_g = cx.group.dim() as i64;
    let euler_ok = b0 as i64 - harmonic1 as i64 + b2 as i64 == dim_g * euler;
    let flags = Flags {
        regular: b2 == 0,
        reducible: b0 > cx.group.center_dim(),
        central: rank0 == 0,
        ill_conditioned: s0.decision.ill_conditioned || s1.decision.ill_conditioned,
    };
    CohomologyReport {
        rank0,
        rank1,
        b0,
        b1,
        b2,
        kernel1: c1 - rank1,
        delta0: s0.decision,
        delta1: s1.decision,
        harmonic1,
        euler_ok,
        exactness: cx.exactness_defect(),
        flags,
    }
}

/// Per-stratum tally in a [`MinB2`] report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub b0: usize,
    pub b1: usize,
    pub b2: usize,
    pub tag: String,
    pub count: usize,
}

/// Result of sampling the flat set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinB2 {
    pub b2_0: usize,
    pub histogram: BTreeMap<usize, usize>,
    pub strata: Vec<Stratum>,
    pub samples: usize,
    pub failures: usize,
    pub possibly_singular: usize,
    pub ill_conditioned: usize,
    pub euler_failures: usize,
    pub max_exactness: f64,
    pub warnings: Vec<String>,
}

impl MinB2 {
    /// Histogram CSV with columns `b0,b1,b2,count,tag`.
    pub fn histogram_csv(&self) -> String {
        let mut s = String::from("b0,b1,b2,count,tag\n");
        for st in &self.strata {
            s.push_str(&format!("{},{},{},{},{}\n", st.b0, st.b1, st.b2, st.count, st.tag));
        }
        s
    }

    /// Every internal check passed.
    pub fn consistent(&self) -> bool {
        self.euler_failures == 0 && self.ill_conditioned == 0 && self.max_exactness < 1e-10
    }
}

/// Mark samples whose `dim ker δ¹` exceeds the minimum over their tag.
pub fn flag_singular(samples: &mut [(FlatSample, CohomologyReport)]) {
    let mut min_kernel: BTreeMap<String, usize> = BTreeMap::new();
    for (s, r) in samples.iter() {
        let k = min_kernel.entry(s.tag().to_string()).or_insert(usize::MAX);
        *k = (*k).min(r.kernel1);
    }
    for (s, r) in samples.iter_mut() {
        s.possibly_singular = Some(r.kernel1 > min_kernel[s.tag()]);
    }
}

/// Sample `n_samples` flat connections and summarize their twisted Betti
/// numbers. `b²₀` is the minimum of `b²` over all samples.
pub fn min_b2(
    foam: &Foam,
    group: crate::group::Group,
    n_samples: usize,
    seed: u64,
    workers: usize,
) -> Result<MinB2> {
    let foam = crate::foam::reduce(foam)?;
    let opts = FlatOptions::default();
    let per_stream = par::map_streams(seed, n_samples, workers, |stream, rng, count| {
        let mut out = Vec::with_capacity(count);
        let mut failures = 0;
        for k in 0..count {
            // Alternate analytic families and descent when both exist.
            let use_descent = (stream + k) % 2 == 1;
            let sample = if use_descent {
                connection::find_flat(&foam, group, rng, &opts)
            } else {
                connection::sample_flat(&foam, group, rng, &opts)
            };
            match sample.and_then(|s| cohomology(&foam, &s.connection).map(|r| (s, r))) {
                Ok(pair) => out.push(pair),
                Err(_) => failures += 1,
            }
        }
        (out, failures)
    });
    let mut samples = Vec::new();
    let mut failures = 0;
    for (s, f) in per_stream {
        samples.extend(s);
        failures += f;
    }
    if samples.is_empty() {
        return Err(Error::NoFlatConnection);
    }
    flag_singular(&mut samples);
    Ok(summarize(&samples, failures))
}

pub(crate) fn summarize(samples: &[(FlatSample, CohomologyReport)], failures: usize) -> MinB2 {
    let mut histogram = BTreeMap::new();
    let mut strata: BTreeMap<(usize, usize, usize, String), usize> = BTreeMap::new();
    let mut possibly_singular = 0;
    let mut ill = 0;
    let mut euler_failures = 0;
    let mut max_exactness: f64 = 0.0;
    for (s, r) in samples {
        *histogram.entry(r.b2).or_insert(0) += 1;
        *strata.entry((r.b0, r.b1, r.b2, s.tag().to_string())).or_insert(0) += 1;
        possibly_singular += usize::from(s.possibly_singular == Some(true));
        ill += usize::from(r.flags.ill_conditioned);
        euler_failures += usize::from(!r.euler_ok && !r.flags.ill_conditioned);
        max_exactness = max_exactness.max(r.exactness);
    }
    let b2_0 = *histogram.keys().next().expect("at least one sample");
    let mut warnings = Vec::new();
    if histogram.len() > 1 {
        warnings.push(format!(
            "b2 is not constant on the sampled flat set ({} strata); b2_0 is the minimum",
            histogram.len()
        ));
    }
    if possibly_singular > 0 {
        warnings.push(format!("{possibly_singular} sample(s) possibly singular"));
    }
    if ill > 0 {
        warnings.push(format!("{ill} rank decision(s) with a small singular-value gap"));
    }
    if failures > 0 {
        warnings.push(format!("{failures} sample(s) failed to converge"));
    }
    MinB2 {
        b2_0,
        histogram,
        strata: strata
            .into_iter()
            .map(|((b0, b1, b2, tag), count)| Stratum { b0, b1, b2, tag, count })
            .collect(),
        samples: samples.len(),
        failures,
        possibly_singular,
        ill_conditioned: ill,
        euler_failures,
        max_exactness,
        warnings,
    }
}
