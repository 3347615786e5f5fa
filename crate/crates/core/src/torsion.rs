//! Reidemeister torsion of the twisted complex at a flat connection, and the
//! torus moduli-space checks.
//!
//! Bases: `c^k` standard, `h⁰ = ker δ⁰`, `h¹ = ker δ¹ ∩ (im δ⁰)^⊥` (harmonic
//! representatives), `h² = (im δ¹)^⊥`, all orthonormal. The lifts `d⁰, d¹`
//! span `(ker δ^k)^⊥` and are deliberately not orthonormal, so the
//! determinant pipeline really exercises their cancellation.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::connection::{AnalyticFamily, Connection, FlatSample};
use crate::error::{Error, Result};
use crate::foam::{self, Foam};
use crate::group::{Group, GroupElement};
use crate::linalg::{self, FullSvd};
use crate::twisted::{self, stack_rows, TwistedComplex};

/// `|det| / Hadamard bound` below this counts as a zero pivot.
const PIVOT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TorsionCase {
    /// `b⁰` equals the dimension of the center.
    Irreducible,
    Reducible,
}

/// What the basis completions looked like.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasesMeta {
    /// `(b⁰, b¹, b²)`.
    pub betti: [usize; 3],
    pub rank0: usize,
    pub rank1: usize,
    /// Signed determinants `τ⁰, τ¹, τ²`.
    pub tau: [f64; 3],
    /// `h^k` were rotated by random orthogonal matrices.
    pub rotated_h: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsionValue {
    /// `|τ¹| / (|τ⁰| |τ²|)`.
    pub magnitude: f64,
    pub case: TorsionCase,
    /// `Π σ(δ⁰) / Π σ(δ¹)`, the same quantity from singular values.
    pub spectral: f64,
    pub bases_meta: BasesMeta,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TorsionOptions {
    /// Modal `b⁰` of the sample's component; samples that differ are refused.
    pub expected_b0: Option<usize>,
    /// Rotate the orthonormal `h^k` by random orthogonal matrices.
    pub rotate_h: bool,
}

fn det_checked(blocks: &[&DMatrix<f64>], what: &'static str) -> Result<f64> {
    let d = linalg::det_of_columns(blocks);
    let bound = linalg::hadamard_bound(blocks);
    if !(d.abs() > PIVOT_EPS * bound) {
        return Err(Error::ZeroPivot(what));
    }
    Ok(d)
}

fn rotate<R: Rng + ?Sized>(h: DMatrix<f64>, rng: &mut R) -> DMatrix<f64> {
    let k = h.ncols();
    &h * linalg::random_orthogonal(k, rng)
}

/// Torsion at a flat sample with default options.
pub fn torsion_at<R: Rng + ?Sized>(foam: &Foam, sample: &FlatSample, rng: &mut R) -> Result<TorsionValue> {
    torsion_with(foam, sample, rng, &TorsionOptions::default())
}

pub fn torsion_with<R: Rng + ?Sized>(
    foam: &Foam,
    sample: &FlatSample,
    rng: &mut R,
    opts: &TorsionOptions,
) -> Result<TorsionValue> {
    if sample.possibly_singular == Some(true) {
        return Err(Error::SingularConnection);
    }
    if !(sample.residual < crate::connection::FLAT_TOL) {
        return Err(Error::InvalidParameter(format!("connection is not flat (residual {:e})", sample.residual)));
    }
    let cx = TwistedComplex::new(foam, &sample.connection)?;
    let s0 = FullSvd::new(&cx.delta0);
    let s1 = FullSvd::new(&cx.delta1);
    for s in [&s0, &s1] {
        if s.decision.ill_conditioned {
            return Err(Error::IllConditioned(s.decision.gap));
        }
    }
    let (r0, r1) = (s0.rank(), s1.rank());
    let [c0, c1, c2] = cx.dims();
    let b0 = c0 - r0;
    if let Some(expected) = opts.expected_b0 {
        if b0 != expected {
            return Err(Error::IsotropyMismatch { found: b0, expected });
        }
    }

    let d0 = s0.coimage() * linalg::random_invertible(r0, rng);
    let d1 = s1.coimage() * linalg::random_invertible(r1, rng);
    let mut h0 = s0.kernel();
    let mut h1 = FullSvd::new(&stack_rows(&cx.delta1, &cx.delta0.transpose())).kernel();
    let mut h2 = s1.cokernel();
    if opts.rotate_h {
        h0 = rotate(h0, rng);
        h1 = rotate(h1, rng);
        h2 = rotate(h2, rng);
    }
    let b = [h0.ncols(), h1.ncols(), h2.ncols()];
    if r0 + r1 > c1 || b[1] != c1 - r0 - r1 {
        return Err(Error::ZeroPivot("harmonic space dimension"));
    }

    let tau0 = det_checked(&[&h0, &d0], "tau0")?;
    let img0 = &cx.delta0 * &d0;
    let tau1 = det_checked(&[&img0, &h1, &d1], "tau1")?;
    let img1 = &cx.delta1 * &d1;
    let tau2 = det_checked(&[&img1, &h2], "tau2")?;
    debug_assert_eq!(b[2], c2 - r1);

    Ok(TorsionValue {
        magnitude: tau1.abs() / (tau0.abs() * tau2.abs()),
        case: if b0 == cx.group.center_dim() {
            TorsionCase::Irreducible
        } else {
            TorsionCase::Reducible
        },
        spectral: s0.pseudo_determinant() / s1.pseudo_determinant(),
        bases_meta: BasesMeta {
            betti: b,
            rank0: r0,
            rank1: r1,
            tau: [tau0, tau1, tau2],
            rotated_h: opts.rotate_h,
        },
    })
}

/// Torsion of several samples of one component, refusing samples whose
/// isotropy dimension differs from the most common one.
pub fn torsion_batch<R: Rng + ?Sized>(
    foam: &Foam,
    samples: &[FlatSample],
    rng: &mut R,
) -> Vec<Result<TorsionValue>> {
    let mut counts = std::collections::BTreeMap::new();
    for s in samples {
        *counts.entry(s.b0).or_insert(0usize) += 1;
    }
    let modal = counts.iter().max_by_key(|(_, &c)| c).map(|(&b, _)| b);
    let opts = TorsionOptions {
        expected_b0: modal,
        rotate_h: false,
    };
    samples.iter().map(|s| torsion_with(foam, s, rng, &opts)).collect()
}

/// `|det[δ¹ d¹ | h²]|` with orthonormal `d¹` and `h²`, i.e. the volume of
/// the image of a unit cube of `(ker δ¹)^⊥`.
pub fn delta1_volume(foam: &Foam, phi: &Connection) -> Result<f64> {
    let d1 = twisted::build_delta1(foam, phi);
    let s1 = FullSvd::new(&d1);
    let img = &d1 * s1.coimage();
    Ok(det_checked(&[&img, &s1.cokernel()], "delta1 volume")?.abs())
}

fn torus_connection(psi_a: f64, psi_b: f64, axis: [f64; 3], sign: f64) -> Connection {
    Connection::new(
        Group::Su2,
        vec![
            GroupElement::su2_axis_angle(psi_a, axis),
            GroupElement::su2_axis_angle(sign * psi_b, axis),
        ],
    )
}

/// One row of the torus volume check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeRow {
    pub psi_a: f64,
    pub psi_b: f64,
    pub vol: f64,
    pub formula: f64,
    pub abs_error: f64,
    pub torsion: f64,
}

/// `δ¹` volume on an `n × n` grid of `(ψ_a, ψ_b) ∈ (lo, hi)²` against
/// `4 (sin²ψ_a + sin²ψ_b)`. Grid points are cell midpoints.
pub fn torus_volume_grid<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Result<Vec<VolumeRow>> {
    let torus = foam::builtin("torus")?;
    let h = (hi - lo) / n as f64;
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (pa, pb) = (lo + (i as f64 + 0.5) * h, lo + (j as f64 + 0.5) * h);
            let fam = AnalyticFamily::Torus {
                psi_a: pa,
                psi_b: pb,
                axis: [0.3, -0.5, 0.8],
                sign: if (i + j) % 2 == 0 { 1 } else { -1 },
            };
            let sample = crate::connection::analytic_flat(&torus, &fam, rng)?;
            let vol = delta1_volume(&torus, &sample.connection)?;
            let formula = 4.0 * (pa.sin().powi(2) + pb.sin().powi(2));
            let tor = torsion_at(&torus, &sample, rng)?;
            rows.push(VolumeRow {
                psi_a: pa,
                psi_b: pb,
                vol,
                formula,
                abs_error: (vol - formula).abs(),
                torsion: tor.magnitude,
            });
        }
    }
    Ok(rows)
}

/// CSV with columns `psi_a,psi_b,vol,formula,abs_error`.
pub fn volume_grid_csv(rows: &[VolumeRow]) -> String {
    let mut s = String::from("psi_a,psi_b,vol,formula,abs_error\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{},{:e}\n", r.psi_a, r.psi_b, r.vol, r.formula, r.abs_error));
    }
    s
}

/// Pieces of the torus dominant-part quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominantPart {
    /// `lim Λ_τ^{-1} Z_τ(torus)` with normalized Haar measure.
    pub value: f64,
    /// `∫_F vol_F / vol_B` in the Riemannian measure (the `2π³` constant).
    pub moduli_integral: f64,
    /// Number of torus components (the `±` branches).
    pub components: usize,
    pub n_quad: usize,
    /// Largest relative deviation of the numerical chart volume density from
    /// `(sin²ψ_a + sin²ψ_b) sin θ` at the quadrature nodes.
    pub chart_density_error: f64,
}

/// Right-trivialized tangents of the chart
/// `(ψ_a, ψ_b, θ, φ) ↦ (exp(ψ_a n̂), exp(±ψ_b n̂))`, by central differences.
fn chart_jacobian(x: [f64; 4], sign: f64) -> DMatrix<f64> {
    let conn = |x: [f64; 4]| {
        let axis = [x[2].sin() * x[3].cos(), x[2].sin() * x[3].sin(), x[2].cos()];
        torus_connection(x[0], x[1], axis, sign)
    };
    let base = conn(x);
    let h = 1e-6;
    let mut jac = DMatrix::zeros(6, 4);
    for k in 0..4 {
        let (mut p, mut m) = (x, x);
        p[k] += h;
        m[k] -= h;
        let (cp, cm) = (conn(p), conn(m));
        for e in 0..2 {
            let inv = base.elements[e].inverse();
            let lp = (cp.elements[e] * inv).log().expect("near identity");
            let lm = (cm.elements[e] * inv).log().expect("near identity");
            for c in 0..3 {
                jac[(3 * e + c, k)] = (lp.components()[c] - lm.components()[c]) / (2.0 * h);
            }
        }
    }
    jac
}

/// Dominant part of `Z_τ(torus)` by quadrature over the analytic chart.
///
/// Near `F` the integrand is Gaussian in the directions transverse to `F`,
/// which gives `Z_τ ≈ Vol(G)^{F−E} (2Λ_τ)^{3F − rank δ¹} ∫_F vol_F / vol_B`
/// with `vol_B = Π σ(δ¹)`. The density `vol_F` comes from the Gram
/// determinant of the chart tangents at `θ = π/2`; the sphere of axes
/// contributes `4π` by rotation invariance.
pub fn torus_dominant_part(n_quad: usize) -> Result<DominantPart> {
    let n = NonZeroUsize::new(n_quad).ok_or_else(|| Error::Quadrature("n_quad must be positive".into()))?;
    let torus = foam::builtin("torus")?;
    let rule = GaussLegendre::new(n);
    let mut worst: f64 = 0.0;
    let mut failure = None;
    let mut integral = 0.0;
    for sign in [1.0, -1.0] {
        integral += rule.integrate(0.0, PI, |pa| {
            rule.integrate(0.0, PI, |pb| {
                let x = [pa, pb, PI / 2.0, 0.0];
                let j = chart_jacobian(x, sign);
                let vol_f = (j.transpose() * &j).determinant().max(0.0).sqrt();
                let expect = pa.sin().powi(2) + pb.sin().powi(2);
                worst = worst.max((vol_f - expect).abs() / expect);
                let axis = [1.0, 0.0, 0.0];
                let conn = torus_connection(pa, pb, axis, sign);
                let s1 = FullSvd::new(&twisted::build_delta1(&torus, &conn));
                if s1.rank() != 2 {
                    failure = Some(format!("rank δ¹ = {} at ({pa}, {pb})", s1.rank()));
                }
                vol_f / s1.pseudo_determinant()
            })
        });
    }
    if let Some(msg) = failure {
        return Err(Error::Quadrature(msg));
    }
    let moduli_integral = 4.0 * PI * integral;
    let g = Group::Su2;
    let (e, f, rank) = (2i32, 1i32, 2i32);
    // Λ-free part of the prefactor; the remaining power of Λ is 3F − rank = 1.
    let value = g.riemannian_volume().powi(f - e) * 2f64.powi(3 * f - rank) * moduli_integral;
    Ok(DominantPart {
        value,
        moduli_integral,
        components: 2,
        n_quad,
        chart_density_error: worst,
    })
}

/// Stacked Lie components of a connection's logarithms, handy in tests.
pub fn log_coordinates(a: &Connection) -> Result<DVector<f64>> {
    let d = a.group.dim();
    let mut v = DVector::zeros(d * a.len());
    for (e, g) in a.elements.iter().enumerate() {
        v.rows_mut(e * d, d).copy_from_slice(g.log()?.components());
    }
    Ok(v)
}

#[cfg(test)]
mod tests;
