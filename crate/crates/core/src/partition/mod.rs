//! Regularized partition function `Z_τ = ∫ Π_f K_τ(H_f) dA` (normalized Haar
//! on every edge): Monte Carlo, exact character sums, scaling fits.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::connection::{self, Connection};
use crate::error::{Error, Result};
use crate::foam::{self, Foam};
use crate::group::{Group, GroupElement, HeatKernel, HeatMethod, Irrep};
use crate::par;

mod fit;
mod toy;

pub use fit::{extrapolate_sqrt, fit_scaling, FitModel, FitSummary, ScalingFit};
pub use toy::{fit_toy, toy_grid, toy_laplace, TOY_GRID};

/// Monte Carlo refuses `τ` below this.
pub const MC_FLOOR: f64 = 0.02;

/// Absolute tail bound targeted by the character series, relative to the sum.
const TAIL_EPS: f64 = 1e-16;

/// `Λ_τ = (4πτ)^{-1/2}`.
pub fn lambda(tau: f64) -> f64 {
    (4.0 * PI * tau).powf(-0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZMethod {
    Mc,
    CharSurface,
    CharAppendix,
    Toy,
}

impl ZMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ZMethod::Mc => "mc",
            ZMethod::CharSurface => "char-surface",
            ZMethod::CharAppendix => "char-appendix",
            ZMethod::Toy => "toy",
        }
    }
}

impl std::str::FromStr for ZMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mc" => Ok(ZMethod::Mc),
            "char-surface" => Ok(ZMethod::CharSurface),
            "char-appendix" => Ok(ZMethod::CharAppendix),
            "toy" => Ok(ZMethod::Toy),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZEstimate {
    pub tau: f64,
    pub value: f64,
    /// Standard error of the mean; zero for series.
    pub stderr: f64,
    pub method: ZMethod,
    /// MC sample count, or number of series terms kept.
    pub n_samples: Option<usize>,
    pub truncation: Option<usize>,
}

impl ZEstimate {
    pub fn lambda(&self) -> f64 {
        lambda(self.tau)
    }

    pub const CSV_HEADER: &'static str = "tau,lambda,value,stderr,method";

    pub fn csv_row(&self) -> String {
        format!("{:e},{:e},{:e},{:e},{}", self.tau, self.lambda(), self.value, self.stderr, self.method.as_str())
    }

    /// Parse rows written by [`ZEstimate::csv_row`]; the header line is optional.
    pub fn parse_csv(text: &str) -> Result<Vec<ZEstimate>> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with("tau") || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = |m: &str| Error::InvalidParameter(format!("line {}: {m}", i + 1));
            if cols.len() < 4 {
                return Err(bad("expected tau,lambda,value,stderr[,method]"));
            }
            let num = |k: usize| cols[k].parse::<f64>().map_err(|_| bad(&format!("bad number `{}`", cols[k])));
            out.push(ZEstimate {
                tau: num(0)?,
                value: num(2)?,
                stderr: num(3)?,
                method: cols.get(4).map_or(Ok(ZMethod::CharSurface), |m| m.parse())?,
                n_samples: None,
                truncation: None,
            });
        }
        Ok(out)
    }
}

pub fn estimates_csv(points: &[ZEstimate]) -> String {
    let mut s = format!("{}\n", ZEstimate::CSV_HEADER);
    for p in points {
        s.push_str(&p.csv_row());
        s.push('\n');
    }
    s
}

/// Running mean and variance, mergeable across streams.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n as f64 / n as f64,
            m2: self.m2 + o.m2 + d * d * (self.n as f64 * o.n as f64) / n as f64,
        }
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

/// Monte Carlo over `A ~ Haar^E`. Each of `workers` streams gets its own
/// ChaCha8 generator, so the result is a function of `(seed, workers)`.
pub fn z_mc(foam: &Foam, group: Group, tau: f64, n_samples: usize, seed: u64, workers: usize) -> Result<ZEstimate> {
    if !(tau > 0.0) {
        return Err(Error::NonPositiveTime(tau));
    }
    if tau < MC_FLOOR {
        return Err(Error::BelowMcFloor { tau, floor: MC_FLOOR });
    }
    let foam = foam::reduce(foam)?;
    let kernel = HeatKernel::new(group, tau, HeatMethod::Auto)?;
    if foam.n_edges() == 0 {
        let value = kernel.eval(&group.identity()).powi(foam.n_faces() as i32);
        return Ok(ZEstimate {
            tau,
            value,
            stderr: 0.0,
            method: ZMethod::Mc,
            n_samples: Some(n_samples),
            truncation: None,
        });
    }
    let parts = par::map_streams(seed, n_samples, workers, |_, rng, count| {
        let mut m = Moments::default();
        for _ in 0..count {
            let a = Connection::haar(group, foam.n_edges(), rng);
            let mut w = 1.0;
            for f in 0..foam.n_faces() {
                w *= kernel.eval(&connection::holonomy(&foam, &a, f));
            }
            m.push(w);
        }
        m
    });
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    Ok(ZEstimate {
        tau,
        value: m.mean,
        stderr: m.stderr(),
        method: ZMethod::Mc,
        n_samples: Some(m.n),
        truncation: None,
    })
}

/// Sum `Σ_{n≥1} term(n)` for a term that is eventually decreasing, stopping
/// once the geometric bound on the tail drops below `TAIL_EPS · sum`.
fn gaussian_series(tau: f64, term: impl Fn(f64) -> f64) -> (f64, usize) {
    let mut sum = 0.0;
    let mut n = 1usize;
    // past the peak of n^p e^{-τn²/4} for p ≤ 2
    let peak = (4.0 / tau).sqrt().ceil() as usize + 1;
    loop {
        let t = term(n as f64);
        sum += t;
        if n > peak {
            let r = term(n as f64 + 1.0) / t;
            if r < 1.0 && t * r / (1.0 - r) <= TAIL_EPS * sum {
                return (sum, n);
            }
        }
        n += 1;
    }
}

/// `Σ_{n>N} n^{-s}` by Euler-Maclaurin to the `f'''` term.
fn zeta_tail(s: f64, big_n: f64) -> f64 {
    let f = big_n.powf(-s);
    let f1 = -s * big_n.powf(-s - 1.0);
    let f3 = -s * (s + 1.0) * (s + 2.0) * big_n.powf(-s - 3.0);
    big_n.powf(1.0 - s) / (s - 1.0) - f / 2.0 - f1 / 12.0 + f3 / 720.0
}

/// Closed surface of genus `g`, SU(2): `Σ_j (2j+1)^{2−2g} e^{−τ j(j+1)}`.
pub fn z_char_surface(g: usize, tau: f64) -> Result<ZEstimate> {
    let p = 2.0 - 2.0 * g as f64;
    let (value, terms) = if tau == 0.0 {
        if g <= 1 {
            return Err(Error::Divergent(format!("τ = 0 diverges for genus {g}")));
        }
        let big_n = 2000usize;
        let head: f64 = (1..=big_n).rev().map(|n| (n as f64).powf(p)).sum();
        (head + zeta_tail(-p, big_n as f64), big_n)
    } else if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::NonPositiveTime(tau));
    } else {
        gaussian_series(tau, |n| n.powf(p) * (-tau * (n * n - 1.0) / 4.0).exp())
    };
    Ok(ZEstimate {
        tau,
        value,
        stderr: 0.0,
        method: ZMethod::CharSurface,
        n_samples: None,
        truncation: Some(terms),
    })
}

/// `dim Inv(j₁⊗j₁⊗j₂⊗j₂) = 2 min(j₁, j₂) + 1`.
pub fn invariant_count(j1: f64, j2: f64) -> u64 {
    Irrep::spin(j1.min(j2)).dim()
}

/// Appendix foam: `Σ_{j₁,j₂} e^{−τ(C(j₁)+C(j₂))} N(j₁, j₂)`.
///
/// Integrating `a` and `b` against `∫χ_j([a,h]) da = |χ_j(h)|²/(2j+1)`
/// cancels the dimension factors of the two heat kernels, leaving the
/// fourth-moment `∫|χ_{j₁}|²|χ_{j₂}|² dh = N(j₁, j₂)`.
pub fn z_char_appendix(tau: f64) -> Result<ZEstimate> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::NonPositiveTime(tau));
    }
    let (_, terms) = gaussian_series(tau, |n| n * (-tau * (n * n - 1.0) / 4.0).exp());
    let e: Vec<f64> = (1..=terms + 1).map(|n| (-tau * ((n * n) as f64 - 1.0) / 4.0).exp()).collect();
    // Σ_{n₁,n₂} min(n₁,n₂) E₁E₂ = Σ_n n E_n (E_n + 2 Σ_{m>n} E_m)
    let mut suffix = 0.0;
    let mut value = 0.0;
    for (i, &en) in e.iter().enumerate().rev() {
        value += (i + 1) as f64 * en * (en + 2.0 * suffix);
        suffix += en;
    }
    Ok(ZEstimate {
        tau,
        value,
        stderr: 0.0,
        method: ZMethod::CharAppendix,
        n_samples: None,
        truncation: Some(e.len()),
    })
}

/// MC estimate `(mean, stderr)` of `∫ χ_{j₁}(h)² χ_{j₂}(h)² dh`.
pub fn character_moment_mc<R: Rng + ?Sized>(j1: f64, j2: f64, samples: usize, rng: &mut R) -> (f64, f64) {
    let (r1, r2) = (Irrep::spin(j1), Irrep::spin(j2));
    let mut m = Moments::default();
    for _ in 0..samples {
        let h = Group::Su2.haar_sample(rng);
        m.push((h.character(r1) * h.character(r2)).powi(2));
    }
    (m.mean, m.stderr())
}

/// MC estimate `(mean, stderr)` of `∫ χ_j(a h a⁻¹ h⁻¹) da` at fixed `h`.
pub fn commutator_character_mc<R: Rng + ?Sized>(j: f64, h: &GroupElement, samples: usize, rng: &mut R) -> (f64, f64) {
    let r = Irrep::spin(j);
    let mut m = Moments::default();
    for _ in 0..samples {
        let a = Group::Su2.haar_sample(rng);
        m.push((a * *h * a.inverse() * h.inverse()).character(r));
    }
    (m.mean, m.stderr())
}

/// `lim Λ_τ⁻¹ Z_τ(torus)` from the character sum at `τ = 1e-4, 1e-5, 1e-6`,
/// extrapolated as a quadratic in `√τ`.
pub fn torus_character_limit() -> Result<f64> {
    let pts: Vec<(f64, f64)> = [1e-4, 1e-5, 1e-6]
        .iter()
        .map(|&t| z_char_surface(1, t).map(|z| (t, z.value / lambda(t))))
        .collect::<Result<_>>()?;
    Ok(extrapolate_sqrt(&pts))
}

/// `n` log-spaced values from `a` to `b` inclusive.
pub fn log_grid(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if !(a > 0.0 && b > a) || n < 2 {
        return Err(Error::InvalidParameter(format!("bad grid {a}:{b}:{n}")));
    }
    let (la, lb) = (a.ln(), b.ln());
    Ok((0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect())
}

#[cfg(test)]
mod tests;
