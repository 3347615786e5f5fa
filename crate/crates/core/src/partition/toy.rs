//! The two-dimensional toy integral `z_τ = ∫_{[−L,L]²} e^{−(xy)²/τ} dx dy`.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use super::{fit_scaling, log_grid, FitModel, ScalingFit, ZEstimate, ZMethod};
use crate::error::{Error, Result};

/// Default fit window and point count.
pub const TOY_GRID: (f64, f64, usize) = (1e-6, 1e-2, 9);

pub fn toy_grid() -> Vec<f64> {
    log_grid(TOY_GRID.0, TOY_GRID.1, TOY_GRID.2).expect("valid constant grid")
}

/// `[0, s]` followed by doubling panels up to `end`.
fn graded_panels(s: f64, end: f64) -> Vec<(f64, f64)> {
    if s >= end {
        return vec![(0.0, end)];
    }
    let mut out = vec![(0.0, s)];
    let mut a = s;
    while a < end {
        let b = (2.0 * a).min(end);
        out.push((a, b));
        a = b;
    }
    out
}

fn toy_with(rule: &GaussLegendre, tau: f64, l: f64) -> f64 {
    let root = tau.sqrt();
    let inner = |x: f64| {
        if x == 0.0 {
            return l;
        }
        // e^{-(xy)²/τ} is below 1e-690 past y = 40√τ/x
        let s = root / x;
        let end = l.min(40.0 * s);
        graded_panels(s, end)
            .into_iter()
            .map(|(a, b)| rule.integrate(a, b, |y| (-(x * y) * (x * y) / tau).exp()))
            .sum::<f64>()
    };
    let outer: f64 = graded_panels(root / l, l)
        .into_iter()
        .map(|(a, b)| rule.integrate(a, b, inner))
        .sum();
    4.0 * outer
}

/// Nested Gauss-Legendre with `quadrature_n` nodes per panel, panels graded
/// geometrically toward both axes. Fails when doubling the node count moves
/// the value by more than `1e-10` relative.
pub fn toy_laplace(tau: f64, half_width: f64, quadrature_n: usize) -> Result<f64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::NonPositiveTime(tau));
    }
    if !(half_width > 0.0) {
        return Err(Error::InvalidParameter(format!("half width {half_width}")));
    }
    let n = NonZeroUsize::new(quadrature_n).ok_or_else(|| Error::Quadrature("quadrature_n must be positive".into()))?;
    let n2 = NonZeroUsize::new(2 * quadrature_n).expect("nonzero");
    let z1 = toy_with(&GaussLegendre::new(n), tau, half_width);
    let z2 = toy_with(&GaussLegendre::new(n2), tau, half_width);
    if (z1 - z2).abs() > 1e-10 * z2.abs() {
        return Err(Error::Quadrature(format!(
            "toy integral at tau {tau}: {z1} vs {z2} after doubling nodes"
        )));
    }
    Ok(z2)
}

/// Fit `z_τ` on the grid with automatic model selection.
pub fn fit_toy(grid: &[f64], half_width: f64, quadrature_n: usize) -> Result<ScalingFit> {
    let pts = grid
        .iter()
        .map(|&t| {
            toy_laplace(t, half_width, quadrature_n).map(|value| ZEstimate {
                tau: t,
                value,
                stderr: 0.0,
                method: ZMethod::Toy,
                n_samples: None,
                truncation: Some(quadrature_n),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    fit_scaling(&pts, FitModel::Auto)
}
