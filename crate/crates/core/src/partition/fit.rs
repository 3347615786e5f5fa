use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{lambda, ZEstimate};
use crate::error::{Error, Result};
use crate::linalg::FullSvd;

/// With-log is preferred when it cuts the residual RMS by at least this.
pub const SELECTION_RATIO: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    /// `log Z = c + Ω log Λ_τ`.
    Pure,
    /// `log Z = c + Ω log Λ_τ + β log log(1/τ)`.
    WithLog,
    /// Both, then select.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub omega: f64,
    pub log_const: f64,
    /// `β`; zero for the pure model.
    pub log_power: f64,
    /// `log Z − model`, per grid point.
    pub residuals: Vec<f64>,
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub model: FitModel,
    pub omega: f64,
    pub log_const: f64,
    pub with_log_correction: bool,
    /// Dominant part: `Λ_τ^{-Ω} Z_τ` with `Ω` rounded, extrapolated to `τ = 0`.
    pub z_prime: f64,
    pub omega_rounded: i32,
    pub residuals: Vec<f64>,
    pub rms: f64,
    pub tau_grid: Vec<f64>,
    pub pure: FitSummary,
    pub with_log: Option<FitSummary>,
    /// `rms(pure) / rms(with-log)`.
    pub improvement: Option<f64>,
}

fn least_squares(rows: &[Vec<f64>], y: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    let k = rows[0].len();
    let a = DMatrix::from_fn(rows.len(), k, |i, j| rows[i][j] * w[i].sqrt());
    let b = DVector::from_fn(y.len(), |i, _| y[i] * w[i].sqrt());
    let svd = FullSvd::new(&a);
    if svd.rank() < k {
        return Err(Error::Fit("degenerate design matrix".into()));
    }
    Ok(svd.solve(&b).iter().copied().collect())
}

fn fit_one(taus: &[f64], logz: &[f64], w: &[f64], with_log: bool) -> Result<FitSummary> {
    let rows: Vec<Vec<f64>> = taus
        .iter()
        .map(|&t| {
            let mut r = vec![1.0, lambda(t).ln()];
            if with_log {
                r.push((1.0 / t).ln().ln());
            }
            r
        })
        .collect();
    let c = least_squares(&rows, logz, w)?;
    let residuals: Vec<f64> = rows
        .iter()
        .zip(logz)
        .map(|(r, y)| y - r.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    let rms = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    Ok(FitSummary {
        omega: c[1],
        log_const: c[0],
        log_power: if with_log { c[2] } else { 0.0 },
        residuals,
        rms,
    })
}

/// Value at `τ = 0` of the polynomial in `√τ` through the given `(τ, y)`.
pub fn extrapolate_sqrt(points: &[(f64, f64)]) -> f64 {
    // Neville at h = 0
    let h: Vec<f64> = points.iter().map(|p| p.0.sqrt()).collect();
    let mut p: Vec<f64> = points.iter().map(|p| p.1).collect();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (h[i + m] * p[i] - h[i] * p[i + 1]) / (h[i + m] - h[i]);
        }
    }
    p[0]
}

/// Weighted least-squares fit of `log Z` against `log Λ_τ` (and
/// `log log(1/τ)`). Weights are `(value/stderr)²` when every point has an
/// error bar, uniform otherwise; the RMS is over unweighted residuals.
pub fn fit_scaling(points: &[ZEstimate], model: FitModel) -> Result<ScalingFit> {
    if points.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 points, got {}", points.len())));
    }
    if let Some(p) = points.iter().find(|p| !(p.value > 0.0) || !(p.tau > 0.0)) {
        return Err(Error::Fit(format!("non-positive value {} at tau {}", p.value, p.tau)));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.tau.total_cmp(&b.tau));
    let taus: Vec<f64> = pts.iter().map(|p| p.tau).collect();
    let (lo, hi) = (taus[0], taus[taus.len() - 1]);
    if hi / lo < 10.0 * (1.0 - 1e-9) {
        return Err(Error::Fit(format!("grid [{lo}, {hi}] spans less than one decade")));
    }
    let logz: Vec<f64> = pts.iter().map(|p| p.value.ln()).collect();
    let w: Vec<f64> = if pts.iter().all(|p| p.stderr > 0.0) {
        pts.iter().map(|p| (p.value / p.stderr).powi(2)).collect()
    } else {
        vec![1.0; pts.len()]
    };

    let pure = fit_one(&taus, &logz, &w, false)?;
    let log_ok = hi < 1.0 && model != FitModel::Pure;
    if model == FitModel::WithLog && !log_ok {
        return Err(Error::Fit("with-log model needs every tau < 1".into()));
    }
    let with_log = if log_ok { Some(fit_one(&taus, &logz, &w, true)?) } else { None };
    let improvement = with_log.as_ref().map(|l| pure.rms / l.rms);
    let pick_log = match model {
        FitModel::Pure => false,
        FitModel::WithLog => true,
        FitModel::Auto => improvement.is_some_and(|r| r >= SELECTION_RATIO),
    };
    let chosen = if pick_log { with_log.clone().expect("fitted") } else { pure.clone() };

    let omega_rounded = chosen.omega.round() as i32;
    let near: Vec<(f64, f64)> = pts
        .iter()
        .take(3)
        .map(|p| (p.tau, p.value * p.lambda().powi(-omega_rounded)))
        .collect();
    Ok(ScalingFit {
        model: if pick_log { FitModel::WithLog } else { FitModel::Pure },
        omega: chosen.omega,
        log_const: chosen.log_const,
        with_log_correction: pick_log,
        z_prime: extrapolate_sqrt(&near),
        omega_rounded,
        residuals: chosen.residuals.clone(),
        rms: chosen.rms,
        tau_grid: taus,
        pure,
        with_log,
        improvement,
    })
}
