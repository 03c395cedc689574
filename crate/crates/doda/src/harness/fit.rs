//! Scaling-law fits over (n, mean duration) points.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    Power,
    NLogN,
}

/// A fitted scaling model. For `Power`, `y ~ coefficient * n^exponent`; for
/// `NLogN`, `y ~ coefficient * n ln n` (exponent reported as 1). The residual
/// is the RMS of the log-space residuals.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub model: FitModel,
    pub exponent: f64,
    pub coefficient: f64,
    pub residual: f64,
}

fn check_points(points: &[(f64, f64)]) -> Result<()> {
    if points.len() < 3 {
        return Err(Error::Config(format!(
            "need at least 3 points to fit, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::Config("fit points must be strictly positive".into()));
    }
    Ok(())
}

/// Least-squares slope of `ln y` on `ln n`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    check_points(points)?;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("fit points share a single n".into()));
    }
    let exponent = sxy / sxx;
    let intercept = mean_y - exponent * mean_x;
    let residual = (logs
        .iter()
        .map(|p| (p.1 - (intercept + exponent * p.0)).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    Ok(FitResult { model: FitModel::Power, exponent, coefficient: intercept.exp(), residual })
}

/// Log-space least squares of `y = a * n ln n` (single free parameter).
pub fn fit_n_log_n(points: &[(f64, f64)]) -> Result<FitResult> {
    check_points(points)?;
    if points.iter().any(|&(x, _)| x <= 1.0) {
        return Err(Error::Config("n log n fit needs n > 1".into()));
    }
    let ratios: Vec<f64> = points.iter().map(|&(x, y)| (y / (x * x.ln())).ln()).collect();
    let k = ratios.len() as f64;
    let log_a = ratios.iter().sum::<f64>() / k;
    let residual = (ratios.iter().map(|r| (r - log_a).powi(2)).sum::<f64>() / k).sqrt();
    Ok(FitResult { model: FitModel::NLogN, exponent: 1.0, coefficient: log_a.exp(), residual })
}
