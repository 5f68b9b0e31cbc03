use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("no returns to summarize")]
    Empty,
    #[error("cvar alpha must lie in (0, 1], got {0}")]
    Alpha(f64),
}

/// Statistics of a list of episode returns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnStats {
    pub mean: f64,
    /// Sample standard deviation (0 for a single value).
    pub std: f64,
    /// Half-width of the 95% normal-approximation interval of the mean.
    pub ci95: f64,
    pub min: f64,
    pub cvar: f64,
}

/// Mean, sample std and 95% half-width.
pub fn mean_ci(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let std = var.sqrt();
    (mean, std, 1.96 * std / n.sqrt())
}

/// Mean of the `ceil(alpha * K)` lowest returns.
pub fn cvar(returns: &[f64], alpha: f64) -> Result<f64, MetricsError> {
    if returns.is_empty() {
        return Err(MetricsError::Empty);
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(MetricsError::Alpha(alpha));
    }
    let mut sorted = returns.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = ((alpha * sorted.len() as f64 - 1e-9).ceil() as usize).clamp(1, sorted.len());
    let tail = sorted[..k].iter().sum::<f64>() / k as f64;
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    Ok(tail.clamp(sorted[0], mean.max(sorted[0])))
}

pub fn compute_metrics(returns: &[f64], alpha: f64) -> Result<ReturnStats, MetricsError> {
    let cvar = cvar(returns, alpha)?;
    let (mean, std, ci95) = mean_ci(returns);
    let min = returns.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ReturnStats { mean, std, ci95, min, cvar })
}
