use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Marginal-explained-variance elbow rule.
///
/// With `E(k) = 1 - W(k) / W(1)`, the chosen k is the smallest one whose
/// next step gains less than `marginal_gain_threshold` of the total
/// variance. A total variance at or below `zero_tol` means k = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElbowParams {
    pub zero_tol: f64,
    pub marginal_gain_threshold: f64,
}

impl Default for ElbowParams {
    fn default() -> Self {
        ElbowParams {
            zero_tol: 1e-12,
            marginal_gain_threshold: 0.10,
        }
    }
}

impl ElbowParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.zero_tol.is_finite() && self.zero_tol >= 0.0) {
            return Err(Error::InvalidArgument(format!("zero_tol must be >= 0, got {}", self.zero_tol)));
        }
        if !(self.marginal_gain_threshold > 0.0 && self.marginal_gain_threshold < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "marginal_gain_threshold must be in (0, 1), got {}",
                self.marginal_gain_threshold
            )));
        }
        Ok(())
    }
}

const MONOTONE_TOL: f64 = 1e-9;

/// Per-ego optimal k from a WCSS curve indexed from k = 1.
pub fn elbow_optimal_k(curve: &[f64], params: &ElbowParams) -> Result<usize> {
    let Some(&total) = curve.first() else {
        return Err(Error::InvalidArgument("WCSS curve is empty".into()));
    };
    if let Some(v) = curve.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidArgument(format!("WCSS values must be finite and >= 0, got {v}")));
    }
    let slack = MONOTONE_TOL * total.max(1.0);
    if let Some(k) = curve.windows(2).position(|w| w[1] > w[0] + slack) {
        return Err(Error::InvalidArgument(format!(
            "WCSS curve increases from k = {} to k = {}",
            k + 1,
            k + 2
        )));
    }
    if total <= params.zero_tol {
        return Ok(1);
    }
    let explained = |k: usize| 1.0 - curve[k - 1] / total;
    for k in 1..curve.len() {
        if explained(k + 1) - explained(k) < params.marginal_gain_threshold {
            return Ok(k);
        }
    }
    Ok(curve.len())
}
