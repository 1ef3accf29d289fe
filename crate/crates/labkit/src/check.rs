use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::measured::MeasuredValue;

pub const DEFAULT_K_SIGMA: f64 = 3.0;
pub const DEFAULT_REL_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Which tolerance was the wider one and therefore decided the check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Sigma,
    Relative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub verdict: Verdict,
    pub bound: Bound,
    pub deviation: f64,
    pub sigma_bound: f64,
    pub relative_bound: f64,
    pub explanation: String,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Accepts `given` when it lies within `max(k_sigma·σ, rel_tol·|value|)`
/// of the reference.
pub fn check_result(given: f64, reference: &MeasuredValue, k_sigma: f64, rel_tol: f64) -> Result<CheckOutcome> {
    if !(k_sigma.is_finite() && k_sigma > 0.0) {
        return Err(LabError::InvalidArgument("k_sigma must be positive".into()));
    }
    if !(rel_tol.is_finite() && rel_tol >= 0.0) {
        return Err(LabError::InvalidArgument("rel_tol must be nonnegative".into()));
    }
    if !given.is_finite() || !reference.value.is_finite() || reference.sigma.is_nan() || reference.sigma < 0.0 {
        return Err(LabError::InvalidArgument("values must be finite".into()));
    }

    let deviation = (given - reference.value).abs();
    let sigma_bound = k_sigma * reference.sigma;
    let relative_bound = rel_tol * reference.value.abs();
    let (bound, limit) =
        if sigma_bound >= relative_bound { (Bound::Sigma, sigma_bound) } else { (Bound::Relative, relative_bound) };
    let verdict = if deviation <= limit { Verdict::Pass } else { Verdict::Fail };
    let bound_text = match bound {
        Bound::Sigma => format!("{k_sigma}σ bound {sigma_bound}"),
        Bound::Relative => format!("{}% relative bound {relative_bound}", rel_tol * 100.0),
    };
    let explanation = match verdict {
        Verdict::Pass => format!(
            "pass: |{given} − {}| = {deviation} is within the {bound_text} (the {} bound is {})",
            reference.value,
            match bound {
                Bound::Sigma => "relative",
                Bound::Relative => "σ",
            },
            match bound {
                Bound::Sigma => relative_bound,
                Bound::Relative => sigma_bound,
            },
        ),
        Verdict::Fail => format!(
            "fail: |{given} − {}| = {deviation} exceeds both the {k_sigma}σ bound {sigma_bound} and the {}% relative bound {relative_bound}",
            reference.value,
            rel_tol * 100.0,
        ),
    };
    Ok(CheckOutcome { verdict, bound, deviation, sigma_bound, relative_bound, explanation })
}
