use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::measured::MeasuredValue;

/// Counts of an unknown and a reference source taken in identical geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivityInput {
    /// Known activity of the reference source, Bq.
    pub a_ref: MeasuredValue,
    pub n_x: u64,
    pub t_x: f64,
    pub n_ref: u64,
    pub t_ref: f64,
}

/// Activity of the unknown source by comparison of count rates:
/// `A_x = A_ref · (N_x/t_x) / (N_ref/t_ref)`, with relative errors of
/// `A_ref`, `N_x` and `N_ref` added in quadrature.
///
/// Equal counting geometry is assumed and cannot be checked here.
pub fn relative_activity(input: &ActivityInput) -> Result<MeasuredValue> {
    if input.n_x == 0 || input.n_ref == 0 {
        return Err(LabError::DomainError("counts must be at least 1".into()));
    }
    for t in [input.t_x, input.t_ref] {
        if !(t.is_finite() && t > 0.0) {
            return Err(LabError::DomainError("live times must be positive".into()));
        }
    }
    let a_ref = input.a_ref;
    if !(a_ref.value.is_finite() && a_ref.value != 0.0) || a_ref.sigma.is_nan() || a_ref.sigma < 0.0 {
        return Err(LabError::DomainError("reference activity must be nonzero with a nonnegative error".into()));
    }

    let (n_x, n_ref) = (input.n_x as f64, input.n_ref as f64);
    let ratio = (n_x / input.t_x) / (n_ref / input.t_ref);
    let value = a_ref.value * ratio;
    let rel = (a_ref.relative_sigma().powi(2) + 1.0 / n_x + 1.0 / n_ref).sqrt();
    Ok(MeasuredValue::new(value, value.abs() * rel))
}
