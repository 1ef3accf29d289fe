use std::fmt;

use serde::{Deserialize, Serialize};

/// A value with its one-standard-deviation statistical error σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredValue {
    pub value: f64,
    pub sigma: f64,
}

impl MeasuredValue {
    pub fn new(value: f64, sigma: f64) -> Self {
        debug_assert!(sigma >= 0.0 || sigma.is_nan(), "negative sigma {sigma}");
        Self { value, sigma }
    }

    pub fn exact(value: f64) -> Self {
        Self::new(value, 0.0)
    }

    /// A raw count with Poisson error √N.
    pub fn from_counts(n: u64) -> Self {
        Self::new(n as f64, (n as f64).sqrt())
    }

    pub fn relative_sigma(&self) -> f64 {
        self.sigma / self.value.abs()
    }
}

impl fmt::Display for MeasuredValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => write!(f, "{:.*} ± {:.*}", p, self.value, p, self.sigma),
            None => write!(f, "{} ± {}", self.value, self.sigma),
        }
    }
}
