//! Exponential attenuation `N(d) = N0·exp(−μd)` fitted by weighted least
//! squares on `ln N` against thickness.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::measured::MeasuredValue;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttenuationPoint {
    /// Absorber thickness, in the unit declared alongside the data set.
    pub thickness: f64,
    pub counts: MeasuredValue,
}

impl AttenuationPoint {
    /// A point whose error is the Poisson error of the raw count.
    pub fn from_counts(thickness: f64, n: u64) -> Self {
        Self { thickness, counts: MeasuredValue::from_counts(n) }
    }
}

/// Declared thickness unit. It is carried through, never converted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThicknessUnit {
    #[default]
    #[serde(rename = "cm")]
    Centimetre,
    #[serde(rename = "g/cm2")]
    GramPerSquareCentimetre,
}

impl ThicknessUnit {
    pub fn as_str(self) -> &'static str {
        match self {
            ThicknessUnit::Centimetre => "cm",
            ThicknessUnit::GramPerSquareCentimetre => "g/cm2",
        }
    }
}

impl fmt::Display for ThicknessUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ThicknessUnit {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cm" => Ok(ThicknessUnit::Centimetre),
            "g/cm2" | "g/cm^2" => Ok(ThicknessUnit::GramPerSquareCentimetre),
            _ => Err(LabError::InvalidArgument(format!("unknown thickness unit {s:?} (use cm or g/cm2)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Ok,
    /// μ ≤ 0: transmitted counts do not fall with thickness.
    NonPositiveMu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttenuationFit {
    /// Attenuation coefficient, inverse thickness units.
    pub mu: MeasuredValue,
    /// Extrapolated counts at zero thickness.
    pub n0: MeasuredValue,
    /// Half-value layer `ln 2 / μ`.
    pub half_value_layer: MeasuredValue,
    /// RMS of `ln N` residuals.
    pub residual_rms: f64,
    pub n_points: usize,
    pub status: FitStatus,
}

pub fn fit_attenuation(points: &[AttenuationPoint]) -> Result<AttenuationFit> {
    if points.len() < 3 {
        return Err(LabError::InsufficientPoints(points.len()));
    }
    for (index, p) in points.iter().enumerate() {
        let reason = if !(p.thickness.is_finite() && p.thickness >= 0.0) {
            "thickness must be a nonnegative number"
        } else if !(p.counts.value.is_finite() && p.counts.value > 0.0) {
            "counts must be positive"
        } else if !(p.counts.sigma.is_finite() && p.counts.sigma > 0.0) {
            "counts need a positive uncertainty"
        } else {
            continue;
        };
        return Err(LabError::InvalidPoint { index, reason: reason.into() });
    }
    let first = points[0].thickness;
    if points.iter().all(|p| p.thickness == first) {
        return Err(LabError::DegenerateDesign);
    }

    // y = ln N, σ_y = σ_N / N, w = 1/σ_y².
    let xs: Vec<f64> = points.iter().map(|p| p.thickness).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.counts.value.ln()).collect();
    let ws: Vec<f64> = points.iter().map(|p| (p.counts.value / p.counts.sigma).powi(2)).collect();

    let sw: f64 = ws.iter().sum();
    let x_mean = dot(&ws, &xs) / sw;
    let y_mean = dot(&ws, &ys) / sw;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for ((x, y), w) in xs.iter().zip(&ys).zip(&ws) {
        let dx = x - x_mean;
        sxx += w * dx * dx;
        sxy += w * dx * (y - y_mean);
    }
    if sxx.is_nan() || sxx <= 0.0 {
        return Err(LabError::DegenerateDesign);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let var_slope = 1.0 / sxx;
    let var_intercept = 1.0 / sw + x_mean * x_mean / sxx;

    let residual_rms = (xs.iter().zip(&ys).map(|(x, y)| (y - (intercept + slope * x)).powi(2)).sum::<f64>()
        / points.len() as f64)
        .sqrt();

    let mu = MeasuredValue::new(-slope, var_slope.sqrt());
    let n0_value = intercept.exp();
    let n0 = MeasuredValue::new(n0_value, n0_value * var_intercept.sqrt());
    let half_value_layer = MeasuredValue::new(LN_2 / mu.value, LN_2 / (mu.value * mu.value) * mu.sigma);

    Ok(AttenuationFit {
        mu,
        n0,
        half_value_layer,
        residual_rms,
        n_points: points.len(),
        status: if mu.value > 0.0 { FitStatus::Ok } else { FitStatus::NonPositiveMu },
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Reads `thickness counts [sigma]` lines; sigma defaults to √counts.
/// `#` comments and blank lines are ignored.
pub fn parse_attenuation_points(text: &str) -> Result<Vec<AttenuationPoint>> {
    let mut points = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let line = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let bad = |reason: String| LabError::FormatError { line: i + 1, reason };
        if !(2..=3).contains(&fields.len()) {
            return Err(bad(format!("expected 2 or 3 fields, found {}", fields.len())));
        }
        let num =
            |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad(format!("bad number {s:?}")));
        let thickness = num(fields[0])?;
        let counts = num(fields[1])?;
        let sigma = match fields.get(2) {
            Some(s) => num(s)?,
            None => counts.max(0.0).sqrt(),
        };
        if sigma < 0.0 {
            return Err(bad("sigma must not be negative".into()));
        }
        points.push(AttenuationPoint { thickness, counts: MeasuredValue::new(counts, sigma) });
    }
    Ok(points)
}
