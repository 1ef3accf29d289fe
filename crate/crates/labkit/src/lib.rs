//! Data processing for the radiation lab works: spectrometer files,
//! windowed counts with Poisson errors, source activity by the relative
//! method, gamma attenuation fits with the half-value layer, and checking a
//! student's result against a reference value.

mod activity;
mod attenuation;
mod check;
mod error;
mod measured;
mod spectrum;

pub use activity::{relative_activity, ActivityInput};
pub use attenuation::{
    fit_attenuation, parse_attenuation_points, AttenuationFit, AttenuationPoint, FitStatus, ThicknessUnit,
};
pub use check::{check_result, Bound, CheckOutcome, Verdict, DEFAULT_K_SIGMA, DEFAULT_REL_TOL};
pub use error::{LabError, Result};
pub use measured::MeasuredValue;
pub use spectrum::{parse_spectrum, window_counts, Channel, CountWindow, Spectrum, SpectrumSummary};
