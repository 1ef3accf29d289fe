use axum::extract::{FromRequest, Multipart, Request, State};
use axum::http::header;
use axum::response::{IntoResponse, Response};
use belnet_labkit::{
    check_result, fit_attenuation, parse_attenuation_points, parse_spectrum, window_counts, ActivityInput,
    AttenuationPoint, CountWindow, MeasuredValue, ThicknessUnit, DEFAULT_K_SIGMA, DEFAULT_REL_TOL,
};
use serde::Deserialize;
use serde_json::json;

use crate::envelope::{ok, ApiError, ApiResult};
use crate::extract::{parse_json, read_body, JsonBody};
use crate::AppState;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumRequest {
    spectrum: String,
    live_time_s: f64,
    #[serde(default)]
    label: String,
    #[serde(default)]
    window: Option<CountWindow>,
    #[serde(default)]
    background: Option<Background>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Background {
    spectrum: String,
    live_time_s: f64,
}

fn bad_form(msg: &'static str) -> ApiError {
    ApiError::bad_request("malformed_multipart", msg)
}

fn number(text: &str, what: &'static str) -> Result<f64, ApiError> {
    text.trim().parse().map_err(|_| ApiError::bad_request("malformed_multipart", format!("{what} must be a number")))
}

/// Multipart fields: `file`, `live_time_s`, optional `label`, `window` (the
/// JSON form of a window), `background` and `background_live_time_s`.
async fn from_multipart(mut form: Multipart) -> Result<SpectrumRequest, ApiError> {
    let mut r = SpectrumRequest::default();
    let (mut live, mut bg, mut bg_live) = (None, None, None);
    let mut have_file = false;
    while let Some(field) = form.next_field().await.map_err(|_| bad_form("multipart body could not be read"))? {
        let name = field.name().unwrap_or("").to_owned();
        let text = field.text().await.map_err(|_| bad_form("form fields must be UTF-8 text"))?;
        match name.as_str() {
            "file" => {
                r.spectrum = text;
                have_file = true;
            }
            "live_time_s" => live = Some(number(&text, "live_time_s")?),
            "label" => r.label = text,
            "window" => r.window = Some(parse_json(text.as_bytes())?),
            "background" => bg = Some(text),
            "background_live_time_s" => bg_live = Some(number(&text, "background_live_time_s")?),
            _ => return Err(bad_form("unexpected form field")),
        }
    }
    if !have_file {
        return Err(bad_form("missing file field"));
    }
    r.live_time_s = live.ok_or_else(|| bad_form("missing live_time_s field"))?;
    r.background = match (bg, bg_live) {
        (Some(spectrum), Some(live_time_s)) => Some(Background { spectrum, live_time_s }),
        (None, None) => None,
        _ => return Err(bad_form("background needs both background and background_live_time_s")),
    };
    Ok(r)
}

pub async fn spectrum(State(s): State<AppState>, req: Request) -> ApiResult<Response> {
    let is_multipart = req
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.trim_start().to_ascii_lowercase().starts_with("multipart/form-data"));
    let r = if is_multipart {
        let form = Multipart::from_request(req, &s).await.map_err(|_| bad_form("multipart body could not be read"))?;
        from_multipart(form).await?
    } else {
        let limit = s.config.max_upload_bytes;
        parse_json(&read_body(req, limit).await?)?
    };

    let label = if r.label.is_empty() { "spectrum" } else { r.label.as_str() };
    let spec = parse_spectrum(&r.spectrum, r.live_time_s, label)?;
    let bg = match &r.background {
        Some(b) => Some(parse_spectrum(&b.spectrum, b.live_time_s, "background")?),
        None => None,
    };
    let window = match &r.window {
        Some(w) => Some(json!({ "window": w, "net_counts": window_counts(&spec, w, bg.as_ref())? })),
        None => None,
    };
    Ok(ok(json!({ "summary": spec.summary(), "channels": spec.channels, "window": window })).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointIn {
    thickness: f64,
    counts: f64,
    #[serde(default)]
    sigma: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitRequest {
    #[serde(default)]
    points: Option<Vec<PointIn>>,
    /// Alternatively, the text form: `thickness counts [sigma]` per line.
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    unit: ThicknessUnit,
}

pub async fn attenuation_fit(JsonBody(r): JsonBody<FitRequest>) -> ApiResult<Response> {
    let points: Vec<AttenuationPoint> = match (r.points, r.text) {
        (Some(ps), None) => ps
            .into_iter()
            .map(|p| AttenuationPoint {
                thickness: p.thickness,
                counts: MeasuredValue::new(p.counts, p.sigma.unwrap_or(p.counts.max(0.0).sqrt())),
            })
            .collect(),
        (None, Some(text)) => parse_attenuation_points(&text)?,
        _ => return Err(ApiError::bad_request("malformed_body", "give exactly one of points or text")),
    };
    let fit = fit_attenuation(&points)?;
    Ok(ok(json!({ "fit": fit, "unit": r.unit })).into_response())
}

pub async fn relative_activity(JsonBody(input): JsonBody<ActivityInput>) -> ApiResult<Response> {
    let a = belnet_labkit::relative_activity(&input)?;
    Ok(ok(json!({ "activity": a })).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRequest {
    given: f64,
    reference: MeasuredValue,
    #[serde(default)]
    k_sigma: Option<f64>,
    #[serde(default)]
    rel_tol: Option<f64>,
}

pub async fn check(JsonBody(r): JsonBody<CheckRequest>) -> ApiResult<Response> {
    let outcome = check_result(
        r.given,
        &r.reference,
        r.k_sigma.unwrap_or(DEFAULT_K_SIGMA),
        r.rel_tol.unwrap_or(DEFAULT_REL_TOL),
    )?;
    Ok(ok(json!({ "outcome": outcome, "passed": outcome.passed() })).into_response())
}
