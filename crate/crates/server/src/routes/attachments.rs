use axum::extract::{Multipart, Path, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use belnet_core::{AttachmentId, AttachmentKind, ResourceId};
use percent_encoding::{utf8_percent_encode, NON_ALPHANUMERIC};

use crate::envelope::{created, ApiError, ApiResult};
use crate::extract::{parse_id, Caller};
use crate::AppState;

fn multipart_error(e: axum::extract::multipart::MultipartError) -> ApiError {
    if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
        ApiError::new(StatusCode::PAYLOAD_TOO_LARGE, "payload_too_large", "upload exceeds the limit")
    } else {
        ApiError::bad_request("malformed_multipart", "multipart body could not be read")
    }
}

/// Multipart fields: `kind` (text), `file` (the payload, with filename and
/// content type), optional `media_type` overriding the part's content type.
pub async fn upload(
    State(s): State<AppState>,
    caller: Caller,
    Path(id): Path<String>,
    mut form: Multipart,
) -> ApiResult<Response> {
    let id: ResourceId = parse_id(&id, "resource")?;
    let mut kind = None;
    let mut media_override = None;
    let mut file = None;
    while let Some(field) = form.next_field().await.map_err(multipart_error)? {
        match field.name().unwrap_or("") {
            "kind" => kind = Some(field.text().await.map_err(multipart_error)?),
            "media_type" => media_override = Some(field.text().await.map_err(multipart_error)?),
            "file" => {
                let filename = field.file_name().unwrap_or("").to_owned();
                let media = field.content_type().unwrap_or("application/octet-stream").to_owned();
                let bytes = field.bytes().await.map_err(multipart_error)?;
                file = Some((filename, media, bytes));
            }
            _ => return Err(ApiError::bad_request("malformed_multipart", "unexpected form field")),
        }
    }
    let kind: AttachmentKind =
        kind.ok_or_else(|| ApiError::bad_request("malformed_multipart", "missing kind field"))?.trim().parse()?;
    let (filename, media, bytes) =
        file.ok_or_else(|| ApiError::bad_request("malformed_multipart", "missing file field"))?;
    let media = media_override.unwrap_or(media);
    let a = s.run(move |p| p.attach_file(id, kind, &media, &filename, &bytes, &caller.actor)).await?;
    Ok(created(a).into_response())
}

/// Streams the stored bytes back with the original media type. The
/// response is marked as a download and sandboxed so uploaded HTML or SVG
/// never runs in the portal's origin.
pub async fn download(State(s): State<AppState>, caller: Caller, Path(id): Path<String>) -> ApiResult<Response> {
    let id: AttachmentId = parse_id(&id, "attachment")?;
    let (a, bytes) = s.run(move |p| p.get_attachment(id, &caller.actor)).await?;
    let ascii: String =
        a.filename.chars().map(|c| if c.is_ascii_alphanumeric() || "._- ".contains(c) { c } else { '_' }).collect();
    let disposition = format!(
        "attachment; filename=\"{ascii}\"; filename*=UTF-8''{}",
        utf8_percent_encode(&a.filename, NON_ALPHANUMERIC)
    );
    let mut resp = bytes.into_response();
    let h = resp.headers_mut();
    h.insert(
        header::CONTENT_TYPE,
        HeaderValue::from_str(&a.media_type).unwrap_or(HeaderValue::from_static("application/octet-stream")),
    );
    if let Ok(v) = HeaderValue::from_str(&disposition) {
        h.insert(header::CONTENT_DISPOSITION, v);
    }
    h.insert(header::X_CONTENT_TYPE_OPTIONS, HeaderValue::from_static("nosniff"));
    h.insert(header::CONTENT_SECURITY_POLICY, HeaderValue::from_static("sandbox; default-src 'none'"));
    h.insert(header::ETAG, HeaderValue::from_str(&format!("\"{}\"", a.blob_ref.digest)).expect("hex digest"));
    Ok(resp)
}
