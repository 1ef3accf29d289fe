//! Data for each page region. Full endpoints return a region's payload plus
//! page context; fragments return the region payload alone, so the two agree
//! by construction.

use belnet_core::{
    AccessTier, Actor, GlossaryEntry, Page, Portal, PortalError, ResourceDetail, ResourceId, ResourceQuery,
    ResourceSummary, SortDir, SortField, DEFAULT_PAGE_LIMIT,
};
use belnet_markup::{escape_html, Target};
use serde_json::{json, Value};

use crate::envelope::ApiError;
use crate::extract::QueryPairs;

pub const LIST_PARAMS: &[&str] = &["tier", "taxonomy", "q", "sort", "dir", "offset", "limit", "archived"];

/// Markup to HTML. Stored sources always parse; anything else is shown
/// as escaped text rather than failing the page.
pub fn render_html(source: &str) -> String {
    match belnet_markup::parse(source) {
        Ok(doc) => doc.render(Target::HtmlMathml),
        Err(_) => format!("<p>{}</p>", escape_html(source)),
    }
}

pub fn list_query(q: &QueryPairs) -> Result<ResourceQuery, ApiError> {
    let d = ResourceQuery::default();
    Ok(ResourceQuery {
        tier_ceiling: q.parse::<AccessTier>("tier")?.unwrap_or(d.tier_ceiling),
        taxonomy_filter: q.parse("taxonomy")?,
        text_filter: q.get("q").map(str::to_owned).filter(|s| !s.is_empty()),
        sort_field: q.parse::<SortField>("sort")?.unwrap_or(d.sort_field),
        sort_dir: q.parse::<SortDir>("dir")?.unwrap_or(d.sort_dir),
        offset: q.parse("offset")?.unwrap_or(0),
        limit: q.parse("limit")?.unwrap_or(DEFAULT_PAGE_LIMIT),
        include_archived: q.parse("archived")?.unwrap_or(false),
    })
}

pub fn list_payload(page: &Page<ResourceSummary>) -> Value {
    json!({
        "items": page.items,
        "total_count": page.total_count,
        "offset": page.offset,
        "limit": page.limit,
    })
}

pub fn list_full(portal: &Portal, q: &ResourceQuery, actor: &Actor) -> Result<Value, PortalError> {
    let page = portal.query_resources(q, actor)?;
    let mut v = list_payload(&page);
    v["query"] = json!(q);
    Ok(v)
}

pub fn list_fragment(portal: &Portal, q: &ResourceQuery, actor: &Actor) -> Result<Value, PortalError> {
    Ok(list_payload(&portal.query_resources(q, actor)?))
}

fn detail_payload(d: &ResourceDetail) -> Value {
    json!({
        "resource": d.resource,
        "attachments": d.attachments,
        "html": render_html(&d.resource.body),
    })
}

fn taxonomy_paths(portal: &Portal, d: &ResourceDetail) -> Result<Value, PortalError> {
    let mut paths = Vec::new();
    for id in &d.resource.taxonomy_ids {
        let labels: Vec<String> = portal.taxonomy_path(*id)?.into_iter().map(|n| n.label).collect();
        paths.push(json!({ "node_id": id, "labels": labels }));
    }
    Ok(json!(paths))
}

pub fn detail_full(portal: &Portal, id: ResourceId, actor: &Actor) -> Result<Value, PortalError> {
    let d = portal.resource_detail(id, actor)?;
    let mut v = detail_payload(&d);
    v["taxonomy_paths"] = taxonomy_paths(portal, &d)?;
    v["history_length"] = json!(d.resource.current_revision + 1);
    Ok(v)
}

pub fn detail_fragment(portal: &Portal, id: ResourceId, actor: &Actor) -> Result<Value, PortalError> {
    Ok(detail_payload(&portal.resource_detail(id, actor)?))
}

pub fn glossary_entry(e: &GlossaryEntry) -> Value {
    json!({
        "term": e.term,
        "definition": e.definition,
        "html": render_html(&e.definition),
        "application_area": e.application_area,
        "deviation_notes": e.deviation_notes,
        "source_refs": e.source_refs,
    })
}

pub fn glossary_fragment(portal: &Portal, prefix: &str) -> Result<Value, PortalError> {
    let entries: Vec<Value> = portal.search_terms(prefix)?.iter().map(glossary_entry).collect();
    Ok(json!({ "entries": entries }))
}

pub fn glossary_full(portal: &Portal, prefix: &str) -> Result<Value, PortalError> {
    let mut v = glossary_fragment(portal, prefix)?;
    v["prefix"] = json!(prefix);
    Ok(v)
}

/// Lab tools a lab page can call.
pub fn lab_tools() -> Value {
    json!([
        { "id": "spectrum", "method": "POST", "path": "/api/labkit/spectrum",
          "summary": "parse a spectrum file and total a count window" },
        { "id": "attenuation-fit", "method": "POST", "path": "/api/labkit/attenuation-fit",
          "summary": "fit the attenuation coefficient and half-value layer" },
        { "id": "relative-activity", "method": "POST", "path": "/api/labkit/relative-activity",
          "summary": "activity of a sample relative to a reference source" },
        { "id": "check", "method": "POST", "path": "/api/labkit/check",
          "summary": "compare a student result with the reference value" },
    ])
}

fn labwork_payload(d: &ResourceDetail) -> Value {
    let mut v = detail_payload(d);
    v["tools"] = lab_tools();
    v
}

pub fn labwork_full(portal: &Portal, id: ResourceId, actor: &Actor) -> Result<Value, PortalError> {
    let d = portal.resource_detail(id, actor)?;
    let mut v = labwork_payload(&d);
    v["taxonomy_paths"] = taxonomy_paths(portal, &d)?;
    Ok(v)
}

pub fn labwork_fragment(portal: &Portal, id: ResourceId, actor: &Actor) -> Result<Value, PortalError> {
    Ok(labwork_payload(&portal.resource_detail(id, actor)?))
}
