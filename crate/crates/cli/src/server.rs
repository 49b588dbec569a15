//! Read-only HTTP API over a coupled document and its game data.
//!
//! Every response body is computed once at startup (or deterministically per
//! request for queries) and carries a strong ETag, so identical requests get
//! identical bytes and `If-None-Match` revalidation returns 304.

use std::collections::BTreeSet;
use std::sync::Arc;

use axum::body::Body;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use serde::Serialize;
use sha2::{Digest, Sha256};

use storylink_core::coupler::{query_sentences, CouplerError, Selector};
use storylink_core::domain::{to_canonical_json, CoupledDocument, Region, StatKey};
use storylink_core::gamedata::GameData;

const INDEX_HTML: &str = include_str!("index.html");

pub struct AppState {
    coupled: CoupledDocument,
    document: String,
    game: String,
    coupling: String,
    viz_states: Vec<String>,
}

impl AppState {
    pub fn new(coupled: CoupledDocument, game: &GameData) -> anyhow::Result<Self> {
        let viz_states = (0..coupled.document.sentences.len())
            .map(|i| to_canonical_json(&coupled.viz_states.get(&i).cloned().unwrap_or_default()))
            .collect::<Result<_, _>>()?;
        Ok(AppState {
            document: to_canonical_json(&coupled.document)?,
            game: to_canonical_json(game)?,
            coupling: to_canonical_json(&coupled)?,
            viz_states,
            coupled,
        })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/api/document", get(document))
        .route("/api/game", get(game))
        .route("/api/coupling", get(coupling))
        .route("/api/vizstate/{index}", get(viz_state))
        .route("/api/sentences", get(sentences))
        .with_state(state)
}

fn etag(body: &[u8]) -> String {
    format!("\"{}\"", hex::encode(Sha256::digest(body)))
}

/// 200 with an ETag, or 304 when the client already holds these bytes.
fn cached(headers: &HeaderMap, status: StatusCode, content_type: &'static str, body: String) -> Response {
    let tag = etag(body.as_bytes());
    let fresh = headers
        .get(header::IF_NONE_MATCH)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.split(',').any(|t| t.trim() == tag || t.trim() == "*"));
    let mut resp = if fresh && status == StatusCode::OK {
        (StatusCode::NOT_MODIFIED, Body::empty()).into_response()
    } else {
        (status, body).into_response()
    };
    let h = resp.headers_mut();
    h.insert(header::CONTENT_TYPE, HeaderValue::from_static(content_type));
    h.insert(header::ETAG, HeaderValue::from_str(&tag).expect("hex etag"));
    h.insert(header::CACHE_CONTROL, HeaderValue::from_static("no-cache"));
    resp
}

fn json(headers: &HeaderMap, body: &str) -> Response {
    cached(headers, StatusCode::OK, "application/json", body.to_string())
}

#[derive(Serialize)]
struct ApiError<'a> {
    error: &'a str,
    message: String,
}

fn error(status: StatusCode, code: &str, message: impl Into<String>) -> Response {
    let body = to_canonical_json(&ApiError {
        error: code,
        message: message.into(),
    })
    .expect("error serializes");
    let mut resp = (status, body).into_response();
    resp.headers_mut()
        .insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
    resp
}

async fn index(headers: HeaderMap) -> Response {
    cached(&headers, StatusCode::OK, "text/html; charset=utf-8", INDEX_HTML.to_string())
}

async fn document(State(s): State<Arc<AppState>>, headers: HeaderMap) -> Response {
    json(&headers, &s.document)
}

async fn game(State(s): State<Arc<AppState>>, headers: HeaderMap) -> Response {
    json(&headers, &s.game)
}

async fn coupling(State(s): State<Arc<AppState>>, headers: HeaderMap) -> Response {
    json(&headers, &s.coupling)
}

async fn viz_state(
    State(s): State<Arc<AppState>>,
    Path(index): Path<String>,
    headers: HeaderMap,
) -> Response {
    match index.parse::<usize>().ok().and_then(|i| s.viz_states.get(i)) {
        Some(body) => json(&headers, body),
        None => error(
            StatusCode::NOT_FOUND,
            "SENTENCE_RANGE",
            format!("no sentence `{index}` (document has {})", s.viz_states.len()),
        ),
    }
}

#[derive(Serialize)]
struct SentencesResponse {
    selector: Selector,
    sentences: Vec<usize>,
}

/// Selector from query pairs. List-valued keys accept repeats and commas.
pub fn parse_selector(pairs: &[(String, String)]) -> Result<Selector, String> {
    fn items(v: &str) -> impl Iterator<Item = &str> {
        v.split(',').map(str::trim).filter(|s| !s.is_empty())
    }
    fn insert<T: Ord>(slot: &mut Option<BTreeSet<T>>, v: T) {
        slot.get_or_insert_with(BTreeSet::new).insert(v);
    }
    fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
        v.trim().parse().map_err(|_| format!("`{key}` must be a number, got `{v}`"))
    }

    let mut sel = Selector::default();
    let (mut t0, mut t1): (Option<f64>, Option<f64>) = (None, None);
    for (key, value) in pairs {
        match key.as_str() {
            "player" => items(value).for_each(|v| insert(&mut sel.players, v.to_string())),
            "team" => items(value).for_each(|v| insert(&mut sel.teams, v.to_string())),
            "stat" => {
                for v in items(value) {
                    let k: StatKey = v.parse().map_err(|_| format!("unknown stat `{v}`"))?;
                    insert(&mut sel.stat_keys, k);
                }
            }
            "region" => {
                for v in items(value) {
                    let r: Region = v.parse().map_err(|_| format!("unknown region `{v}`"))?;
                    insert(&mut sel.regions, r);
                }
            }
            "quarter" => sel.quarter = Some(number(key, value)?),
            "t0" => t0 = Some(number(key, value)?),
            "t1" => t1 = Some(number(key, value)?),
            other => return Err(format!("unknown parameter `{other}`")),
        }
    }
    sel.time_range = match (t0, t1) {
        (None, None) => None,
        (Some(a), Some(b)) => Some((a, b)),
        _ => return Err("`t0` and `t1` must be given together".into()),
    };
    Ok(sel)
}

async fn sentences(
    State(s): State<Arc<AppState>>,
    Query(pairs): Query<Vec<(String, String)>>,
    headers: HeaderMap,
) -> Response {
    let sel = match parse_selector(&pairs) {
        Ok(sel) => sel,
        Err(msg) => return error(StatusCode::BAD_REQUEST, "MALFORMED_SELECTOR", msg),
    };
    match query_sentences(&s.coupled, &sel) {
        Ok(sentences) => {
            let body = to_canonical_json(&SentencesResponse {
                selector: sel,
                sentences,
            })
            .expect("response serializes");
            cached(&headers, StatusCode::OK, "application/json", body)
        }
        Err(e @ CouplerError::EmptySelector) => error(StatusCode::BAD_REQUEST, "EMPTY_SELECTOR", e.to_string()),
        Err(e) => error(StatusCode::BAD_REQUEST, "INVALID_SELECTOR", e.to_string()),
    }
}

/// Bind and serve until Ctrl-C.
pub async fn serve(state: AppState, port: u16) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(state)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
