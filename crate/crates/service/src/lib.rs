//! HTTP API over the qrmap renderer and classifier.
//!
//! Every response body is a pure function of the request, so the tile cache
//! only saves work and never changes what a client sees.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use lru::LruCache;
use num_complex::Complex64;
use qrmap_core::families::ALL_FAMILIES;
use qrmap_core::render::{render_dynamical_plane, ColorMode, Overlay, ParamRender, RasterImage};
use qrmap_core::{inspect, BasinGridConfig, Family, IterConfig, ParamWindow, Preset};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tower_http::cors::{Any, CorsLayer};

pub const DEFAULT_PORT: u16 = 8723;
pub const DEFAULT_CACHE_TILES: usize = 256;
pub const MAX_TILE_SIZE: u32 = 2048;
pub const MAX_ITER_LIMIT: u32 = 200_000;
pub const MAX_GRID_SIZE: u32 = 4096;

const PPM: &str = "image/x-portable-pixmap";
const PNG: &str = "image/png";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    Ppm,
    Png,
}

impl ImageFormat {
    /// PNG when the client lists it as acceptable, PPM otherwise.
    pub fn from_accept(headers: &HeaderMap) -> Self {
        let accepts_png = headers
            .get_all(header::ACCEPT)
            .iter()
            .filter_map(|v| v.to_str().ok())
            .flat_map(|v| v.split(','))
            .any(|item| {
                let mut parts = item.split(';').map(str::trim);
                let ty = parts.next().unwrap_or("");
                let refused = parts.any(|p| p.strip_prefix("q=").and_then(|v| v.trim().parse::<f64>().ok()) == Some(0.0));
                ty.eq_ignore_ascii_case(PNG) && !refused
            });
        if accepts_png {
            ImageFormat::Png
        } else {
            ImageFormat::Ppm
        }
    }

    fn content_type(self) -> &'static str {
        match self {
            ImageFormat::Ppm => PPM,
            ImageFormat::Png => PNG,
        }
    }

    fn encode(self, img: &RasterImage) -> Result<Vec<u8>, ApiError> {
        match self {
            ImageFormat::Ppm => Ok(img.to_ppm()),
            ImageFormat::Png => img.to_png().map_err(|e| ApiError::Internal(e.to_string())),
        }
    }
}

/// Everything a tile depends on. Its canonical JSON (sorted keys, shortest
/// round-trip floats, no negative zero) names the tile in the cache and in
/// the ETag.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TileKey {
    pub engine: &'static str,
    pub family: Family,
    pub mode: ColorMode,
    pub center: [f64; 2],
    pub half_width: f64,
    pub size: u32,
    pub max_iter: u32,
    pub eps: f64,
    pub grid: u32,
    pub confirm_grid: u32,
    pub format: ImageFormat,
}

fn unsigned_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

impl TileKey {
    pub fn new(spec: &ParamRender, format: ImageFormat) -> Self {
        TileKey {
            engine: env!("CARGO_PKG_VERSION"),
            family: spec.family,
            mode: spec.mode,
            center: [unsigned_zero(spec.window.center.re), unsigned_zero(spec.window.center.im)],
            half_width: spec.window.half_width,
            size: spec.window.pixels_x,
            max_iter: spec.iter.max_iter,
            eps: spec.iter.eps_attract,
            grid: spec.grid.grid_size,
            confirm_grid: spec.grid.confirm_grid_size.unwrap_or(0),
            format,
        }
    }

    pub fn canonical(&self) -> String {
        // serde_json's Value map is ordered by key
        serde_json::to_value(self).expect("tile key serializes").to_string()
    }

    /// Strong validator: the quoted SHA-256 of the canonical form.
    pub fn etag(&self) -> String {
        format!("\"{:x}\"", Sha256::digest(self.canonical().as_bytes()))
    }
}

#[derive(Debug)]
pub enum ApiError {
    BadRequest(String),
    TooLarge(String),
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, msg) = match self {
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, m),
            ApiError::TooLarge(m) => (StatusCode::PAYLOAD_TOO_LARGE, m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, m),
        };
        (status, Json(json!({ "error": msg }))).into_response()
    }
}

fn bad(msg: impl Into<String>) -> ApiError {
    ApiError::BadRequest(msg.into())
}

#[derive(Clone)]
pub struct AppState {
    cache: Option<Arc<Mutex<LruCache<String, Bytes>>>>,
}

impl AppState {
    /// `cache_tiles = 0` disables the cache.
    pub fn new(cache_tiles: usize) -> Self {
        AppState {
            cache: NonZeroUsize::new(cache_tiles).map(|n| Arc::new(Mutex::new(LruCache::new(n)))),
        }
    }

    fn cached(&self, key: &str) -> Option<Bytes> {
        self.cache.as_ref()?.lock().expect("cache lock").get(key).cloned()
    }

    fn store(&self, key: String, bytes: Bytes) {
        if let Some(c) = &self.cache {
            c.lock().expect("cache lock").put(key, bytes);
        }
    }
}

impl Default for AppState {
    fn default() -> Self {
        AppState::new(DEFAULT_CACHE_TILES)
    }
}

pub fn router(state: AppState) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([axum::http::Method::GET])
        .allow_headers([header::ACCEPT, header::IF_NONE_MATCH])
        .expose_headers([header::ETAG]);
    Router::new()
        .route("/api/families", get(families))
        .route("/api/tile", get(tile))
        .route("/api/classify", get(classify))
        .route("/api/dynamical", get(dynamical))
        .layer(cors)
        .with_state(state)
}

type Params = HashMap<String, String>;

fn required<'a>(q: &'a Params, name: &str) -> Result<&'a str, ApiError> {
    q.get(name).map(String::as_str).ok_or_else(|| bad(format!("missing parameter {name:?}")))
}

fn parsed<T: FromStr>(q: &Params, name: &str) -> Result<Option<T>, ApiError> {
    q.get(name)
        .map(|s| s.trim().parse::<T>().map_err(|_| bad(format!("bad value for {name:?}: {s:?}"))))
        .transpose()
}

fn finite(q: &Params, name: &str) -> Result<Option<f64>, ApiError> {
    match parsed::<f64>(q, name)? {
        Some(x) if !x.is_finite() => Err(bad(format!("{name:?} must be finite"))),
        x => Ok(x),
    }
}

fn family(q: &Params) -> Result<Family, ApiError> {
    required(q, "family")?.parse().map_err(|e: qrmap_core::families::FamilyParseError| bad(e.to_string()))
}

fn size(q: &Params, default: u32) -> Result<u32, ApiError> {
    match parsed::<u32>(q, "size")?.unwrap_or(default) {
        0 => Err(bad("size must be positive")),
        n if n > MAX_TILE_SIZE => Err(ApiError::TooLarge(format!("size {n} exceeds {MAX_TILE_SIZE}"))),
        n => Ok(n),
    }
}

fn iter_config(q: &Params) -> Result<IterConfig, ApiError> {
    let d = IterConfig::default();
    let cfg = IterConfig {
        max_iter: parsed(q, "max_iter")?.unwrap_or(d.max_iter),
        eps_attract: finite(q, "eps")?.unwrap_or(d.eps_attract),
        ..d
    };
    cfg.validate().map_err(bad)?;
    if cfg.max_iter > MAX_ITER_LIMIT {
        return Err(bad(format!("max_iter must be at most {MAX_ITER_LIMIT}")));
    }
    if cfg.eps_attract > 0.5 {
        return Err(bad("eps must be at most 0.5"));
    }
    Ok(cfg)
}

fn check_grid(grid: &BasinGridConfig) -> Result<(), ApiError> {
    grid.validate().map_err(bad)?;
    if grid.grid_size.max(grid.confirm_grid_size.unwrap_or(0)) > MAX_GRID_SIZE {
        return Err(bad(format!("grid sizes must be at most {MAX_GRID_SIZE}")));
    }
    Ok(())
}

fn parameter(q: &Params) -> Result<Complex64, ApiError> {
    let re = finite(q, "re")?.ok_or_else(|| bad("missing parameter \"re\""))?;
    Ok(Complex64::new(re, finite(q, "im")?.unwrap_or(0.0)))
}

/// Tile settings, defaulting to the family preset exactly as the CLI does.
pub fn tile_spec(q: &Params) -> Result<ParamRender, ApiError> {
    let family = family(q)?;
    let preset = Preset::for_family(family);
    let mode = match q.get("mode") {
        Some(m) => m.parse().map_err(bad)?,
        None => ColorMode::Type,
    };
    let size = size(q, preset.size)?;
    let center = Complex64::new(
        finite(q, "cx")?.unwrap_or(preset.center.re),
        finite(q, "cy")?.unwrap_or(preset.center.im),
    );
    let window = ParamWindow::new(center, finite(q, "hw")?.unwrap_or(preset.half_width), size, size)
        .map_err(|e| bad(e.to_string()))?;
    let grid = BasinGridConfig {
        grid_size: parsed(q, "grid")?.unwrap_or(preset.grid.grid_size),
        confirm_grid_size: match parsed::<u32>(q, "confirm_grid")? {
            Some(0) => None,
            Some(g) => Some(g),
            None => preset.grid.confirm_grid_size,
        },
        ..preset.grid
    };
    check_grid(&grid)?;
    Ok(ParamRender { family, mode, window, iter: iter_config(q)?, grid })
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::Internal(e.to_string()))
}

fn window_json(p: &Preset) -> Value {
    json!({ "center": [p.center.re, p.center.im], "half_width": p.half_width, "size": p.size })
}

async fn families() -> Json<Value> {
    let list: Vec<Value> = ALL_FAMILIES
        .iter()
        .map(|f| {
            json!({
                "tag": f.tag(),
                "period": f.period(),
                "parameter": f.parameter_meaning(),
                "default_window": window_json(&Preset::for_family(*f)),
                "excluded": f.excluded_values(),
            })
        })
        .collect();
    Json(json!({
        "families": list,
        "omitted": [{ "tag": "v5", "reason": "genus 1, no rational parametrization" }],
    }))
}

fn image_response(bytes: Bytes, format: ImageFormat, etag: Option<String>) -> Response {
    let mut resp = (
        [(header::CONTENT_TYPE, HeaderValue::from_static(format.content_type())), (header::VARY, HeaderValue::from_static("accept"))],
        bytes,
    )
        .into_response();
    if let Some(tag) = etag.and_then(|t| HeaderValue::from_str(&t).ok()) {
        resp.headers_mut().insert(header::ETAG, tag);
    }
    resp
}

fn matches_etag(headers: &HeaderMap, etag: &str) -> bool {
    headers
        .get_all(header::IF_NONE_MATCH)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .flat_map(|v| v.split(','))
        .any(|t| t.trim() == etag || t.trim() == "*")
}

async fn tile(State(state): State<AppState>, Query(q): Query<Params>, headers: HeaderMap) -> Result<Response, ApiError> {
    let spec = tile_spec(&q)?;
    let format = ImageFormat::from_accept(&headers);
    let key = TileKey::new(&spec, format);
    let etag = key.etag();
    if matches_etag(&headers, &etag) {
        return Ok((StatusCode::NOT_MODIFIED, [(header::ETAG, etag)]).into_response());
    }
    let canonical = key.canonical();
    let bytes = match state.cached(&canonical) {
        Some(b) => b,
        None => {
            let img = blocking(move || spec.render()).await?;
            let b = Bytes::from(format.encode(&img)?);
            state.store(canonical, b.clone());
            b
        }
    };
    Ok(image_response(bytes, format, Some(etag)))
}

async fn classify(Query(q): Query<Params>) -> Result<Json<Value>, ApiError> {
    let family = family(&q)?;
    let t = parameter(&q)?;
    let cfg = iter_config(&q)?;
    let grid = BasinGridConfig {
        grid_size: parsed(&q, "grid")?.unwrap_or(BasinGridConfig::default().grid_size),
        ..BasinGridConfig::default()
    };
    check_grid(&grid)?;
    let mut out = blocking(move || serde_json::to_value(inspect(family, t, &cfg, &grid).summary()))
        .await?
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    out["settings"] = json!({ "grid": grid.grid_size, "max_iter": cfg.max_iter, "eps": cfg.eps_attract });
    Ok(Json(out))
}

async fn dynamical(Query(q): Query<Params>, headers: HeaderMap) -> Result<Response, ApiError> {
    let family = family(&q)?;
    let t = parameter(&q)?;
    let map = family.map_for(t).map_err(|e| bad(e.to_string()))?;
    let size = size(&q, 512)?;
    let center = Complex64::new(finite(&q, "cx")?.unwrap_or(0.0), finite(&q, "cy")?.unwrap_or(0.0));
    let window = ParamWindow::new(center, finite(&q, "hw")?.unwrap_or(3.0), size, size).map_err(|e| bad(e.to_string()))?;
    let overlay = match q.get("overlay") {
        Some(o) => o.parse::<Overlay>().map_err(bad)?,
        None => Overlay::Segment,
    };
    let cfg = iter_config(&q)?;
    let format = ImageFormat::from_accept(&headers);
    let img = blocking(move || render_dynamical_plane(&map, family.period(), &window, &cfg, overlay))
        .await?
        .map_err(|e| bad(e.to_string()))?;
    Ok(image_response(Bytes::from(format.encode(&img)?), format, None))
}
