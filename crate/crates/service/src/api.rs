use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use shadeway_core::ingest::GeoPoint;
use shadeway_core::pipeline::{compute_shade, plan_on_shade, ShadeSettings};
use shadeway_core::routing::{route_geojson, RouteOptions, RouteRequest, DEFAULT_SAMPLE_STEP_M};
use shadeway_core::TimeStamp;
use tower_http::cors::{Any, CorsLayer};

use crate::cache::{CachedShade, ShadeCache, ShadeKey};
use crate::store::{SceneStore, StoredScene};
use crate::ServiceError;

pub const DEFAULT_CACHE_SIZE: usize = 256;

pub struct AppState {
    pub store: SceneStore,
    pub cache: ShadeCache<ServiceError>,
    pub settings: ShadeSettings,
    pub route: RouteOptions,
    pub sample_step_m: f64,
}

impl AppState {
    pub fn new(data_dir: PathBuf, cache_size: usize) -> Result<Self, ServiceError> {
        Ok(Self {
            store: SceneStore::open(&data_dir)?,
            cache: ShadeCache::new(cache_size),
            settings: ShadeSettings::default(),
            route: RouteOptions::default(),
            sample_step_m: DEFAULT_SAMPLE_STEP_M,
        })
    }
}

type Shared = State<Arc<AppState>>;

pub fn router(state: Arc<AppState>) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods(Any)
        .allow_headers(Any)
        .expose_headers([header::ETAG]);
    Router::new()
        .route("/healthz", get(healthz))
        .route("/scenes", post(upload_scene))
        .route("/scenes/:id", get(scene_handle))
        .route("/scenes/:id/shade", get(shade_png))
        .route("/scenes/:id/shade/meta", get(shade_meta))
        .route("/scenes/:id/route", post(route))
        .layer(DefaultBodyLimit::max(64 * 1024 * 1024))
        .layer(cors)
        .with_state(state)
}

async fn healthz() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

async fn upload_scene(State(state): Shared, mut form: Multipart) -> Result<Response, ServiceError> {
    let (mut buildings, mut roads) = (None, None);
    while let Some(field) = form.next_field().await.map_err(|e| ServiceError::bad(e.to_string()))? {
        let name = field.name().unwrap_or_default().to_string();
        let bytes = field.bytes().await.map_err(|e| ServiceError::bad(e.to_string()))?;
        match name.trim_end_matches(".geojson") {
            "buildings" => buildings = Some(bytes),
            "roads" => roads = Some(bytes),
            other => return Err(ServiceError::bad(format!("unexpected field '{other}'"))),
        }
    }
    let buildings = buildings.ok_or_else(|| ServiceError::bad("missing 'buildings' field"))?;
    let stored = tokio::task::spawn_blocking(move || state.store.put(&buildings, roads.as_deref()))
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))??;
    Ok(Json(stored.handle.clone()).into_response())
}

fn lookup(state: &AppState, id: &str) -> Result<Arc<StoredScene>, ServiceError> {
    state
        .store
        .get(id)?
        .ok_or_else(|| ServiceError::NotFound(format!("unknown scene '{id}'")))
}

async fn scene_handle(State(state): Shared, Path(id): Path<String>) -> Result<Response, ServiceError> {
    let stored = lookup(&state, &id)?;
    let mut handle = stored.handle.clone();
    handle.shade = state.cache.keys_for(&id);
    Ok(Json(handle).into_response())
}

/// Accepts `12`, `12.5` or `"12:30"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum HourParam {
    Number(f64),
    Text(String),
}

impl HourParam {
    fn as_clock(&self) -> Result<String, ServiceError> {
        match self {
            Self::Text(s) => Ok(s.clone()),
            Self::Number(h) if (0.0..24.0).contains(h) => {
                let m = (h * 60.0).round() as u32;
                Ok(format!("{}:{:02}", m / 60, m % 60))
            }
            Self::Number(h) => Err(ServiceError::bad(format!("hour {h} outside [0, 24)"))),
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct ShadeQuery {
    pub date: String,
    pub hour: String,
    pub utc_offset: Option<f64>,
}

fn timestamp(scene: &StoredScene, date: &str, hour: &str, offset: Option<f64>) -> Result<TimeStamp, ServiceError> {
    let offset = offset.unwrap_or_else(|| scene.scene.nominal_utc_offset());
    TimeStamp::parse(date, hour, offset).map_err(|e| ServiceError::bad(e.to_string()))
}

async fn cached_shade(state: &Arc<AppState>, stored: Arc<StoredScene>, t: TimeStamp) -> Result<Arc<CachedShade>, ServiceError> {
    let key = ShadeKey {
        scene_id: stored.handle.scene_id.clone(),
        date: t.date().to_string(),
        minute_of_day: (t.local_hour * 60.0).round() as u32,
        utc_offset_min: (t.utc_offset_hours * 60.0).round() as i32,
    };
    let settings = state.settings;
    state
        .cache
        .get_or_compute(key, move || {
            let grid = settings.grid_for(&stored.scene)?;
            let product = compute_shade(&stored.scene, &t, &grid, &settings)?;
            let png = product.gt.to_png();
            let etag = format!("\"{}\"", hex::encode(&Sha256::digest(&png)[..12]));
            Ok(CachedShade {
                raster: product.gt,
                sidecar: product.sidecar,
                png,
                etag,
            })
        })
        .await
}

async fn shade_png(
    State(state): Shared,
    Path(id): Path<String>,
    Query(q): Query<ShadeQuery>,
    headers: HeaderMap,
) -> Result<Response, ServiceError> {
    let stored = lookup(&state, &id)?;
    let t = timestamp(&stored, &q.date, &q.hour, q.utc_offset)?;
    let shade = cached_shade(&state, stored, t).await?;
    let etag = HeaderValue::from_str(&shade.etag).expect("hex etag");
    if headers.get(header::IF_NONE_MATCH) == Some(&etag) {
        return Ok((StatusCode::NOT_MODIFIED, [(header::ETAG, etag)]).into_response());
    }
    Ok((
        [
            (header::CONTENT_TYPE, HeaderValue::from_static("image/png")),
            (header::ETAG, etag),
            (header::CACHE_CONTROL, HeaderValue::from_static("public, max-age=3600")),
        ],
        shade.png.clone(),
    )
        .into_response())
}

async fn shade_meta(State(state): Shared, Path(id): Path<String>, Query(q): Query<ShadeQuery>) -> Result<Response, ServiceError> {
    let stored = lookup(&state, &id)?;
    let t = timestamp(&stored, &q.date, &q.hour, q.utc_offset)?;
    let shade = cached_shade(&state, stored, t).await?;
    Ok(([(header::ETAG, HeaderValue::from_str(&shade.etag).expect("hex etag"))], Json(shade.sidecar.clone())).into_response())
}

#[derive(Debug, Deserialize)]
pub struct RouteBody {
    /// `[lon, lat]`
    pub from: [f64; 2],
    pub to: [f64; 2],
    pub w: f64,
    pub date: String,
    pub hour: HourParam,
    pub utc_offset: Option<f64>,
}

fn point(p: [f64; 2]) -> Result<GeoPoint, ServiceError> {
    GeoPoint::new(p[0], p[1]).map_err(|e| ServiceError::bad(e.to_string()))
}

async fn route(State(state): Shared, Path(id): Path<String>, Json(body): Json<RouteBody>) -> Result<Response, ServiceError> {
    let stored = lookup(&state, &id)?;
    if !(0.0..=1.0).contains(&body.w) {
        return Err(ServiceError::bad(format!("shade weight {} outside [0, 1]", body.w)));
    }
    if stored.scene.roads.is_empty() {
        return Err(ServiceError::NoGraph);
    }
    let req = RouteRequest {
        origin: point(body.from)?,
        destination: point(body.to)?,
        shade_weight: body.w,
        time: None,
    };
    let t = timestamp(&stored, &body.date, &body.hour.as_clock()?, body.utc_offset)?;
    let shade = cached_shade(&state, stored.clone(), t).await?;
    let req = RouteRequest { time: Some(t), ..req };
    let (opts, step) = (state.route, state.sample_step_m);
    let geojson = tokio::task::spawn_blocking(move || {
        plan_on_shade(&stored.scene.roads, &shade.raster, &req, &opts, step).map(|plan| route_geojson(&plan, Some(&t)))
    })
    .await
    .map_err(|e| ServiceError::Internal(e.to_string()))??;
    Ok(Json(geojson).into_response())
}
