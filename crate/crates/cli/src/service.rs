//! Read-only JSON API over a loaded model bundle.

use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ingredient_cf::bundle::{Manifest, ModelBundle};
use ingredient_cf::recommender::{recommend, PartialRecipe};
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

pub const MAX_SUGGESTIONS: i64 = 50;
pub const DEFAULT_SUGGESTIONS: i64 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngredientEntry {
    pub name: String,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendRequest {
    pub ingredients: Vec<String>,
    #[serde(default = "default_n")]
    pub n: i64,
    #[serde(default = "default_ignore_unknown")]
    pub ignore_unknown: bool,
}

fn default_n() -> i64 {
    DEFAULT_SUGGESTIONS
}

fn default_ignore_unknown() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub name: String,
    pub fit: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendResponse {
    pub recommendations: Vec<Suggestion>,
    pub resolved: Vec<String>,
    pub unknown: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unknown: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthBody {
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<Manifest>,
}

/// A bundle prepared for serving.
pub struct LoadedModel {
    bundle: ModelBundle,
    ingredients: Vec<IngredientEntry>,
}

impl LoadedModel {
    pub fn new(bundle: ModelBundle) -> Self {
        let vocab = &bundle.vocabulary;
        let mut ingredients: Vec<IngredientEntry> = (0..vocab.len() as u32)
            .map(|id| IngredientEntry { name: vocab.name(id).to_string(), count: vocab.count(id) })
            .collect();
        ingredients.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.name.cmp(&b.name)));
        Self { bundle, ingredients }
    }

    pub fn bundle(&self) -> &ModelBundle {
        &self.bundle
    }

    pub fn ingredients(&self) -> &[IngredientEntry] {
        &self.ingredients
    }

    /// The `/api/recommend` contract without the HTTP layer.
    pub fn answer(&self, request: &RecommendRequest) -> Result<RecommendResponse, (StatusCode, ErrorBody)> {
        let bad = |status, error: String, unknown| Err((status, ErrorBody { error, unknown }));
        if request.ingredients.is_empty() {
            return bad(StatusCode::BAD_REQUEST, "ingredients must not be empty".into(), vec![]);
        }
        if !(1..=MAX_SUGGESTIONS).contains(&request.n) {
            return bad(
                StatusCode::BAD_REQUEST,
                format!("n must lie in 1..={MAX_SUGGESTIONS}, got {}", request.n),
                vec![],
            );
        }
        let vocab = &self.bundle.vocabulary;
        let (ids, unknown) = vocab.resolve(&request.ingredients);
        if !unknown.is_empty() && !request.ignore_unknown {
            return bad(StatusCode::UNPROCESSABLE_ENTITY, "unknown ingredients".into(), unknown);
        }
        if ids.is_empty() {
            return bad(StatusCode::UNPROCESSABLE_ENTITY, "no known ingredients".into(), unknown);
        }
        let resolved = ids.iter().map(|&id| vocab.name(id).to_string()).collect();
        let recipe = PartialRecipe::new(ids, vocab.len())
            .map_err(|e| (StatusCode::INTERNAL_SERVER_ERROR, ErrorBody { error: e.to_string(), unknown: vec![] }))?;
        let recommendations = recommend(&self.bundle.neighbors, vocab, &recipe, request.n as usize)
            .map_err(|e| (StatusCode::INTERNAL_SERVER_ERROR, ErrorBody { error: e.to_string(), unknown: vec![] }))?
            .into_iter()
            .map(|r| Suggestion { name: r.name, fit: r.fit, rank: r.rank })
            .collect();
        Ok(RecommendResponse { recommendations, resolved, unknown })
    }
}

/// Shared handle that becomes ready once the bundle has loaded.
#[derive(Clone, Default)]
pub struct AppState {
    model: Arc<OnceLock<LoadedModel>>,
}

impl AppState {
    pub fn loading() -> Self {
        Self::default()
    }

    pub fn ready(bundle: ModelBundle) -> Self {
        let state = Self::default();
        state.set(bundle);
        state
    }

    /// Installs the model; later calls are ignored.
    pub fn set(&self, bundle: ModelBundle) {
        let _ = self.model.set(LoadedModel::new(bundle));
    }

    pub fn model(&self) -> Option<&LoadedModel> {
        self.model.get()
    }
}

#[derive(Debug, Clone, Default)]
pub struct ServiceOptions {
    pub static_dir: Option<PathBuf>,
    pub cors_origin: Option<String>,
}

fn error(status: StatusCode, body: ErrorBody) -> Response {
    (status, Json(body)).into_response()
}

fn not_ready() -> Response {
    error(StatusCode::SERVICE_UNAVAILABLE, ErrorBody { error: "model is still loading".into(), unknown: vec![] })
}

async fn health(State(state): State<AppState>) -> Response {
    match state.model() {
        Some(model) => {
            Json(HealthBody { status: "ok".into(), manifest: Some(model.bundle().manifest.clone()) }).into_response()
        }
        None => (StatusCode::SERVICE_UNAVAILABLE, Json(HealthBody { status: "loading".into(), manifest: None }))
            .into_response(),
    }
}

async fn ingredients(State(state): State<AppState>) -> Response {
    match state.model() {
        Some(model) => Json(model.ingredients()).into_response(),
        None => not_ready(),
    }
}

async fn recommend_handler(State(state): State<AppState>, body: Bytes) -> Response {
    let Some(model) = state.model() else {
        return not_ready();
    };
    let request: RecommendRequest = match serde_json::from_slice(&body) {
        Ok(request) => request,
        Err(e) => {
            return error(
                StatusCode::BAD_REQUEST,
                ErrorBody { error: format!("malformed request: {e}"), unknown: vec![] },
            )
        }
    };
    match model.answer(&request) {
        Ok(response) => Json(response).into_response(),
        Err((status, body)) => error(status, body),
    }
}

pub fn router(state: AppState, options: &ServiceOptions) -> Router {
    let mut app = Router::new()
        .route("/api/health", get(health))
        .route("/api/ingredients", get(ingredients))
        .route("/api/recommend", post(recommend_handler))
        .with_state(state);
    if let Some(dir) = &options.static_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    if let Some(origin) = &options.cors_origin {
        match HeaderValue::from_str(origin) {
            Ok(origin) => {
                app = app.layer(
                    CorsLayer::new()
                        .allow_origin(origin)
                        .allow_methods([axum::http::Method::GET, axum::http::Method::POST])
                        .allow_headers([axum::http::header::CONTENT_TYPE]),
                );
            }
            Err(_) => log::warn!("ignoring invalid CORS origin {origin:?}"),
        }
    }
    app
}
