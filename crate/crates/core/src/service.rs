//! Read-only HTTP API over a frozen model and its dynamic feature table.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::counterfactual::{predict_rows, run_scenario, Scenario};
use crate::error::{Error, Result};
use crate::features::{DynamicSample, Task};
use crate::geojson;
use crate::grid::GridSpec;
use crate::models::TrainedModel;

/// Payload schema version, sent as `"v"` in every JSON body.
pub const API_VERSION: u32 = 1;

/// Everything the service answers from. Built once, never mutated.
#[derive(Debug)]
pub struct SessionState {
    model: TrainedModel,
    grid: GridSpec,
    rows: BTreeMap<i32, Vec<DynamicSample>>,
    baseline: BTreeMap<i32, Vec<usize>>,
    grid_body: Value,
}

impl SessionState {
    pub fn new(model: TrainedModel, grid: GridSpec, rows: Vec<DynamicSample>) -> Result<Self> {
        if model.task != Task::Dynamic {
            return Err(Error::Config("the service needs a model trained on the dynamic task".into()));
        }
        if rows.is_empty() {
            return Err(Error::Config("the service needs at least one feature row".into()));
        }
        let mut by_year: BTreeMap<i32, Vec<DynamicSample>> = BTreeMap::new();
        for r in rows {
            if grid.index_of(r.cell).is_none() {
                return Err(Error::contract(format!("row cell ({}, {}) is not in the land mask", r.cell.row, r.cell.col)));
            }
            by_year.entry(r.year).or_default().push(r);
        }
        let baseline = by_year
            .iter()
            .map(|(&y, rows)| Ok((y, predict_rows(&model, rows)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let doc = grid.to_document();
        let grid_body = json!({
            "v": API_VERSION,
            "bbox": doc.bbox,
            "cell_size": doc.cell_size,
            "n_rows": doc.n_rows,
            "n_cols": doc.n_cols,
            "cell_count": doc.cell_count,
            "cells": grid.cells().iter().map(|c| [c.row, c.col]).collect::<Vec<_>>(),
            "geojson": geojson::cell_collection(&grid, grid.cells(), |_| Default::default())?,
        });
        Ok(Self { model, grid, rows: by_year, baseline, grid_body })
    }

    pub fn years(&self) -> Vec<i32> {
        self.baseline.keys().copied().collect()
    }

    pub fn model(&self) -> &TrainedModel {
        &self.model
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Baseline at-risk count for `year`.
    pub fn risk_count(&self, year: i32) -> Option<usize> {
        self.baseline.get(&year).map(|p| p.iter().filter(|&&c| c == 1).count())
    }
}

fn error(status: StatusCode, message: impl Into<String>, extra: Value) -> Response {
    let mut body = json!({ "v": API_VERSION, "error": message.into() });
    if let (Value::Object(b), Value::Object(e)) = (&mut body, extra) {
        b.extend(e);
    }
    (status, Json(body)).into_response()
}

fn unknown_year(state: &SessionState, year: i32) -> Response {
    error(StatusCode::NOT_FOUND, format!("no data for year {year}"), json!({ "known_years": state.years() }))
}

async fn healthz() -> &'static str {
    "ok"
}

async fn grid(State(state): State<Arc<SessionState>>) -> Json<Value> {
    Json(state.grid_body.clone())
}

#[derive(Debug, Deserialize)]
struct RiskQuery {
    year: Option<i32>,
}

async fn risk(State(state): State<Arc<SessionState>>, query: std::result::Result<Query<RiskQuery>, QueryRejection>) -> Response {
    let Some(year) = query.ok().and_then(|q| q.0.year) else {
        return error(StatusCode::BAD_REQUEST, "missing or invalid year parameter", json!({ "known_years": state.years() }));
    };
    let (Some(rows), Some(preds)) = (state.rows.get(&year), state.baseline.get(&year)) else {
        return unknown_year(&state, year);
    };
    let labels = &state.model.class_labels;
    let cells: Vec<Value> = rows
        .iter()
        .zip(preds)
        .map(|(r, &p)| json!({ "cell_row": r.cell.row, "cell_col": r.cell.col, "risk": labels[p] }))
        .collect();
    Json(json!({
        "v": API_VERSION,
        "year": year,
        "model_hash": state.model.content_hash,
        "count": preds.iter().filter(|&&p| p == 1).count(),
        "cells": cells,
    }))
    .into_response()
}

#[derive(Debug, Deserialize)]
struct CounterfactualRequest {
    year: i32,
    kind: String,
    #[serde(default)]
    parameter: Option<f64>,
}

async fn counterfactual(
    State(state): State<Arc<SessionState>>,
    body: std::result::Result<Json<CounterfactualRequest>, JsonRejection>,
) -> Response {
    let req = match body {
        Ok(Json(r)) => r,
        Err(e) => return error(StatusCode::UNPROCESSABLE_ENTITY, e.body_text(), Value::Null),
    };
    let scenario = match Scenario::from_parts(&req.kind, req.parameter) {
        Ok(s) => s,
        Err(e) => return error(StatusCode::UNPROCESSABLE_ENTITY, e.to_string(), Value::Null),
    };
    let Some(rows) = state.rows.get(&req.year) else {
        return unknown_year(&state, req.year);
    };
    match run_scenario(&state.model, rows, &scenario) {
        Ok(r) => {
            let delta = r.delta();
            let mut body = serde_json::to_value(&r).expect("scenario result serializes");
            body["v"] = json!(API_VERSION);
            body["delta"] = json!(delta);
            Json(body).into_response()
        }
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), Value::Null),
    }
}

async fn model_info(State(state): State<Arc<SessionState>>) -> Json<Value> {
    let m = &state.model;
    Json(json!({
        "v": API_VERSION,
        "variant": m.variant(),
        "task": m.task,
        "class_labels": m.class_labels,
        "format_version": m.format_version,
        "content_hash": m.content_hash,
        "fire_threshold": m.fire_threshold,
        "training": m.spec,
        "metadata": m.metadata,
        "years": state.years(),
    }))
}

pub fn router(state: Arc<SessionState>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/api/grid", get(grid))
        .route("/api/risk", get(risk))
        .route("/api/counterfactual", post(counterfactual))
        .route("/api/model/info", get(model_info))
        .with_state(state)
}

/// Binds `addr` and serves until the process is stopped. `on_bound` receives
/// the actual local address (useful with port 0).
pub async fn serve(state: Arc<SessionState>, addr: SocketAddr, on_bound: impl FnOnce(SocketAddr)) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| Error::io(addr.to_string(), e))?;
    let local = listener.local_addr().map_err(|e| Error::io(addr.to_string(), e))?;
    on_bound(local);
    axum::serve(listener, router(state)).await.map_err(|e| Error::io(local.to_string(), e))
}
