//! HTTP and WebSocket control surface over a running simulation.
//!
//! | route | |
//! |---|---|
//! | `GET /api/network` | network geometry |
//! | `GET /api/state` | latest snapshot |
//! | `GET /api/stats/{id}` | history of one vehicle |
//! | `POST /api/flags` | `{"training": bool, "exploration": bool}`, either optional |
//! | `POST /api/save` | write model files, returns their names |
//! | `POST /api/pause`, `POST /api/resume` | |
//! | `POST /api/select` | `{"id": n}` or `{"id": null}` |
//! | `GET /ws/stream` | snapshots as they are published |

mod driver;
pub mod wire;

use std::net::SocketAddr;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use thiserror::Error;

use drivesim::sim::Command;

pub use driver::{spawn_simulation, DriverOptions, SimHandle};
use wire::{error_json, WireStats, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("cannot listen on {addr}: {source}")]
    Bind { addr: SocketAddr, source: std::io::Error },
    #[error("server failed: {0}")]
    Serve(#[from] std::io::Error),
}

fn json(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn ok() -> Response {
    json(StatusCode::OK, serde_json::json!({ "v": SCHEMA_VERSION, "ok": true }).to_string())
}

fn unavailable() -> Response {
    json(StatusCode::SERVICE_UNAVAILABLE, error_json("simulation stopped"))
}

pub fn router(handle: SimHandle) -> Router {
    Router::new()
        .route("/api/network", get(network))
        .route("/api/state", get(state))
        .route("/api/stats/{id}", get(stats))
        .route("/api/flags", post(flags))
        .route("/api/save", post(save))
        .route("/api/pause", post(pause))
        .route("/api/resume", post(resume))
        .route("/api/select", post(select))
        .route("/ws/stream", get(stream))
        .with_state(handle)
}

/// Binds `addr` and serves until the future is dropped.
pub async fn serve(handle: SimHandle, addr: SocketAddr) -> Result<(), ServerError> {
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|source| ServerError::Bind { addr, source })?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(handle)).await?;
    Ok(())
}

async fn network(State(h): State<SimHandle>) -> Response {
    json(StatusCode::OK, h.network_json().to_string())
}

async fn state(State(h): State<SimHandle>) -> Response {
    json(StatusCode::OK, serde_json::to_string(&*h.latest()).expect("snapshot serializes"))
}

async fn stats(State(h): State<SimHandle>, Path(id): Path<usize>) -> Response {
    if id >= h.n_vehicles() {
        return json(StatusCode::NOT_FOUND, error_json(&format!("no vehicle {id}")));
    }
    match h.stats(id).await {
        Some(series) => json(
            StatusCode::OK,
            serde_json::to_string(&WireStats { v: SCHEMA_VERSION, id, series }).expect("stats serialize"),
        ),
        None => unavailable(),
    }
}

#[derive(Deserialize)]
struct FlagsBody {
    training: Option<bool>,
    exploration: Option<bool>,
}

async fn flags(State(h): State<SimHandle>, Json(body): Json<FlagsBody>) -> Response {
    if h.command(Command::SetFlags { training: body.training, exploration: body.exploration }) {
        ok()
    } else {
        unavailable()
    }
}

async fn save(State(h): State<SimHandle>) -> Response {
    match h.save().await {
        Ok(files) => json(StatusCode::OK, serde_json::json!({ "v": SCHEMA_VERSION, "files": files }).to_string()),
        Err(e) => json(StatusCode::INTERNAL_SERVER_ERROR, error_json(&e)),
    }
}

async fn pause(State(h): State<SimHandle>) -> Response {
    if h.command(Command::Pause) {
        ok()
    } else {
        unavailable()
    }
}

async fn resume(State(h): State<SimHandle>) -> Response {
    if h.command(Command::Resume) {
        ok()
    } else {
        unavailable()
    }
}

#[derive(Deserialize)]
struct SelectBody {
    id: Option<usize>,
}

async fn select(State(h): State<SimHandle>, Json(body): Json<SelectBody>) -> Response {
    if body.id.is_some_and(|id| id >= h.n_vehicles()) {
        return json(StatusCode::NOT_FOUND, error_json("no such vehicle"));
    }
    if h.command(Command::Select(body.id)) {
        ok()
    } else {
        unavailable()
    }
}

async fn stream(State(h): State<SimHandle>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| push_snapshots(socket, h))
}

/// Sends the newest snapshot whenever one is published. Snapshots published
/// while the client is still busy with the previous one are skipped.
async fn push_snapshots(mut socket: WebSocket, h: SimHandle) {
    let mut rx = h.subscribe();
    loop {
        let text = serde_json::to_string(&*rx.borrow_and_update().clone()).expect("snapshot serializes");
        if socket.send(Message::Text(text.into())).await.is_err() {
            return;
        }
        if rx.changed().await.is_err() {
            return;
        }
    }
}
