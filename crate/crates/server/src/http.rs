use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use tower_http::services::ServeDir;

use crate::session::Sessions;

pub fn router(sessions: Arc<Sessions>, static_dir: Option<PathBuf>) -> Router {
    let app = Router::new().route("/ws", get(ws_upgrade)).with_state(sessions);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

async fn ws_upgrade(ws: WebSocketUpgrade, State(sessions): State<Arc<Sessions>>) -> Response {
    ws.on_upgrade(move |socket| client(socket, sessions))
}

async fn client(mut socket: WebSocket, sessions: Arc<Sessions>) {
    while let Some(Ok(msg)) = socket.recv().await {
        let text = match msg {
            Message::Text(t) => t,
            Message::Close(_) => break,
            _ => continue,
        };
        let s = sessions.clone();
        // games are CPU work; keep them off the reactor
        let reply = match tokio::task::spawn_blocking(move || s.handle_text(text.as_str())).await {
            Ok(r) => r,
            Err(e) => {
                tracing::error!("session task failed: {e}");
                break;
            }
        };
        let body = serde_json::to_string(&reply).expect("server messages serialize");
        if socket.send(Message::Text(body.into())).await.is_err() {
            break;
        }
    }
}

/// Binds `addr` and serves until the process ends.
pub async fn serve(addr: SocketAddr, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(Sessions::default()), static_dir)).await
}
