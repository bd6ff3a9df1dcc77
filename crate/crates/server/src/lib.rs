//! Play server: a human attacker against the policy defender over a
//! websocket, one JSON message per text frame.

pub mod http;
pub mod protocol;
pub mod session;

pub use http::{router, serve};
pub use session::{replay_log, Session, Sessions};
