//! Guarding a shortest path in a dynamic Defender-Attacker Blotto game when
//! the defender only sees attackers within distance `k` of the path.

pub mod amount;
pub mod env_file;
pub mod graph;
pub mod policy;
pub mod state;
pub mod adversary;
pub mod defender;
pub mod engine;
pub mod trace;
pub mod par;
pub mod verifier;
pub mod config;
pub mod corpus;
