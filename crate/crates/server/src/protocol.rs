//! Wire messages. All amounts are exact `"num/den"` strings.

use std::collections::BTreeMap;

use ddab_core::adversary::ScriptFlow;
use ddab_core::env_file::EnvFile;
use ddab_core::trace::{FlowRecord, GameResult, GroupRecord};
use serde::{Deserialize, Serialize};

/// Environment for a new session: inline, or the name of a built-in one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SessionEnv {
    Builtin(String),
    Inline(EnvFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    pub environment: SessionEnv,
    pub k: u32,
    /// Defaults to the bound.
    #[serde(default)]
    pub defender_total: Option<String>,
    #[serde(default)]
    pub attacker_total: Option<String>,
    pub attacker_start: String,
    /// Allows split moves answered by proportional sub-forces.
    #[serde(default)]
    pub fractional: bool,
    #[serde(default)]
    pub max_steps: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    New { config: SessionConfig },
    Move { session: u64, flows: Vec<ScriptFlow> },
    Export { session: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegalMove {
    pub group: String,
    pub from: String,
    pub amount: String,
    /// Stay first, then neighbours in name order.
    pub to: Vec<String>,
    /// Shares a group may be split by; empty unless fractional.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub split_shares: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlatoonView {
    pub group: String,
    pub mass: String,
    /// Platoon centre per partition as a node name; `null` for static partitions.
    pub centers: Vec<Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeView {
    pub result: GameResult,
    pub win_step: Option<u64>,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateView {
    pub session: u64,
    pub t: u64,
    pub defender_amounts: BTreeMap<String, String>,
    pub attacker_amounts: BTreeMap<String, String>,
    pub groups: Vec<GroupRecord>,
    pub platoon_centers: Vec<PlatoonView>,
    /// Per sub-force advantage rows behind the defender's last move.
    pub advantages: serde_json::Value,
    /// Nodes inside the defender's visibility region.
    pub visibility: Vec<String>,
    pub legal_moves: Vec<LegalMove>,
    pub outcome: Option<OutcomeView>,
    /// Defender budget below the bound: the guarantee does not apply.
    pub no_guarantee: bool,
    pub required: String,
    pub attacker_flows: Vec<FlowRecord>,
    pub defender_flows: Vec<FlowRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    State(Box<StateView>),
    Error {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        session: Option<u64>,
        reason: String,
    },
    Trace {
        session: u64,
        jsonl: String,
    },
}
