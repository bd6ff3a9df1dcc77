//! JSON-lines game traces: one header, one init record, one record per
//! phase, one outcome record.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::format_amount;
use crate::env_file::EnvFile;
use crate::graph::{Environment, NodeId};
use crate::policy::PolicyVariant;
use crate::state::{Flow, GameState, Phase};

pub const TRACE_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum Record {
    Header(Header),
    Init(InitRecord),
    Phase(PhaseRecord),
    Outcome(OutcomeRecord),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub format: u32,
    pub env: EnvFile,
    pub k: u32,
    pub defender_total: String,
    pub attacker_total: String,
    pub attacker_start: String,
    pub max_steps: u64,
    #[serde(default)]
    pub variant: PolicyVariant,
    #[serde(default)]
    pub record_advantages: bool,
    pub strategy: String,
}

/// Platoon centres (0-based path indices) of one defender sub-force.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForceRecord {
    pub group: String,
    pub mass: String,
    pub centers: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupRecord {
    pub label: String,
    pub node: String,
    pub amount: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub from: String,
    pub to: String,
    pub amount: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

impl FlowRecord {
    pub fn from_flow(env: &Environment, f: &Flow) -> Self {
        let g = env.graph();
        FlowRecord {
            from: g.name(f.from).to_string(),
            to: g.name(f.to).to_string(),
            amount: format_amount(&f.amount),
            group: f.group.as_ref().map(|l| l.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitRecord {
    pub init_steps: usize,
    pub defender: BTreeMap<String, String>,
    pub attacker: BTreeMap<String, String>,
    pub groups: Vec<GroupRecord>,
    pub safe: bool,
    pub platoons: Vec<ForceRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub t: u64,
    pub phase: Phase,
    pub flows: Vec<FlowRecord>,
    pub defender: BTreeMap<String, String>,
    pub attacker: BTreeMap<String, String>,
    pub groups: Vec<GroupRecord>,
    pub safe: bool,
    pub platoons: Vec<ForceRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breach: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub advantages: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GameResult {
    DefendedHorizon,
    DefendedCycle,
    AttackerWin,
}

impl GameResult {
    pub fn is_defended(self) -> bool {
        self != GameResult::AttackerWin
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub result: GameResult,
    pub win_step: Option<u64>,
    pub witness: Option<String>,
    pub steps: u64,
}

pub fn group_records(env: &Environment, state: &GameState) -> Vec<GroupRecord> {
    state
        .groups
        .iter()
        .map(|g| GroupRecord {
            label: g.label.to_string(),
            node: env.graph().name(g.node).to_string(),
            amount: format_amount(&g.amount),
        })
        .collect()
}

pub fn node_name(env: &Environment, v: NodeId) -> String {
    env.graph().name(v).to_string()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("trace line {line}: {message}")]
    Corrupt { line: usize, message: String },
}

pub fn to_jsonl(records: &[Record]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("trace record serializes"));
        out.push('\n');
    }
    out
}

pub fn from_jsonl(src: &str) -> Result<Vec<Record>, TraceError> {
    src.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| TraceError::Corrupt {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Platoon centres per record, for the sub-force labelled `group`.
pub fn center_trajectory(records: &[Record], group: &str) -> Vec<(u64, Phase, Vec<Option<usize>>)> {
    records
        .iter()
        .filter_map(|r| match r {
            Record::Phase(p) => p
                .platoons
                .iter()
                .find(|f| f.group == group)
                .map(|f| (p.t, p.phase, f.centers.clone())),
            _ => None,
        })
        .collect()
}
