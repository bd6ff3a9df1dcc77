//! Attacker strategies. Every strategy sees the full game state, including
//! where the defender has just moved.

use std::collections::{BTreeMap, VecDeque};

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::{parse_amount, ratio, Amount};
use crate::graph::{Environment, NodeId};
use crate::state::{AttackerGroup, Flow, GameState, GroupLabel, MovePlan};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdversaryError {
    #[error("script turn {turn}: unknown node {name:?}")]
    UnknownNode { turn: usize, name: String },
    #[error("script turn {turn}: {message}")]
    BadAmount { turn: usize, message: String },
    #[error("malformed script: {0}")]
    Json(String),
    #[error("no off-path node is adjacent to exactly path indices {0}..={1}")]
    NoGadget(usize, usize),
    #[error("alpha {alpha} must be an interior path index (1..={max})")]
    BadAlpha { alpha: usize, max: usize },
    #[error("every node is within distance {0} of the path; nowhere to stage")]
    NoStaging(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackerMove {
    pub plan: MovePlan,
    /// Strategy status such as `strike`, `defended` or `strategy-complete`.
    pub signal: Option<String>,
}

impl AttackerMove {
    fn quiet(plan: MovePlan) -> Self {
        AttackerMove { plan, signal: None }
    }
}

pub trait AttackerStrategy: Send {
    fn name(&self) -> &'static str;

    /// Called in the attacker phase with the complete state.
    fn next_move(&mut self, state: &GameState, env: &Environment) -> AttackerMove;

    /// Deterministic strategies return their cursor; `None` disables cycle
    /// detection (randomised play).
    fn cycle_key(&self) -> Option<String>;
}

/// One scripted flow, by node name. `amount` defaults to everything the
/// named group (or node) holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptFlow {
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amount: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

#[derive(Debug, Clone)]
struct ResolvedFlow {
    from: NodeId,
    to: NodeId,
    amount: Option<Amount>,
    group: Option<GroupLabel>,
}

/// Plays a fixed list of turns, then stays forever.
#[derive(Debug, Clone)]
pub struct Scripted {
    turns: Vec<Vec<ResolvedFlow>>,
    cursor: usize,
}

impl Scripted {
    pub fn new(env: &Environment, turns: &[Vec<ScriptFlow>]) -> Result<Self, AdversaryError> {
        let g = env.graph();
        let node = |turn: usize, name: &str| {
            g.id(name).map_err(|_| AdversaryError::UnknownNode {
                turn,
                name: name.to_string(),
            })
        };
        let mut resolved = Vec::with_capacity(turns.len());
        for (t, flows) in turns.iter().enumerate() {
            let mut out = Vec::with_capacity(flows.len());
            for f in flows {
                let amount = match &f.amount {
                    Some(s) => Some(parse_amount(s).map_err(|e| AdversaryError::BadAmount {
                        turn: t,
                        message: e.to_string(),
                    })?),
                    None => None,
                };
                out.push(ResolvedFlow {
                    from: node(t, &f.from)?,
                    to: node(t, &f.to)?,
                    amount,
                    group: f.group.as_deref().map(GroupLabel::new),
                });
            }
            resolved.push(out);
        }
        Ok(Scripted {
            turns: resolved,
            cursor: 0,
        })
    }

    pub fn from_json(env: &Environment, src: &str) -> Result<Self, AdversaryError> {
        let turns: Vec<Vec<ScriptFlow>> = serde_json::from_str(src).map_err(|e| AdversaryError::Json(e.to_string()))?;
        Self::new(env, &turns)
    }

    /// Moves the whole attacker along `positions[0] -> positions[1] -> ...`.
    pub fn from_positions(positions: &[NodeId]) -> Self {
        let turns = positions
            .windows(2)
            .map(|w| {
                vec![ResolvedFlow {
                    from: w[0],
                    to: w[1],
                    amount: None,
                    group: None,
                }]
            })
            .collect();
        Scripted { turns, cursor: 0 }
    }

    pub fn is_exhausted(&self) -> bool {
        self.cursor >= self.turns.len()
    }
}

/// Turns a partial, possibly unlabelled flow list into a complete labelled
/// plan: unlabelled flows split across co-located groups by mass and any
/// mass not mentioned stays put. The result may still be illegal (for
/// instance a non-edge), which the game rejects.
pub fn complete_plan(groups: &[AttackerGroup], flows: &[Flow]) -> MovePlan {
    let mut node_mass: BTreeMap<NodeId, Amount> = BTreeMap::new();
    for g in groups {
        *node_mass.entry(g.node).or_insert_with(Amount::zero) += &g.amount;
    }
    let mut out = Vec::new();
    for f in flows {
        match &f.group {
            Some(_) => out.push(f.clone()),
            None => {
                let Some(total) = node_mass.get(&f.from) else {
                    out.push(f.clone());
                    continue;
                };
                for g in groups.iter().filter(|g| g.node == f.from) {
                    out.push(Flow::grouped(f.from, f.to, &f.amount * &g.amount / total, g.label.clone()));
                }
            }
        }
    }
    for g in groups {
        let moved: Amount = out
            .iter()
            .filter(|f| f.group.as_ref() == Some(&g.label) && f.from == g.node)
            .map(|f| &f.amount)
            .sum();
        let rest = &g.amount - moved;
        if rest.is_positive() {
            out.push(Flow::grouped(g.node, g.node, rest, g.label.clone()));
        }
    }
    MovePlan::new(out).normalized()
}

impl AttackerStrategy for Scripted {
    fn name(&self) -> &'static str {
        "scripted"
    }

    fn next_move(&mut self, state: &GameState, _env: &Environment) -> AttackerMove {
        let Some(turn) = self.turns.get(self.cursor) else {
            return AttackerMove {
                plan: MovePlan::stay_groups(&state.groups),
                signal: Some("strategy-complete".into()),
            };
        };
        self.cursor += 1;
        let flows: Vec<Flow> = turn
            .iter()
            .map(|f| {
                let amount = f.amount.clone().unwrap_or_else(|| match &f.group {
                    Some(l) => state.group(l).map(|g| g.amount.clone()).unwrap_or_else(Amount::zero),
                    None => state.attacker.get(f.from).clone(),
                });
                Flow {
                    from: f.from,
                    to: f.to,
                    amount,
                    group: f.group.clone(),
                }
            })
            .collect();
        AttackerMove::quiet(complete_plan(&state.groups, &flows))
    }

    fn cycle_key(&self) -> Option<String> {
        Some(format!("scripted:{}", self.cursor.min(self.turns.len())))
    }
}

/// Split shares the random attacker draws from.
pub fn split_menu() -> [Amount; 5] {
    [ratio(1, 2), ratio(3, 10), ratio(7, 10), ratio(1, 4), ratio(3, 4)]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomParams {
    pub seed: u64,
    #[serde(default)]
    pub split_probability: f64,
    /// Chance of stepping along a shortest path toward the path instead of
    /// a uniform neighbour.
    #[serde(default = "default_toward_path")]
    pub toward_path: f64,
    #[serde(default = "default_max_groups")]
    pub max_groups: usize,
}

fn default_toward_path() -> f64 {
    0.4
}

fn default_max_groups() -> usize {
    8
}

impl RandomParams {
    pub fn new(seed: u64) -> Self {
        RandomParams {
            seed,
            split_probability: 0.0,
            toward_path: default_toward_path(),
            max_groups: default_max_groups(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RandomWalk {
    params: RandomParams,
    rng: ChaCha8Rng,
}

impl RandomWalk {
    pub fn new(params: RandomParams) -> Self {
        RandomWalk {
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            params,
        }
    }

    fn pick(&mut self, env: &Environment, at: NodeId) -> NodeId {
        let g = env.graph();
        if self.params.toward_path > 0.0 && !env.on_path(at) && self.rng.random_bool(self.params.toward_path) {
            let closer: Vec<NodeId> = g
                .neighbors(at)
                .iter()
                .copied()
                .filter(|&w| env.dstar(w) < env.dstar(at))
                .collect();
            if !closer.is_empty() {
                return closer[self.rng.random_range(0..closer.len())];
            }
        }
        let n = g.neighbors(at);
        let i = self.rng.random_range(0..=n.len());
        if i == n.len() {
            at
        } else {
            n[i]
        }
    }
}

impl AttackerStrategy for RandomWalk {
    fn name(&self) -> &'static str {
        "random"
    }

    fn next_move(&mut self, state: &GameState, env: &Environment) -> AttackerMove {
        let menu = split_menu();
        let mut flows = Vec::new();
        let mut groups = state.groups.len();
        for g in &state.groups {
            let a = self.pick(env, g.node);
            let split = groups < self.params.max_groups
                && self.params.split_probability > 0.0
                && self.rng.random_bool(self.params.split_probability);
            if split {
                let b = self.pick(env, g.node);
                if a != b {
                    let q = &menu[self.rng.random_range(0..menu.len())];
                    let part = &g.amount * q;
                    flows.push(Flow::grouped(g.node, b, &g.amount - &part, g.label.clone()));
                    flows.push(Flow::grouped(g.node, a, part, g.label.clone()));
                    groups += 1;
                    continue;
                }
            }
            flows.push(Flow::grouped(g.node, a, g.amount.clone(), g.label.clone()));
        }
        AttackerMove::quiet(MovePlan::new(flows).normalized())
    }

    fn cycle_key(&self) -> Option<String> {
        None
    }
}

/// Takes any immediately winning move; otherwise heads for the path node
/// with the least defence.
#[derive(Debug, Clone, Default)]
pub struct Greedy;

impl AttackerStrategy for Greedy {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn next_move(&mut self, state: &GameState, env: &Environment) -> AttackerMove {
        let g = env.graph();
        let mut flows = Vec::new();
        let mut signal = None;
        for grp in &state.groups {
            let mut reach = vec![grp.node];
            reach.extend_from_slice(g.neighbors(grp.node));
            let win = reach.iter().copied().filter(|&v| env.on_path(v)).find(|&v| {
                let y = if v == grp.node {
                    state.attacker.get(v).clone()
                } else {
                    state.attacker.get(v) + &grp.amount
                };
                &y > state.defender.get(v)
            });
            let to = match win {
                Some(v) => {
                    signal = Some("strike".to_string());
                    v
                }
                None => {
                    let target = env
                        .path()
                        .nodes()
                        .iter()
                        .copied()
                        .min_by_key(|&p| (state.defender.get(p).clone(), g.d(grp.node, p), p))
                        .expect("nonempty path");
                    let route = g.shortest_path(grp.node, target);
                    route.get(1).copied().unwrap_or(grp.node)
                }
            };
            flows.push(Flow::grouped(grp.node, to, grp.amount.clone(), grp.label.clone()));
        }
        AttackerMove {
            plan: MovePlan::new(flows).normalized(),
            signal,
        }
    }

    fn cycle_key(&self) -> Option<String> {
        Some("greedy".into())
    }
}

/// The three-target attacker: stage, walk to the hub `xi`, strike any of
/// the three path nodes next to it that the defender leaves short.
#[derive(Debug, Clone)]
pub struct GadgetAttacker {
    pub xi: NodeId,
    pub targets: [NodeId; 3],
    wait: usize,
    turn: usize,
}

/// Builds the gadget attacker for the hub at path index `alpha` (0-based;
/// the targets are `alpha - 1`, `alpha`, `alpha + 1`). `wait` turns are spent
/// staying put before advancing.
pub fn gadget_attack_plan(env: &Environment, k: u32, alpha: usize, wait: usize) -> Result<GadgetAttacker, AdversaryError> {
    let n = env.path().len();
    if alpha == 0 || alpha + 1 >= n {
        return Err(AdversaryError::BadAlpha {
            alpha,
            max: n.saturating_sub(2),
        });
    }
    let g = env.graph();
    let xi = g
        .nodes()
        .filter(|&v| !env.on_path(v))
        .find(|&v| {
            let mut idx: Vec<usize> = g.neighbors(v).iter().filter_map(|&w| env.path_index(w)).collect();
            idx.sort_unstable();
            idx == [alpha - 1, alpha, alpha + 1]
        })
        .ok_or(AdversaryError::NoGadget(alpha - 1, alpha + 1))?;
    if !g.nodes().any(|v| env.dstar(v) > k) {
        return Err(AdversaryError::NoStaging(k));
    }
    let p = env.path();
    Ok(GadgetAttacker {
        xi,
        targets: [p.node(alpha - 1), p.node(alpha), p.node(alpha + 1)],
        wait,
        turn: 0,
    })
}

impl AttackerStrategy for GadgetAttacker {
    fn name(&self) -> &'static str {
        "gadget"
    }

    fn next_move(&mut self, state: &GameState, env: &Environment) -> AttackerMove {
        let g = env.graph();
        let waiting = self.turn < self.wait;
        self.turn += 1;
        let mut flows = Vec::new();
        let mut signal = None;
        for grp in &state.groups {
            let to = if grp.node == self.xi {
                let hit = self
                    .targets
                    .iter()
                    .copied()
                    .find(|&p| state.attacker.get(p) + &grp.amount > *state.defender.get(p));
                signal = Some(if hit.is_some() { "strike" } else { "defended" }.to_string());
                hit.unwrap_or(self.xi)
            } else if waiting {
                signal = Some("waiting".to_string());
                grp.node
            } else {
                g.shortest_path(grp.node, self.xi).get(1).copied().unwrap_or(grp.node)
            };
            flows.push(Flow::grouped(grp.node, to, grp.amount.clone(), grp.label.clone()));
        }
        AttackerMove {
            plan: MovePlan::new(flows).normalized(),
            signal,
        }
    }

    fn cycle_key(&self) -> Option<String> {
        Some(format!("gadget:{}", self.turn.min(self.wait)))
    }
}

/// Moves supplied from outside (a human or a search); stays when idle.
#[derive(Debug, Clone, Default)]
pub struct External {
    queue: VecDeque<MovePlan>,
}

impl External {
    pub fn push(&mut self, plan: MovePlan) {
        self.queue.push_back(plan);
    }
}

impl AttackerStrategy for External {
    fn name(&self) -> &'static str {
        "external"
    }

    fn next_move(&mut self, state: &GameState, _env: &Environment) -> AttackerMove {
        match self.queue.pop_front() {
            Some(plan) => AttackerMove::quiet(plan),
            None => AttackerMove {
                plan: MovePlan::stay_groups(&state.groups),
                signal: Some("idle".into()),
            },
        }
    }

    fn cycle_key(&self) -> Option<String> {
        None
    }
}
