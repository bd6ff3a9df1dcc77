//! In-memory sessions: one human attacker against the policy defender.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use ddab_core::adversary::{complete_plan, split_menu, AttackerMove, ScriptFlow};
use ddab_core::amount::{format_amount, int, parse_amount, Amount};
use ddab_core::corpus::demo_environment;
use ddab_core::engine::{default_max_steps, Game, GameConfig, Mode};
use ddab_core::graph::Environment;
use ddab_core::policy::required_assets;
use ddab_core::state::{Flow, GroupLabel, Phase};
use ddab_core::trace::{group_records, to_jsonl, FlowRecord, Record};

use crate::protocol::{
    ClientMessage, LegalMove, OutcomeView, PlatoonView, ServerMessage, SessionConfig, SessionEnv, StateView,
};

pub struct Session {
    id: u64,
    game: Game,
    fractional: bool,
    required: Amount,
    attacker_flows: Vec<FlowRecord>,
    defender_flows: Vec<FlowRecord>,
}

fn err(session: Option<u64>, reason: impl Into<String>) -> ServerMessage {
    ServerMessage::Error {
        session,
        reason: reason.into(),
    }
}

fn amount(name: &str, s: &Option<String>, default: Amount) -> Result<Amount, String> {
    match s {
        Some(s) => parse_amount(s).map_err(|e| format!("{name}: {e}")),
        None => Ok(default),
    }
}

fn last_flows(game: &Game, phase: Phase) -> Vec<FlowRecord> {
    game.records()
        .iter()
        .rev()
        .find_map(|r| match r {
            Record::Phase(p) if p.phase == phase => Some(p.flows.clone()),
            _ => None,
        })
        .unwrap_or_default()
}

impl Session {
    pub fn create(id: u64, cfg: &SessionConfig) -> Result<Session, String> {
        let env = match &cfg.environment {
            SessionEnv::Builtin(name) if name == "demo" => demo_environment(),
            SessionEnv::Builtin(name) => return Err(format!("unknown built-in environment {name:?}")),
            SessionEnv::Inline(file) => file.clone().into_environment(None).map_err(|e| e.to_string())?,
        };
        let env = Arc::new(env);
        let y = amount("attacker_total", &cfg.attacker_total, int(1))?;
        let required = required_assets(env.path().len(), cfg.k, &y).map_err(|e| e.to_string())?;
        let x = amount("defender_total", &cfg.defender_total, required.clone())?;
        let start = env
            .graph()
            .id(&cfg.attacker_start)
            .map_err(|_| format!("attacker_start {:?} is not a node", cfg.attacker_start))?;
        let mut gc = GameConfig::new(env.clone(), cfg.k, x, y, start);
        gc.max_steps = cfg.max_steps.unwrap_or_else(|| default_max_steps(&env));
        gc.record_advantages = true;
        let mode = if cfg.fractional { Mode::Subgames } else { Mode::Single };
        let mut game = Game::new(gc, mode, "external").map_err(|e| e.to_string())?;
        if !game.is_finished() {
            game.defender_turn().map_err(|e| e.to_string())?;
        }
        let defender_flows = last_flows(&game, Phase::Defender);
        Ok(Session {
            id,
            game,
            fractional: cfg.fractional,
            required,
            attacker_flows: Vec::new(),
            defender_flows,
        })
    }

    fn env(&self) -> &Arc<Environment> {
        self.game.env()
    }

    pub fn legal_moves(&self) -> Vec<LegalMove> {
        if self.game.is_finished() {
            return Vec::new();
        }
        let g = self.env().graph();
        let shares: Vec<String> = if self.fractional {
            split_menu().iter().map(format_amount).collect()
        } else {
            Vec::new()
        };
        self.game
            .state()
            .groups
            .iter()
            .map(|grp| {
                let mut nbrs: Vec<String> = g.neighbors(grp.node).iter().map(|&w| g.name(w).to_string()).collect();
                nbrs.sort();
                let mut to = vec![g.name(grp.node).to_string()];
                to.extend(nbrs);
                LegalMove {
                    group: grp.label.to_string(),
                    from: g.name(grp.node).to_string(),
                    amount: format_amount(&grp.amount),
                    to,
                    split_shares: shares.clone(),
                }
            })
            .collect()
    }

    pub fn view(&self) -> StateView {
        let env = self.env();
        let g = env.graph();
        let state = self.game.state();
        let platoon_centers = self
            .game
            .controller()
            .platoon_centers()
            .into_iter()
            .map(|(label, mass, p)| PlatoonView {
                group: label.to_string(),
                mass: format_amount(&mass),
                centers: p
                    .centers
                    .iter()
                    .map(|c| c.map(|i| g.name(env.path().node(i)).to_string()))
                    .collect(),
            })
            .collect();
        let advantages = match self.game.last_decision() {
            Some(d) => serde_json::Value::Array(
                d.forces
                    .iter()
                    .map(|f| serde_json::json!({"group": f.label.to_string(), "rows": f.pre.rows}))
                    .collect(),
            ),
            None => serde_json::Value::Array(Vec::new()),
        };
        let outcome = self.game.records().iter().rev().find_map(|r| match r {
            Record::Outcome(o) => Some(OutcomeView {
                result: o.result,
                win_step: o.win_step,
                witness: o.witness.clone(),
            }),
            _ => None,
        });
        let mut visibility: Vec<String> = self.game.region().members().map(|v| g.name(v).to_string()).collect();
        visibility.sort();
        StateView {
            session: self.id,
            t: state.t,
            defender_amounts: state.defender.to_named(env),
            attacker_amounts: state.attacker.to_named(env),
            groups: group_records(env, state),
            platoon_centers,
            advantages,
            visibility,
            legal_moves: self.legal_moves(),
            outcome,
            no_guarantee: self.game.config().defender_total < self.required,
            required: format_amount(&self.required),
            attacker_flows: self.attacker_flows.clone(),
            defender_flows: self.defender_flows.clone(),
        }
    }

    /// Checks the move against the advertised legal moves and builds the
    /// complete plan.
    fn plan(&self, flows: &[ScriptFlow]) -> Result<Vec<Flow>, String> {
        let env = self.env();
        let g = env.graph();
        let state = self.game.state();
        let menu = split_menu();
        let mut per_group: BTreeMap<GroupLabel, Vec<(ddab_core::graph::NodeId, Amount)>> = BTreeMap::new();
        let mut out = Vec::with_capacity(flows.len());
        for f in flows {
            let from = g.id(&f.from).map_err(|_| format!("unknown node {:?}", f.from))?;
            let to = g.id(&f.to).map_err(|_| format!("unknown node {:?}", f.to))?;
            let here: Vec<_> = state.groups.iter().filter(|grp| grp.node == from).collect();
            let grp = match &f.group {
                Some(l) => here
                    .iter()
                    .find(|grp| grp.label.as_str() == l)
                    .ok_or_else(|| format!("no group {l} at {}", f.from))?,
                None => match here.as_slice() {
                    [one] => one,
                    [] => return Err(format!("no attacker assets at {}", f.from)),
                    _ => return Err(format!("several groups at {}; name one", f.from)),
                },
            };
            if from != to && !g.adjacent(from, to) {
                return Err(format!("{} -> {} is not an edge", f.from, f.to));
            }
            let a = match &f.amount {
                Some(s) => parse_amount(s).map_err(|e| e.to_string())?,
                None => grp.amount.clone(),
            };
            if a != grp.amount {
                if !self.fractional {
                    return Err("split moves need a fractional session".into());
                }
                let share = &a / &grp.amount;
                if !menu.contains(&share) {
                    return Err(format!("share {} is not on the menu", format_amount(&share)));
                }
            }
            per_group.entry(grp.label.clone()).or_default().push((to, a.clone()));
            out.push(Flow::grouped(from, to, a, grp.label.clone()));
        }
        for (label, dests) in &per_group {
            let mut nodes: Vec<_> = dests.iter().map(|d| d.0).collect();
            nodes.sort();
            nodes.dedup();
            if nodes.len() > 2 || (nodes.len() > 1 && !self.fractional) {
                return Err(format!("group {label} sent to too many nodes"));
            }
        }
        Ok(out)
    }

    pub fn submit(&mut self, flows: &[ScriptFlow]) -> Result<(), String> {
        if self.game.is_finished() {
            return Err("game is over".into());
        }
        let plan = complete_plan(&self.game.state().groups, &self.plan(flows)?);
        let mut next = self.game.clone();
        next.attacker_turn(AttackerMove { plan, signal: None }).map_err(|e| e.to_string())?;
        next.evaluate().map_err(|e| e.to_string())?;
        let attacker_flows = last_flows(&next, Phase::Attacker);
        let mut defender_flows = Vec::new();
        if !next.is_finished() {
            next.defender_turn().map_err(|e| e.to_string())?;
            defender_flows = last_flows(&next, Phase::Defender);
        }
        self.game = next;
        self.attacker_flows = attacker_flows;
        self.defender_flows = defender_flows;
        Ok(())
    }

    pub fn export(&self) -> String {
        let mut recs = self.game.records().to_vec();
        if !self.game.is_finished() {
            // a live session has no outcome yet; export what was played
            recs.retain(|r| !matches!(r, Record::Outcome(_)));
        }
        to_jsonl(&recs)
    }
}

struct Entry {
    session: Session,
    last_used: Instant,
}

/// Session table shared by all connections.
pub struct Sessions {
    inner: Mutex<(u64, HashMap<u64, Entry>)>,
    ttl: Duration,
}

impl Default for Sessions {
    fn default() -> Self {
        Sessions::new(Duration::from_secs(3600))
    }
}

impl Sessions {
    pub fn new(ttl: Duration) -> Self {
        Sessions {
            inner: Mutex::new((0, HashMap::new())),
            ttl,
        }
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("session lock").1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn handle(&self, msg: &ClientMessage) -> ServerMessage {
        let mut guard = self.inner.lock().expect("session lock");
        let (next_id, table) = &mut *guard;
        let now = Instant::now();
        table.retain(|_, e| now.duration_since(e.last_used) < self.ttl);
        match msg {
            ClientMessage::New { config } => {
                *next_id += 1;
                let id = *next_id;
                match Session::create(id, config) {
                    Ok(session) => {
                        let view = session.view();
                        table.insert(
                            id,
                            Entry {
                                session,
                                last_used: now,
                            },
                        );
                        ServerMessage::State(Box::new(view))
                    }
                    Err(reason) => err(None, reason),
                }
            }
            ClientMessage::Move { session, flows } => match table.get_mut(session) {
                None => err(Some(*session), "session not found"),
                Some(e) => {
                    e.last_used = now;
                    match e.session.submit(flows) {
                        Ok(()) => ServerMessage::State(Box::new(e.session.view())),
                        Err(reason) => err(Some(*session), reason),
                    }
                }
            },
            ClientMessage::Export { session } => match table.get_mut(session) {
                None => err(Some(*session), "session not found"),
                Some(e) => {
                    e.last_used = now;
                    ServerMessage::Trace {
                        session: *session,
                        jsonl: e.session.export(),
                    }
                }
            },
        }
    }

    /// Decodes and handles one text frame.
    pub fn handle_text(&self, text: &str) -> ServerMessage {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(msg) => self.handle(&msg),
            Err(e) => err(None, format!("malformed message: {e}")),
        }
    }
}

/// Feeds a recorded client log into a fresh table and returns the replies.
pub fn replay_log(log: &[ClientMessage]) -> Vec<ServerMessage> {
    let s = Sessions::default();
    log.iter().map(|m| s.handle(m)).collect()
}
