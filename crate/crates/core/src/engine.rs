//! Turn loop: the defender observes and moves, the attacker moves with full
//! information, then the path is checked.

use std::collections::HashSet;
use std::sync::Arc;

use num_traits::Signed;
use thiserror::Error;

use crate::adversary::{AttackerMove, AttackerStrategy};
use crate::amount::{format_amount, parse_amount, Amount};
use crate::defender::{ControllerError, DefenderController, DefenderDecision};
use crate::env_file::EnvFile;
use crate::graph::{Environment, NodeId, VisibilityRegion};
use crate::policy::{DefenderPolicy, PolicyError, PolicyVariant};
use crate::state::{
    apply_move, breached_node, evaluate, observe, AssetDistribution, AttackerGroup, Flow, GameState, GroupLabel,
    MoveError, MovePlan, Observation, Phase, Player,
};
use crate::trace::{
    group_records, node_name, FlowRecord, ForceRecord, GameResult, Header, InitRecord, OutcomeRecord, PhaseRecord,
    Record, TRACE_FORMAT,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("illegal {player:?} move at t={t}: {source}")]
    IllegalMove {
        player: Player,
        t: u64,
        #[source]
        source: MoveError,
    },
    #[error("defender policy failed at t={t}: {source}")]
    Controller {
        t: u64,
        #[source]
        source: ControllerError,
    },
    #[error("attacker split at t={t}; use the sub-game runner for divisible attackers")]
    AttackerSplit { t: u64 },
    #[error("sub-force sum differs from the defender distribution at t={t}, node {node}")]
    SubgameMismatch { t: u64, node: String },
    #[error("game already finished")]
    Finished,
    #[error("cannot relocate {0}: only hidden groups may move to hidden nodes")]
    NotHidden(String),
}

impl From<PolicyError> for EngineError {
    fn from(e: PolicyError) -> Self {
        EngineError::Config(e.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct GameConfig {
    pub env: Arc<Environment>,
    pub k: u32,
    pub defender_total: Amount,
    pub attacker_total: Amount,
    pub attacker_start: NodeId,
    pub max_steps: u64,
    pub record_advantages: bool,
    pub variant: PolicyVariant,
}

pub fn default_max_steps(env: &Environment) -> u64 {
    4 * env.node_count() as u64 + 64
}

impl GameConfig {
    pub fn new(env: Arc<Environment>, k: u32, defender_total: Amount, attacker_total: Amount, attacker_start: NodeId) -> Self {
        let max_steps = default_max_steps(&env);
        GameConfig {
            env,
            k,
            defender_total,
            attacker_total,
            attacker_start,
            max_steps,
            record_advantages: false,
            variant: PolicyVariant::Standard,
        }
    }

    fn validate(&self) -> Result<(), EngineError> {
        if self.max_steps == 0 {
            return Err(EngineError::Config("max_steps must be at least 1".into()));
        }
        if !self.defender_total.is_positive() || !self.attacker_total.is_positive() {
            return Err(EngineError::Config("X and Y must be positive".into()));
        }
        if self.attacker_start.0 >= self.env.node_count() {
            return Err(EngineError::Config(format!("attacker start {} is not a node", self.attacker_start)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// One indivisible attacker; a split is a protocol error.
    Single,
    /// Divisible attacker answered by proportional sub-forces.
    Subgames,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameOutcome {
    pub result: GameResult,
    /// Index of the first unsafe state (0 is the initial state).
    pub win_step: Option<u64>,
    pub witness: Option<NodeId>,
    /// Timesteps played.
    pub steps: u64,
    pub trace: Vec<Record>,
}

type CycleKey = (AssetDistribution, Vec<AttackerGroup>, Vec<(GroupLabel, Amount, crate::policy::PlatoonState)>, String);

#[derive(Debug, Clone)]
pub struct Game {
    cfg: GameConfig,
    mode: Mode,
    region: VisibilityRegion,
    state: GameState,
    controller: DefenderController,
    records: Vec<Record>,
    last_decision: Option<DefenderDecision>,
    finished: Option<(GameResult, Option<u64>, Option<NodeId>)>,
    init_steps: usize,
}

impl Game {
    pub fn new(cfg: GameConfig, mode: Mode, strategy: &str) -> Result<Self, EngineError> {
        cfg.validate()?;
        let env = cfg.env.clone();
        let policy = DefenderPolicy::with_variant(env.clone(), cfg.k, &cfg.defender_total, &cfg.attacker_total, cfg.variant)?;
        let mut controller = DefenderController::new(policy, cfg.attacker_total.clone());
        let region = env.visibility_region(cfg.k);
        let root = AttackerGroup {
            label: GroupLabel::root(),
            node: cfg.attacker_start,
            amount: cfg.attacker_total.clone(),
        };
        let mut state = GameState::new(AssetDistribution::zeros(env.node_count()), vec![root]);
        let init_steps = controller
            .initialize(&observe(&state, &region))
            .map_err(|source| EngineError::Controller { t: 0, source })?;
        state.defender = controller.distribution();
        let breach = breached_node(&state, &env);
        let header = Header {
            format: TRACE_FORMAT,
            env: EnvFile::from_environment(&env),
            k: cfg.k,
            defender_total: format_amount(&cfg.defender_total),
            attacker_total: format_amount(&cfg.attacker_total),
            attacker_start: node_name(&env, cfg.attacker_start),
            max_steps: cfg.max_steps,
            variant: cfg.variant,
            record_advantages: cfg.record_advantages,
            strategy: strategy.to_string(),
        };
        let mut game = Game {
            cfg,
            mode,
            region,
            state,
            controller,
            records: vec![Record::Header(header)],
            last_decision: None,
            finished: None,
            init_steps,
        };
        game.records.push(Record::Init(game.init_record(breach.is_none())));
        if let Some(w) = breach {
            game.finish(GameResult::AttackerWin, Some(0), Some(w));
        }
        Ok(game)
    }

    fn init_record(&self, safe: bool) -> InitRecord {
        let env = &self.cfg.env;
        InitRecord {
            init_steps: self.init_steps,
            defender: self.state.defender.to_named(env),
            attacker: self.state.attacker.to_named(env),
            groups: group_records(env, &self.state),
            safe,
            platoons: self.force_records(),
        }
    }

    fn force_records(&self) -> Vec<ForceRecord> {
        self.controller
            .platoon_centers()
            .into_iter()
            .map(|(l, m, p)| ForceRecord {
                group: l.to_string(),
                mass: format_amount(&m),
                centers: p.centers,
            })
            .collect()
    }

    fn finish(&mut self, result: GameResult, win_step: Option<u64>, witness: Option<NodeId>) {
        self.finished = Some((result, win_step, witness));
        let env = &self.cfg.env;
        self.records.push(Record::Outcome(OutcomeRecord {
            result,
            win_step,
            witness: witness.map(|w| node_name(env, w)),
            steps: self.state.t,
        }));
    }

    pub fn config(&self) -> &GameConfig {
        &self.cfg
    }

    pub fn env(&self) -> &Arc<Environment> {
        &self.cfg.env
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn region(&self) -> &VisibilityRegion {
        &self.region
    }

    pub fn controller(&self) -> &DefenderController {
        &self.controller
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn last_decision(&self) -> Option<&DefenderDecision> {
        self.last_decision.as_ref()
    }

    pub fn is_finished(&self) -> bool {
        self.finished.is_some()
    }

    pub fn result(&self) -> Option<GameResult> {
        self.finished.map(|f| f.0)
    }

    /// What the defender would see right now.
    pub fn observation(&self) -> Observation {
        observe(&self.state, &self.region)
    }

    fn phase_record(&self, phase: Phase, flows: &[Flow], signal: Option<String>, breach: Option<NodeId>) -> PhaseRecord {
        let env = &self.cfg.env;
        let advantages = match (phase, &self.last_decision) {
            (Phase::Defender, Some(d)) if self.cfg.record_advantages => Some(
                d.forces
                    .iter()
                    .map(|f| {
                        serde_json::json!({
                            "group": f.label.to_string(),
                            "decision": f.pre.rows,
                            "after": f.post.rows,
                        })
                    })
                    .collect(),
            ),
            _ => None,
        };
        PhaseRecord {
            t: self.state.t,
            phase,
            flows: flows.iter().map(|f| FlowRecord::from_flow(env, f)).collect(),
            defender: self.state.defender.to_named(env),
            attacker: self.state.attacker.to_named(env),
            groups: group_records(env, &self.state),
            safe: breached_node(&self.state, env).is_none(),
            platoons: self.force_records(),
            breach: breach.map(|b| node_name(env, b)),
            signal,
            advantages,
        }
    }

    pub fn defender_turn(&mut self) -> Result<&DefenderDecision, EngineError> {
        if self.finished.is_some() {
            return Err(EngineError::Finished);
        }
        let t = self.state.t;
        let obs = self.observation();
        let decision = self
            .controller
            .act(&obs)
            .map_err(|source| EngineError::Controller { t, source })?;
        self.state = apply_move(&self.state, &self.cfg.env, Player::Defender, &decision.plan).map_err(|source| {
            EngineError::IllegalMove {
                player: Player::Defender,
                t,
                source,
            }
        })?;
        let monolithic = self.controller.distribution();
        if monolithic != self.state.defender {
            let node = (0..monolithic.len())
                .map(NodeId)
                .find(|&v| monolithic.get(v) != self.state.defender.get(v))
                .map(|v| node_name(&self.cfg.env, v))
                .unwrap_or_default();
            return Err(EngineError::SubgameMismatch { t, node });
        }
        let flows = decision.plan.flows.clone();
        self.last_decision = Some(decision);
        let rec = self.phase_record(Phase::Defender, &flows, None, None);
        self.records.push(Record::Phase(rec));
        Ok(self.last_decision.as_ref().expect("just set"))
    }

    pub fn attacker_turn(&mut self, mv: AttackerMove) -> Result<(), EngineError> {
        if self.finished.is_some() {
            return Err(EngineError::Finished);
        }
        let t = self.state.t;
        let next = apply_move(&self.state, &self.cfg.env, Player::Attacker, &mv.plan).map_err(|source| {
            EngineError::IllegalMove {
                player: Player::Attacker,
                t,
                source,
            }
        })?;
        if self.mode == Mode::Single && next.groups.len() > 1 {
            return Err(EngineError::AttackerSplit { t });
        }
        self.state = next;
        let rec = self.phase_record(Phase::Attacker, &mv.plan.flows, mv.signal, None);
        self.records.push(Record::Phase(rec));
        Ok(())
    }

    /// Closes the timestep; returns the breached node, if any.
    pub fn evaluate(&mut self) -> Result<Option<NodeId>, EngineError> {
        if self.finished.is_some() {
            return Err(EngineError::Finished);
        }
        let (next, breach) = evaluate(&self.state, &self.cfg.env).map_err(|source| EngineError::IllegalMove {
            player: Player::Attacker,
            t: self.state.t,
            source,
        })?;
        self.state = next;
        let rec = self.phase_record(Phase::Evaluate, &[], None, breach);
        self.records.push(Record::Phase(rec));
        if let Some(w) = breach {
            let t = self.state.t;
            self.finish(GameResult::AttackerWin, Some(t), Some(w));
        } else if self.state.t >= self.cfg.max_steps {
            self.finish(GameResult::DefendedHorizon, None, None);
        }
        Ok(breach)
    }

    /// Declares the game defended by repetition.
    pub fn declare_cycle(&mut self) {
        if self.finished.is_none() {
            self.finish(GameResult::DefendedCycle, None, None);
        }
    }

    fn cycle_key(&self, strategy: String) -> CycleKey {
        (
            self.state.defender.clone(),
            self.state.groups.clone(),
            self.controller.platoon_centers(),
            strategy,
        )
    }

    /// Test hook: moves a hidden attacker group to another hidden node.
    pub fn relocate_hidden(&mut self, label: &GroupLabel, to: NodeId) -> Result<(), EngineError> {
        let hidden = |v: NodeId| !self.region.contains(v);
        let Some(gi) = self.state.groups.iter().position(|g| &g.label == label) else {
            return Err(EngineError::NotHidden(label.to_string()));
        };
        let from = self.state.groups[gi].node;
        if !hidden(from) || !hidden(to) || to.0 >= self.cfg.env.node_count() {
            return Err(EngineError::NotHidden(label.to_string()));
        }
        self.state.groups[gi].node = to;
        let mut attacker = AssetDistribution::zeros(self.state.attacker.len());
        for g in &self.state.groups {
            attacker.add(g.node, &g.amount);
        }
        self.state.attacker = attacker;
        Ok(())
    }

    /// Plays to the end against `strategy`.
    pub fn run(mut self, strategy: &mut dyn AttackerStrategy) -> Result<GameOutcome, EngineError> {
        let mut seen: HashSet<CycleKey> = HashSet::new();
        if let Some(key) = strategy.cycle_key() {
            seen.insert(self.cycle_key(key));
        }
        while self.finished.is_none() {
            self.defender_turn()?;
            let mv = strategy.next_move(&self.state, &self.cfg.env);
            self.attacker_turn(mv)?;
            if self.evaluate()?.is_some() || self.finished.is_some() {
                break;
            }
            if let Some(key) = strategy.cycle_key() {
                if !seen.insert(self.cycle_key(key)) {
                    self.declare_cycle();
                }
            }
        }
        Ok(self.into_outcome())
    }

    pub fn into_outcome(self) -> GameOutcome {
        let (result, win_step, witness) = self.finished.unwrap_or((GameResult::DefendedHorizon, None, None));
        GameOutcome {
            result,
            win_step,
            witness,
            steps: self.state.t,
            trace: self.records,
        }
    }
}

/// Single indivisible attacker.
pub fn run_game(cfg: GameConfig, strategy: &mut dyn AttackerStrategy) -> Result<GameOutcome, EngineError> {
    Game::new(cfg, Mode::Single, strategy.name())?.run(strategy)
}

/// Divisible attacker; each visible group is answered by its own sub-force.
pub fn run_parallel_subgames(cfg: GameConfig, strategy: &mut dyn AttackerStrategy) -> Result<GameOutcome, EngineError> {
    Game::new(cfg, Mode::Subgames, strategy.name())?.run(strategy)
}

#[derive(Debug, Error, PartialEq)]
pub enum ReplayError {
    #[error("trace is empty or does not start with a header")]
    NoHeader,
    #[error("trace header: {0}")]
    BadHeader(String),
    #[error("record {record}: {reason}")]
    Diverged { record: usize, reason: String },
    #[error("trace has no outcome record")]
    NoOutcome,
}

fn diverged(record: usize, reason: impl Into<String>) -> ReplayError {
    ReplayError::Diverged {
        record,
        reason: reason.into(),
    }
}

/// Rebuilds the game from the header, re-derives every defender move,
/// re-applies every recorded attacker move and checks each record.
pub fn replay(records: &[Record]) -> Result<GameOutcome, ReplayError> {
    let Some(Record::Header(h)) = records.first() else {
        return Err(ReplayError::NoHeader);
    };
    let bad = |e: String| ReplayError::BadHeader(e);
    let env = Arc::new(h.env.clone().into_environment(None).map_err(|e| bad(e.to_string()))?);
    let start = env.graph().id(&h.attacker_start).map_err(|e| bad(e.to_string()))?;
    let cfg = GameConfig {
        env: env.clone(),
        k: h.k,
        defender_total: parse_amount(&h.defender_total).map_err(|e| bad(e.to_string()))?,
        attacker_total: parse_amount(&h.attacker_total).map_err(|e| bad(e.to_string()))?,
        attacker_start: start,
        max_steps: h.max_steps,
        record_advantages: h.record_advantages,
        variant: h.variant,
    };
    let mut game = Game::new(cfg, Mode::Subgames, &h.strategy).map_err(|e| bad(e.to_string()))?;
    if game.records[0] != records[0] {
        return Err(diverged(0, "header does not round-trip"));
    }
    let mut outcome_seen = false;
    for (i, rec) in records.iter().enumerate().skip(1) {
        match rec {
            Record::Header(_) => return Err(diverged(i, "second header")),
            Record::Init(_) => {
                if game.records.get(i) != Some(rec) {
                    return Err(diverged(i, "initial placement differs"));
                }
                continue;
            }
            Record::Phase(p) => {
                if game.is_finished() {
                    return Err(diverged(i, "moves recorded after the game ended"));
                }
                let res = match p.phase {
                    Phase::Defender => game.defender_turn().map(|_| ()),
                    Phase::Attacker => {
                        let mut flows = Vec::with_capacity(p.flows.len());
                        for f in &p.flows {
                            let node = |n: &str| env.graph().id(n).map_err(|e| diverged(i, e.to_string()));
                            let amount = parse_amount(&f.amount).map_err(|e| diverged(i, e.to_string()))?;
                            flows.push(Flow {
                                from: node(&f.from)?,
                                to: node(&f.to)?,
                                amount,
                                group: f.group.as_deref().map(GroupLabel::new),
                            });
                        }
                        game.attacker_turn(AttackerMove {
                            plan: MovePlan::new(flows),
                            signal: p.signal.clone(),
                        })
                    }
                    Phase::Evaluate => game.evaluate().map(|_| ()),
                };
                res.map_err(|e| diverged(i, e.to_string()))?;
                let mine = game
                    .records
                    .iter()
                    .rev()
                    .find(|r| matches!(r, Record::Phase(_)))
                    .expect("phase just recorded");
                if mine != rec {
                    return Err(diverged(i, format!("{:?} record differs from re-execution", p.phase)));
                }
            }
            Record::Outcome(o) => {
                if !game.is_finished() {
                    if o.result == GameResult::DefendedCycle {
                        game.declare_cycle();
                    } else {
                        return Err(diverged(i, "outcome recorded before the game ended"));
                    }
                }
                match game.records.last() {
                    Some(Record::Outcome(mine)) if mine == o => {}
                    _ => return Err(diverged(i, "outcome differs")),
                }
                outcome_seen = true;
                if i + 1 != records.len() {
                    return Err(diverged(i + 1, "records after the outcome"));
                }
            }
        }
    }
    if !outcome_seen {
        return Err(ReplayError::NoOutcome);
    }
    Ok(game.into_outcome())
}
