//! Desk-scale checks of the asset bound.
//!
//! * [`verify_sufficiency`]: breadth-first search over (attacker position,
//!   platoon centres) with the defender fixed to the policy and the unit
//!   attacker free to take every legal move.
//! * [`verify_necessity`]: on a three-target gadget, searches all on-path
//!   unit deployments of the trial budget for one that covers every
//!   three-node window, and plays the gadget attacker against the policy.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::adversary::{gadget_attack_plan, Scripted};
use crate::amount::{floor_units, int, Amount};
use crate::engine::{run_game, EngineError, GameConfig, GameOutcome};
use crate::graph::{validate_environment, Environment, Graph, NodeId, PathSpec};
use crate::par::Exec;
use crate::policy::{DefenderPolicy, PlatoonState, PolicyError, PolicyVariant};
use crate::state::AssetDistribution;
use crate::trace::GameResult;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("state budget of {budget} exceeded after exploring {explored} states")]
    Inconclusive { explored: usize, budget: usize },
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("invalid gadget: {0}")]
    Gadget(String),
    #[error("deployment search too large for k = {k} (more than {limit} states per position)")]
    TooLarge { k: u32, limit: usize },
    #[error("engine: {0}")]
    Engine(#[from] EngineError),
    #[error("inconsistent verdicts: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    SafeClosed,
    BreachFound,
}

/// How the search treats an attacker outside the visibility region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reentry {
    /// All hidden positions collapse into one token that may re-enter at
    /// any boundary node. Over-approximates the attacker.
    #[default]
    Abstract,
    /// Hidden positions are tracked exactly.
    Concrete,
}

#[derive(Debug, Clone, Copy)]
pub struct SufficiencyOptions {
    pub budget: usize,
    pub reentry: Reentry,
    pub exec: Exec,
    pub variant: PolicyVariant,
}

impl Default for SufficiencyOptions {
    fn default() -> Self {
        SufficiencyOptions {
            budget: 2_000_000,
            reentry: Reentry::Abstract,
            exec: Exec::Sequential,
            variant: PolicyVariant::Standard,
        }
    }
}

/// A concrete winning line for the unit attacker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Breach {
    /// Attacker position at `t = 0, 1, ...`; the last entry is the breached node.
    pub positions: Vec<NodeId>,
    pub win_step: u64,
    pub witness: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachabilityResult {
    pub verdict: Verdict,
    pub explored_states: usize,
    /// Defender actions after which some advantage was below -1.
    pub floor_violations: usize,
    pub breach: Option<Breach>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Pos {
    Outside,
    At(NodeId),
}

type SearchState = (Pos, PlatoonState);

struct Expansion {
    violation: bool,
    next: PlatoonState,
    /// Successor position and whether arriving there breaches the path.
    succ: Vec<(Pos, bool)>,
}

struct Search<'a> {
    env: &'a Environment,
    policy: DefenderPolicy,
    statics: AssetDistribution,
    reentry: Reentry,
    visible: Vec<bool>,
    reentry_nodes: Vec<NodeId>,
}

impl Search<'_> {
    fn defended(&self, platoons: &PlatoonState) -> AssetDistribution {
        let mut d = self.statics.clone();
        for (v, a) in self.policy.platoon_distribution(platoons, &Amount::one()).nonzero() {
            d.add(v, a);
        }
        d
    }

    fn breaches(&self, d: &AssetDistribution, v: NodeId) -> bool {
        self.env.on_path(v) && d.get(v) < &Amount::one()
    }

    fn pos_of(&self, v: NodeId) -> Pos {
        if self.reentry == Reentry::Abstract && !self.visible[v.0] {
            Pos::Outside
        } else {
            Pos::At(v)
        }
    }

    fn expand(&self, (pos, platoons): &SearchState) -> Result<Expansion, PolicyError> {
        let seen = match pos {
            Pos::At(v) if self.visible[v.0] => Some(*v),
            _ => None,
        };
        let next = self.policy.step(platoons, seen)?.platoons;
        let violation = seen.is_some() && !self.policy.advantages(&next, seen).all_at_least(-1);
        let d = self.defended(&next);
        let g = self.env.graph();
        let mut succ = Vec::new();
        match pos {
            Pos::At(v) => {
                succ.push((*pos, self.breaches(&d, *v)));
                for &w in g.neighbors(*v) {
                    succ.push((self.pos_of(w), self.breaches(&d, w)));
                }
            }
            Pos::Outside => {
                succ.push((Pos::Outside, false));
                for &w in &self.reentry_nodes {
                    succ.push((Pos::At(w), self.breaches(&d, w)));
                }
            }
        }
        Ok(Expansion { violation, next, succ })
    }

    fn run(&self, budget: usize, exec: Exec) -> Result<ReachabilityResult, VerifyError> {
        let g = self.env.graph();
        let mut arena: Vec<SearchState> = Vec::new();
        let mut parent: Vec<Option<usize>> = Vec::new();
        let mut index: HashMap<SearchState, usize> = HashMap::new();
        let mut layer = Vec::new();
        let mut violations = 0;
        for s in g.nodes() {
            let seen = self.visible[s.0].then_some(s);
            let (c0, _) = self.policy.initialize(seen)?;
            if self.breaches(&self.defended(&c0), s) {
                return Ok(ReachabilityResult {
                    verdict: Verdict::BreachFound,
                    explored_states: arena.len(),
                    floor_violations: 0,
                    breach: Some(Breach {
                        positions: vec![s],
                        win_step: 0,
                        witness: s,
                    }),
                });
            }
            let st = (self.pos_of(s), c0);
            if !index.contains_key(&st) {
                index.insert(st.clone(), arena.len());
                layer.push(arena.len());
                arena.push(st);
                parent.push(None);
            }
        }
        while !layer.is_empty() {
            let states: Vec<&SearchState> = layer.iter().map(|&i| &arena[i]).collect();
            let expanded = exec.map(&states, |s| self.expand(s));
            let mut next_layer = Vec::new();
            for (&from, e) in layer.iter().zip(expanded) {
                let e = e?;
                violations += e.violation as usize;
                for (pos, breach) in e.succ {
                    if breach {
                        let Pos::At(w) = pos else { unreachable!("breach at a hidden node") };
                        let mut positions = vec![w];
                        let mut cur = Some(from);
                        while let Some(i) = cur {
                            positions.push(match arena[i].0 {
                                Pos::At(v) => v,
                                Pos::Outside => NodeId(usize::MAX),
                            });
                            cur = parent[i];
                        }
                        positions.reverse();
                        return Ok(ReachabilityResult {
                            verdict: Verdict::BreachFound,
                            explored_states: arena.len(),
                            floor_violations: violations,
                            breach: Some(Breach {
                                win_step: positions.len() as u64 - 1,
                                positions,
                                witness: w,
                            }),
                        });
                    }
                    let st = (pos, e.next.clone());
                    if !index.contains_key(&st) {
                        index.insert(st.clone(), arena.len());
                        next_layer.push(arena.len());
                        arena.push(st);
                        parent.push(Some(from));
                    }
                }
            }
            if arena.len() > budget {
                return Err(VerifyError::Inconclusive {
                    explored: arena.len(),
                    budget,
                });
            }
            layer = next_layer;
        }
        Ok(ReachabilityResult {
            verdict: Verdict::SafeClosed,
            explored_states: arena.len(),
            floor_violations: violations,
            breach: None,
        })
    }
}

/// Exhaustive check that the policy with `x` assets keeps a unit attacker
/// off the path. An abstract breach is re-checked on the concrete graph,
/// so any returned breach has real positions.
pub fn verify_sufficiency(
    env: &Arc<Environment>,
    k: u32,
    x: &Amount,
    opts: SufficiencyOptions,
) -> Result<ReachabilityResult, VerifyError> {
    let y = int(1);
    let policy = DefenderPolicy::with_variant(env.clone(), k, x, &y, opts.variant)?;
    let region = env.visibility_region(k);
    let g = env.graph();
    let visible: Vec<bool> = g.nodes().map(|v| region.contains(v)).collect();
    let reentry_nodes = g
        .nodes()
        .filter(|&v| visible[v.0] && g.neighbors(v).iter().any(|w| !visible[w.0]))
        .collect();
    let search = Search {
        env,
        statics: policy.static_distribution(&y),
        policy,
        reentry: opts.reentry,
        visible,
        reentry_nodes,
    };
    let r = search.run(opts.budget, opts.exec)?;
    if r.verdict == Verdict::BreachFound && opts.reentry == Reentry::Abstract {
        tracing::debug!("abstract breach; re-checking on the concrete graph");
        let concrete = Search {
            reentry: Reentry::Concrete,
            ..search
        };
        return concrete.run(opts.budget, opts.exec);
    }
    Ok(r)
}

/// Plays a search witness through the engine.
pub fn replay_breach(env: &Arc<Environment>, k: u32, x: &Amount, breach: &Breach) -> Result<GameOutcome, EngineError> {
    let mut cfg = GameConfig::new(env.clone(), k, x.clone(), int(1), breach.positions[0]);
    cfg.max_steps = cfg.max_steps.max(breach.win_step + 1);
    let mut s = Scripted::from_positions(&breach.positions);
    run_game(cfg, &mut s)
}

/// Three-target gadget on a path of `path_len` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GadgetSpec {
    pub path_len: usize,
    pub k: u32,
    /// 0-based index of the middle target.
    pub alpha: usize,
    /// Nodes on the entry chain beyond the hub; `None` means `k + 1`.
    pub entry_chain_len: Option<usize>,
    /// Adds a second route from the far end of the chain back to a path
    /// endpoint so hidden attackers can re-enter elsewhere.
    pub ring: bool,
}

impl GadgetSpec {
    pub fn new(path_len: usize, k: u32, alpha: usize) -> Self {
        GadgetSpec {
            path_len,
            k,
            alpha,
            entry_chain_len: None,
            ring: false,
        }
    }

    pub fn chain_len(&self) -> usize {
        self.entry_chain_len.unwrap_or(self.k as usize + 1)
    }
}

#[derive(Debug, Clone)]
pub struct Gadget {
    pub spec: GadgetSpec,
    pub env: Arc<Environment>,
    pub xi: NodeId,
    /// Far end of the entry chain.
    pub staging: NodeId,
}

/// Nodes `p1..pn`, hub `xi`, chain `q1..qL`, optional ring `r1..rL`.
pub fn build_gadget(spec: GadgetSpec) -> Result<Gadget, VerifyError> {
    let n = spec.path_len;
    if n < 3 || spec.alpha == 0 || spec.alpha + 1 >= n {
        return Err(VerifyError::Gadget(format!(
            "alpha {} needs path indices alpha-1..=alpha+1 inside a path of {n}",
            spec.alpha
        )));
    }
    let len = spec.chain_len();
    if len == 0 {
        return Err(VerifyError::Gadget("entry chain must be nonempty".into()));
    }
    let mut names: Vec<String> = (1..=n).map(|i| format!("p{i}")).collect();
    let mut edges: Vec<(NodeId, NodeId)> = (1..n).map(|i| (NodeId(i - 1), NodeId(i))).collect();
    let xi = NodeId(names.len());
    names.push("xi".into());
    for i in spec.alpha - 1..=spec.alpha + 1 {
        edges.push((xi, NodeId(i)));
    }
    let mut prev = xi;
    for j in 1..=len {
        let q = NodeId(names.len());
        names.push(format!("q{j}"));
        edges.push((prev, q));
        prev = q;
    }
    let staging = prev;
    if spec.ring {
        // attach to the endpoint farther from the hub
        let end = if spec.alpha >= n / 2 { NodeId(0) } else { NodeId(n - 1) };
        let mut prev = end;
        for j in 1..=len {
            let r = NodeId(names.len());
            names.push(format!("r{j}"));
            edges.push((prev, r));
            prev = r;
        }
        edges.push((prev, staging));
    }
    let graph = Graph::new(names, &edges).map_err(|e| VerifyError::Gadget(e.to_string()))?;
    let path = PathSpec::new((0..n).map(NodeId).collect());
    validate_environment(&graph, &path).map_err(|e| VerifyError::Gadget(e.to_string()))?;
    let env = Environment::new(graph, path).map_err(|e| VerifyError::Gadget(e.to_string()))?;
    Ok(Gadget {
        spec,
        env: Arc::new(env),
        xi,
        staging,
    })
}

/// Unit assets per path node, floored and capped at 3.
fn unit_counts(env: &Environment, deployment: &AssetDistribution) -> Vec<u64> {
    env.path()
        .nodes()
        .iter()
        .map(|&v| floor_units(deployment.get(v)).min(3))
        .collect()
}

/// Can three distinct unit assets of `deployment` reach the three targets
/// around path index `alpha`, each within `k` hops? Bipartite matching.
pub fn three_window_coverage(env: &Environment, k: u32, deployment: &AssetDistribution, alpha: usize) -> bool {
    let p = env.path();
    if alpha == 0 || alpha + 1 >= p.len() {
        return false;
    }
    let g = env.graph();
    let targets = [p.node(alpha - 1), p.node(alpha), p.node(alpha + 1)];
    let mut assets = Vec::new();
    for (i, c) in unit_counts(env, deployment).into_iter().enumerate() {
        for _ in 0..c {
            assets.push(p.node(i));
        }
    }
    let reach: Vec<Vec<usize>> = targets
        .iter()
        .map(|&t| (0..assets.len()).filter(|&a| g.d(assets[a], t) <= k).collect())
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; assets.len()];
    fn augment(t: usize, reach: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &a in &reach[t] {
            if seen[a] {
                continue;
            }
            seen[a] = true;
            if owner[a].is_none() || augment(owner[a].expect("owned"), reach, owner, seen) {
                owner[a] = Some(t);
                return true;
            }
        }
        false
    }
    (0..3).all(|t| augment(t, &reach, &mut owner, &mut vec![false; assets.len()]))
}

/// Hall's condition on path indices: `counts[j]` assets sit at index
/// `first + j`.
fn window_covered(counts: &[u8], first: usize, alpha: usize, k: usize) -> bool {
    let targets = [alpha - 1, alpha, alpha + 1];
    (1u8..8).all(|mask| {
        let need = mask.count_ones();
        let have: u32 = counts
            .iter()
            .enumerate()
            .filter(|&(j, _)| {
                let u = first + j;
                (0..3).any(|b| mask & (1 << b) != 0 && u.abs_diff(targets[b]) <= k)
            })
            .map(|(_, &c)| c as u32)
            .sum();
        have >= need
    })
}

/// Interior indices whose three-window the unit counts fail to cover.
pub fn uncovered_alphas(counts: &[u64], k: u32) -> Vec<usize> {
    let n = counts.len();
    let c: Vec<u8> = counts.iter().map(|&c| c.min(3) as u8).collect();
    (1..n.saturating_sub(1)).filter(|&a| !window_covered(&c, 0, a, k as usize)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    /// A full window of `2k + 3` consecutive nodes holding fewer than three.
    Block,
    /// The three nodes around `alpha` cannot be matched to three assets.
    Coverage { alpha: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WindowViolation {
    /// 0-based inclusive range.
    pub start: usize,
    pub end: usize,
    pub held: u64,
    pub kind: WindowKind,
}

/// Every window the deployment leaves short, by block count and by
/// three-target coverage (which also catches the clipped windows at the
/// ends of the path).
pub fn necessary_window_audit(path_len: usize, k: u32, counts: &[u64]) -> Vec<WindowViolation> {
    assert_eq!(counts.len(), path_len, "one count per path node");
    let block = 2 * k as usize + 3;
    let held = |s: usize, e: usize| counts[s..=e].iter().sum::<u64>();
    let mut out = Vec::new();
    if path_len >= block {
        for s in 0..=path_len - block {
            let e = s + block - 1;
            if held(s, e) < 3 {
                out.push(WindowViolation {
                    start: s,
                    end: e,
                    held: held(s, e),
                    kind: WindowKind::Block,
                });
            }
        }
    }
    for alpha in uncovered_alphas(counts, k) {
        let s = (alpha - 1).saturating_sub(k as usize);
        let e = (alpha + 1 + k as usize).min(path_len - 1);
        out.push(WindowViolation {
            start: s,
            end: e,
            held: held(s, e),
            kind: WindowKind::Coverage { alpha },
        });
    }
    out
}

const DP_STATE_LIMIT: usize = 1 << 20;

/// Smallest on-path unit deployment covering every three-window, by dynamic
/// programming over the last `2k + 2` per-node counts (each 0..=3).
type DpLayer = HashMap<Vec<u8>, (u64, Vec<u8>)>;

pub fn minimal_covering_deployment(path_len: usize, k: u32) -> Result<Vec<u64>, VerifyError> {
    let n = path_len;
    if n < 3 {
        return Ok(vec![1; n]);
    }
    let ku = k as usize;
    let keep = 2 * ku + 2;
    // layer i: state (last counts) -> (cost, predecessor state)
    let mut layers: Vec<DpLayer> = Vec::with_capacity(n);
    let root: DpLayer = HashMap::from([(Vec::new(), (0, Vec::new()))]);
    for i in 0..n {
        let cur = layers.last().unwrap_or(&root);
        let mut next: HashMap<Vec<u8>, (u64, Vec<u8>)> = HashMap::new();
        for (st, (cost, _)) in cur {
            for c in 0..=3u8 {
                let mut w = st.clone();
                w.push(c);
                let first = i + 1 - w.len();
                // the window around alpha = i - k - 1 is now complete
                if i >= ku + 2 && !window_covered(&w, first, i - ku - 1, ku) {
                    continue;
                }
                if w.len() > keep {
                    w.remove(0);
                }
                let total = cost + c as u64;
                match next.get(&w) {
                    Some((best, _)) if *best <= total => {}
                    _ => {
                        next.insert(w, (total, st.clone()));
                    }
                }
            }
        }
        if next.len() > DP_STATE_LIMIT {
            return Err(VerifyError::TooLarge {
                k,
                limit: DP_STATE_LIMIT,
            });
        }
        layers.push(next);
    }
    // windows clipped by the end of the path
    let tail = (n - 1).saturating_sub(ku).max(1)..n - 1;
    let best = layers[n - 1]
        .iter()
        .filter(|(st, _)| tail.clone().all(|a| window_covered(st, n - st.len(), a, ku)))
        .min_by(|a, b| (a.1 .0, a.0).cmp(&(b.1 .0, b.0)))
        .map(|(st, _)| st.clone())
        .ok_or_else(|| VerifyError::Inconsistent("no covering deployment at any budget".into()))?;
    // walk back: the last element of each state is that position's count
    let mut counts = vec![0u64; n];
    let mut st = best;
    for i in (0..n).rev() {
        counts[i] = *st.last().expect("nonempty state") as u64;
        st = layers[i][&st].1.clone();
    }
    Ok(counts)
}

/// A covering deployment using at most `units` assets (surplus on the
/// first node), or `None` when every deployment leaves a window short.
pub fn find_covering_deployment(path_len: usize, k: u32, units: u64) -> Result<Option<Vec<u64>>, VerifyError> {
    let mut counts = minimal_covering_deployment(path_len, k)?;
    let used: u64 = counts.iter().sum();
    if used > units {
        return Ok(None);
    }
    if let Some(c) = counts.first_mut() {
        *c += units - used;
    }
    Ok(Some(counts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NecessityVerdict {
    AttackerWins,
    DefenseHeld,
}

#[derive(Debug, Clone)]
pub struct NecessityResult {
    pub verdict: NecessityVerdict,
    /// The gadget the witness game was played on.
    pub gadget: Gadget,
    /// True when the hub was moved off `spec.alpha` to a window the
    /// policy leaves uncovered.
    pub retargeted: bool,
    pub covering_deployment: Option<Vec<u64>>,
    /// Uncovered interior indices of the policy's starting deployment.
    pub policy_gaps: Vec<usize>,
    pub outcome: Option<GameOutcome>,
}

/// Necessity check at trial budget `x` (attacker mass 1).
pub fn verify_necessity(spec: GadgetSpec, x: &Amount) -> Result<NecessityResult, VerifyError> {
    let gadget = build_gadget(spec)?;
    let n = spec.path_len;
    let k = spec.k;
    let y = int(1);
    let cover = find_covering_deployment(n, k, floor_units(x))?;
    let policy = DefenderPolicy::new(gadget.env.clone(), k, x, &y)?;
    let (c0, _) = policy.initialize(None)?;
    let mut start = policy.platoon_distribution(&c0, &y);
    for (v, a) in policy.static_distribution(&y).nonzero() {
        start.add(v, a);
    }
    let policy_gaps = uncovered_alphas(&unit_counts(&gadget.env, &start), k);

    let play = |g: &Gadget| -> Result<GameOutcome, VerifyError> {
        let mut attacker = gadget_attack_plan(&g.env, k, g.spec.alpha, 0).map_err(|e| VerifyError::Gadget(e.to_string()))?;
        let cfg = GameConfig::new(g.env.clone(), k, x.clone(), y.clone(), g.staging);
        Ok(run_game(cfg, &mut attacker)?)
    };

    if let Some(dep) = cover {
        let outcome = play(&gadget)?;
        return Ok(NecessityResult {
            verdict: NecessityVerdict::DefenseHeld,
            gadget,
            retargeted: false,
            covering_deployment: Some(dep),
            policy_gaps,
            outcome: Some(outcome),
        });
    }

    let mut candidates = Vec::new();
    if policy_gaps.contains(&spec.alpha) {
        candidates.push(spec.alpha);
    }
    candidates.extend(policy_gaps.iter().copied().filter(|&a| a != spec.alpha));
    for alpha in candidates {
        let g = if alpha == spec.alpha {
            gadget.clone()
        } else {
            let moved = GadgetSpec { alpha, ..spec };
            build_gadget(moved).or_else(|_| build_gadget(GadgetSpec { ring: false, ..moved }))?
        };
        let outcome = play(&g)?;
        if outcome.result == GameResult::AttackerWin {
            return Ok(NecessityResult {
                verdict: NecessityVerdict::AttackerWins,
                retargeted: alpha != spec.alpha,
                gadget: g,
                covering_deployment: None,
                policy_gaps,
                outcome: Some(outcome),
            });
        }
    }
    Err(VerifyError::Inconsistent(format!(
        "no deployment of {} units covers every window, yet the gadget attacker did not win (policy gaps {:?})",
        floor_units(x),
        policy_gaps
    )))
}
