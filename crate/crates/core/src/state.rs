//! Asset distributions, move plans and the per-timestep game state.
//!
//! A move is a set of flows. For each node holding assets, the outflows
//! (including the stay flow `v -> v`) must sum exactly to the node's holding,
//! which is the flow form of a column-stochastic transition.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::{format_amount, Amount};
use crate::graph::{Environment, NodeId, VisibilityRegion};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Defender,
    Attacker,
}

/// Who acts next within a timestep.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Defender,
    Attacker,
    Evaluate,
}

/// Hierarchical attacker group label: `A`, `A.0`, `A.1.0`, ...
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupLabel(String);

impl GroupLabel {
    pub fn new(s: impl Into<String>) -> Self {
        GroupLabel(s.into())
    }

    pub fn root() -> Self {
        GroupLabel("A".into())
    }

    pub fn child(&self, i: usize) -> Self {
        GroupLabel(format!("{}.{}", self.0, i))
    }

    /// Strict ancestor test.
    pub fn is_ancestor_of(&self, other: &GroupLabel) -> bool {
        other.0.len() > self.0.len()
            && other.0.starts_with(&self.0)
            && other.0.as_bytes()[self.0.len()] == b'.'
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for GroupLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoveError {
    #[error("it is the {expected:?} phase, {mover:?} cannot move")]
    WrongPhase { expected: Phase, mover: Player },
    #[error("flow {from} -> {to} does not follow an edge")]
    NonEdge { from: String, to: String },
    #[error("flow {from} -> {to} has nonpositive amount {amount}")]
    NonPositive { from: String, to: String, amount: String },
    #[error("node {node}: outflow {outflow} differs from holding {holding}")]
    Conservation {
        node: String,
        outflow: String,
        holding: String,
    },
    #[error("flow names group {0} which is not at the flow's source")]
    UnknownGroup(String),
    #[error("node index {0} out of range")]
    UnknownNode(usize),
}

/// One player's exact allocation over all nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AssetDistribution {
    amounts: Vec<Amount>,
    total: Amount,
}

impl AssetDistribution {
    pub fn zeros(n: usize) -> Self {
        AssetDistribution {
            amounts: vec![Amount::zero(); n],
            total: Amount::zero(),
        }
    }

    /// Panics on negative entries.
    pub fn from_amounts(amounts: Vec<Amount>) -> Self {
        assert!(amounts.iter().all(|a| !a.is_negative()), "negative asset amount");
        let total = amounts.iter().sum();
        AssetDistribution { amounts, total }
    }

    pub fn single(n: usize, at: NodeId, amount: Amount) -> Self {
        let mut d = Self::zeros(n);
        d.add(at, &amount);
        d
    }

    pub fn get(&self, v: NodeId) -> &Amount {
        &self.amounts[v.0]
    }

    pub fn amounts(&self) -> &[Amount] {
        &self.amounts
    }

    pub fn total(&self) -> &Amount {
        &self.total
    }

    pub fn len(&self) -> usize {
        self.amounts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amounts.is_empty()
    }

    pub fn add(&mut self, v: NodeId, a: &Amount) {
        self.amounts[v.0] += a;
        self.total += a;
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (NodeId, &Amount)> {
        self.amounts
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(i, a)| (NodeId(i), a))
    }

    /// Sum of entries equals `total` and entries are nonnegative.
    pub fn is_consistent(&self) -> bool {
        self.amounts.iter().all(|a| !a.is_negative()) && self.amounts.iter().sum::<Amount>() == self.total
    }

    /// Name -> `"num/den"` for nonzero entries.
    pub fn to_named(&self, env: &Environment) -> BTreeMap<String, String> {
        self.nonzero()
            .map(|(v, a)| (env.graph().name(v).to_string(), format_amount(a)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Flow {
    pub from: NodeId,
    pub to: NodeId,
    pub amount: Amount,
    /// Attacker flows may name the group they move.
    pub group: Option<GroupLabel>,
}

impl Flow {
    pub fn new(from: NodeId, to: NodeId, amount: Amount) -> Self {
        Flow {
            from,
            to,
            amount,
            group: None,
        }
    }

    pub fn grouped(from: NodeId, to: NodeId, amount: Amount, group: GroupLabel) -> Self {
        Flow {
            from,
            to,
            amount,
            group: Some(group),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct MovePlan {
    pub flows: Vec<Flow>,
}

impl MovePlan {
    pub fn new(flows: Vec<Flow>) -> Self {
        MovePlan { flows }
    }

    /// Everything stays in place.
    pub fn stay(dist: &AssetDistribution) -> Self {
        MovePlan {
            flows: dist.nonzero().map(|(v, a)| Flow::new(v, v, a.clone())).collect(),
        }
    }

    /// Every attacker group stays in place.
    pub fn stay_groups(groups: &[AttackerGroup]) -> Self {
        MovePlan {
            flows: groups
                .iter()
                .map(|g| Flow::grouped(g.node, g.node, g.amount.clone(), g.label.clone()))
                .collect(),
        }
    }

    /// Merges flows with equal `(from, to, group)` and sorts them.
    pub fn normalized(mut self) -> Self {
        self.flows.sort_by(|a, b| (a.from, a.to, &a.group).cmp(&(b.from, b.to, &b.group)));
        let mut out: Vec<Flow> = Vec::with_capacity(self.flows.len());
        for f in self.flows {
            match out.last_mut() {
                Some(last) if last.from == f.from && last.to == f.to && last.group == f.group => {
                    last.amount += f.amount;
                }
                _ => out.push(f),
            }
        }
        MovePlan { flows: out }
    }

    pub fn is_all_stay(&self) -> bool {
        self.flows.iter().all(|f| f.from == f.to)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AttackerGroup {
    pub label: GroupLabel,
    pub node: NodeId,
    pub amount: Amount,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    pub t: u64,
    pub phase: Phase,
    pub defender: AssetDistribution,
    pub attacker: AssetDistribution,
    /// Sorted by label.
    pub groups: Vec<AttackerGroup>,
}

impl GameState {
    /// State at `t = 0` with the defender about to move.
    pub fn new(defender: AssetDistribution, groups: Vec<AttackerGroup>) -> Self {
        let mut attacker = AssetDistribution::zeros(defender.len());
        for g in &groups {
            attacker.add(g.node, &g.amount);
        }
        let mut groups = groups;
        groups.sort_by(|a, b| a.label.cmp(&b.label));
        GameState {
            t: 0,
            phase: Phase::Defender,
            defender,
            attacker,
            groups,
        }
    }

    /// Per-node group sums equal the attacker distribution.
    pub fn groups_consistent(&self) -> bool {
        let mut sums = AssetDistribution::zeros(self.attacker.len());
        for g in &self.groups {
            sums.add(g.node, &g.amount);
        }
        sums.amounts == self.attacker.amounts && sums.total == self.attacker.total
    }

    pub fn group(&self, label: &GroupLabel) -> Option<&AttackerGroup> {
        self.groups.iter().find(|g| &g.label == label)
    }
}

fn check_flow(env: &Environment, f: &Flow) -> Result<(), MoveError> {
    let n = env.node_count();
    if f.from.0 >= n {
        return Err(MoveError::UnknownNode(f.from.0));
    }
    if f.to.0 >= n {
        return Err(MoveError::UnknownNode(f.to.0));
    }
    let g = env.graph();
    if f.from != f.to && !g.adjacent(f.from, f.to) {
        return Err(MoveError::NonEdge {
            from: g.name(f.from).into(),
            to: g.name(f.to).into(),
        });
    }
    if !f.amount.is_positive() {
        return Err(MoveError::NonPositive {
            from: g.name(f.from).into(),
            to: g.name(f.to).into(),
            amount: format_amount(&f.amount),
        });
    }
    Ok(())
}

fn conservation(env: &Environment, node: NodeId, outflow: &Amount, holding: &Amount) -> MoveError {
    MoveError::Conservation {
        node: env.graph().name(node).into(),
        outflow: format_amount(outflow),
        holding: format_amount(holding),
    }
}

fn move_distribution(
    env: &Environment,
    dist: &AssetDistribution,
    flows: &[Flow],
) -> Result<AssetDistribution, MoveError> {
    let n = dist.len();
    let mut out = vec![Amount::zero(); n];
    let mut next = vec![Amount::zero(); n];
    for f in flows {
        check_flow(env, f)?;
        out[f.from.0] += &f.amount;
        next[f.to.0] += &f.amount;
    }
    for (i, (o, h)) in out.iter().zip(dist.amounts()).enumerate() {
        if o != h {
            return Err(conservation(env, NodeId(i), o, h));
        }
    }
    Ok(AssetDistribution {
        amounts: next,
        total: dist.total.clone(),
    })
}

/// Group-level view of an attacker plan: each group's destinations.
fn split_groups(
    env: &Environment,
    groups: &[AttackerGroup],
    flows: &[Flow],
) -> Result<Vec<AttackerGroup>, MoveError> {
    // Per group, destination -> amount (BTreeMap keeps destinations ordered).
    let mut dests: Vec<BTreeMap<NodeId, Amount>> = vec![BTreeMap::new(); groups.len()];
    let mut node_total: BTreeMap<NodeId, Amount> = BTreeMap::new();
    for g in groups {
        *node_total.entry(g.node).or_insert_with(Amount::zero) += &g.amount;
    }
    for f in flows {
        check_flow(env, f)?;
        match &f.group {
            Some(label) => {
                let gi = groups
                    .iter()
                    .position(|g| &g.label == label && g.node == f.from)
                    .ok_or_else(|| MoveError::UnknownGroup(label.to_string()))?;
                *dests[gi].entry(f.to).or_insert_with(Amount::zero) += &f.amount;
            }
            None => {
                // Unlabelled flows split across co-located groups by mass.
                let total = node_total
                    .get(&f.from)
                    .ok_or_else(|| conservation(env, f.from, &f.amount, &Amount::zero()))?;
                for (gi, g) in groups.iter().enumerate().filter(|(_, g)| g.node == f.from) {
                    let share = &f.amount * &g.amount / total;
                    *dests[gi].entry(f.to).or_insert_with(Amount::zero) += share;
                }
            }
        }
    }
    let mut next = Vec::with_capacity(groups.len());
    for (g, d) in groups.iter().zip(dests) {
        let out: Amount = d.values().sum();
        if out != g.amount {
            return Err(conservation(env, g.node, &out, &g.amount));
        }
        if d.len() == 1 {
            let (&to, _) = d.iter().next().expect("one destination");
            next.push(AttackerGroup {
                label: g.label.clone(),
                node: to,
                amount: g.amount.clone(),
            });
        } else {
            for (i, (to, amount)) in d.into_iter().enumerate() {
                next.push(AttackerGroup {
                    label: g.label.child(i),
                    node: to,
                    amount,
                });
            }
        }
    }
    next.sort_by(|a, b| a.label.cmp(&b.label));
    Ok(next)
}

/// Applies `plan` for `mover` and advances the phase.
pub fn apply_move(
    state: &GameState,
    env: &Environment,
    mover: Player,
    plan: &MovePlan,
) -> Result<GameState, MoveError> {
    let expected = match mover {
        Player::Defender => Phase::Defender,
        Player::Attacker => Phase::Attacker,
    };
    if state.phase != expected {
        return Err(MoveError::WrongPhase {
            expected: state.phase,
            mover,
        });
    }
    let mut next = state.clone();
    match mover {
        Player::Defender => {
            next.defender = move_distribution(env, &state.defender, &plan.flows)?;
            next.phase = Phase::Attacker;
        }
        Player::Attacker => {
            // Strip labels for the node-level check; groups are checked separately.
            next.attacker = move_distribution(env, &state.attacker, &plan.flows)?;
            next.groups = split_groups(env, &state.groups, &plan.flows)?;
            debug_assert!(next.groups_consistent());
            next.phase = Phase::Evaluate;
        }
    }
    Ok(next)
}

/// First path node (in path order) where the attacker holds strictly more.
pub fn breached_node(state: &GameState, env: &Environment) -> Option<NodeId> {
    env.path()
        .nodes()
        .iter()
        .copied()
        .find(|&p| state.attacker.get(p) > state.defender.get(p))
}

/// `x_v >= y_v` on every path node.
pub fn is_safe(state: &GameState, env: &Environment) -> bool {
    breached_node(state, env).is_none()
}

/// Closes the timestep: returns the next state (defender to move, `t + 1`)
/// and the breached node if the safety condition failed.
pub fn evaluate(state: &GameState, env: &Environment) -> Result<(GameState, Option<NodeId>), MoveError> {
    if state.phase != Phase::Evaluate {
        return Err(MoveError::WrongPhase {
            expected: state.phase,
            mover: Player::Attacker,
        });
    }
    let breach = breached_node(state, env);
    let mut next = state.clone();
    next.t += 1;
    next.phase = Phase::Defender;
    Ok((next, breach))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObservedGroup {
    pub label: GroupLabel,
    pub node: NodeId,
    pub amount: Amount,
}

/// What the defender sees: attacker holdings inside `U_k` only.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Observation {
    pub k: u32,
    pub visible: BTreeMap<NodeId, Amount>,
    pub groups: Vec<ObservedGroup>,
    pub unobserved_mass: Amount,
}

impl Observation {
    pub fn group_node(&self, label: &GroupLabel) -> Option<NodeId> {
        self.groups.iter().find(|g| &g.label == label).map(|g| g.node)
    }

    pub fn visible_mass(&self) -> Amount {
        self.visible.values().sum()
    }
}

pub fn observe(state: &GameState, region: &VisibilityRegion) -> Observation {
    let visible: BTreeMap<NodeId, Amount> = state
        .attacker
        .nonzero()
        .filter(|(v, _)| region.contains(*v))
        .map(|(v, a)| (v, a.clone()))
        .collect();
    let groups = state
        .groups
        .iter()
        .filter(|g| region.contains(g.node))
        .map(|g| ObservedGroup {
            label: g.label.clone(),
            node: g.node,
            amount: g.amount.clone(),
        })
        .collect();
    let seen: Amount = visible.values().sum();
    Observation {
        k: region.k(),
        visible,
        groups,
        unobserved_mass: state.attacker.total() - seen,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amount::{int, ratio};
    use crate::graph::tests::gadget;
    use proptest::prelude::*;

    fn id(env: &Environment, n: &str) -> NodeId {
        env.graph().id(n).unwrap()
    }

    fn start(env: &Environment, at: &str, defender: &[(&str, Amount)]) -> GameState {
        let mut d = AssetDistribution::zeros(env.node_count());
        for (n, a) in defender {
            d.add(id(env, n), a);
        }
        GameState::new(
            d,
            vec![AttackerGroup {
                label: GroupLabel::root(),
                node: id(env, at),
                amount: int(1),
            }],
        )
    }

    fn to_attacker_phase(env: &Environment, s: &GameState) -> GameState {
        apply_move(s, env, Player::Defender, &MovePlan::stay(&s.defender)).unwrap()
    }

    #[test]
    fn all_stay_is_identity() {
        let env = gadget();
        let s = start(&env, "q1", &[("p2", int(1)), ("p3", int(1)), ("p4", int(1))]);
        let s1 = to_attacker_phase(&env, &s);
        assert_eq!(s1.defender, s.defender);
        assert_eq!(s1.t, 0);
        let s2 = apply_move(&s1, &env, Player::Attacker, &MovePlan::stay(&s1.attacker)).unwrap();
        assert_eq!(s2.attacker, s.attacker);
        assert_eq!(s2.groups, s.groups);
    }

    #[test]
    fn single_flow_moves_unit() {
        let env = gadget();
        let s = to_attacker_phase(&env, &start(&env, "q1", &[("p3", int(3))]));
        let plan = MovePlan::new(vec![Flow::new(id(&env, "q1"), id(&env, "xi"), int(1))]);
        let s2 = apply_move(&s, &env, Player::Attacker, &plan).unwrap();
        assert_eq!(s2.attacker.get(id(&env, "xi")), &int(1));
        assert!(s2.attacker.get(id(&env, "q1")).is_zero());
        assert_eq!(s2.groups[0].label, GroupLabel::root());
        assert_eq!(s2.phase, Phase::Evaluate);
    }

    #[test]
    fn split_creates_labelled_children() {
        let env = gadget();
        let s = to_attacker_phase(&env, &start(&env, "xi", &[("p3", int(3))]));
        let xi = id(&env, "xi");
        let plan = MovePlan::new(vec![
            Flow::new(xi, id(&env, "p2"), ratio(7, 10)),
            Flow::new(xi, id(&env, "q1"), ratio(3, 10)),
        ]);
        let s2 = apply_move(&s, &env, Player::Attacker, &plan).unwrap();
        assert_eq!(s2.attacker.get(id(&env, "p2")), &ratio(7, 10));
        assert_eq!(s2.attacker.get(id(&env, "q1")), &ratio(3, 10));
        let labels: Vec<_> = s2.groups.iter().map(|g| (g.label.as_str(), g.amount.clone())).collect();
        // children are numbered by destination index: p2 < q1
        assert_eq!(labels, [("A.0", ratio(7, 10)), ("A.1", ratio(3, 10))]);
        assert!(s2.groups_consistent());
        assert_eq!(s2.attacker.total(), &int(1));
    }

    #[test]
    fn rejects_illegal_moves() {
        let env = gadget();
        let s = start(&env, "q2", &[("p3", int(3))]);
        let p3 = id(&env, "p3");
        let p5 = id(&env, "p5");
        let bad_edge = MovePlan::new(vec![Flow::new(p3, p5, int(3))]);
        assert!(matches!(
            apply_move(&s, &env, Player::Defender, &bad_edge),
            Err(MoveError::NonEdge { .. })
        ));
        let leak = MovePlan::new(vec![Flow::new(p3, p3, int(2))]);
        assert!(matches!(
            apply_move(&s, &env, Player::Defender, &leak),
            Err(MoveError::Conservation { .. })
        ));
        assert!(matches!(
            apply_move(&s, &env, Player::Attacker, &MovePlan::stay(&s.attacker)),
            Err(MoveError::WrongPhase { .. })
        ));
        let s1 = to_attacker_phase(&env, &s);
        let ghost = MovePlan::new(vec![Flow::grouped(
            id(&env, "q2"),
            id(&env, "q2"),
            int(1),
            GroupLabel::new("B"),
        )]);
        assert!(matches!(
            apply_move(&s1, &env, Player::Attacker, &ghost),
            Err(MoveError::UnknownGroup(_))
        ));
    }

    #[test]
    fn observation_restricts_to_region() {
        let env = gadget();
        let s = start(&env, "p3", &[("p3", int(3))]);
        let o = observe(&s, &env.visibility_region(0));
        assert_eq!(o.visible.get(&id(&env, "p3")), Some(&int(1)));
        assert!(o.unobserved_mass.is_zero());

        // q1 has d* = 2: just outside U_1
        let s = start(&env, "q1", &[("p3", int(3))]);
        let o = observe(&s, &env.visibility_region(1));
        assert!(o.visible.is_empty());
        assert_eq!(o.unobserved_mass, int(1));
    }

    #[test]
    fn observation_of_split_mass() {
        let env = gadget();
        let s = to_attacker_phase(&env, &start(&env, "xi", &[("p3", int(3))]));
        let xi = id(&env, "xi");
        let plan = MovePlan::new(vec![
            Flow::new(xi, id(&env, "p3"), ratio(1, 2)),
            Flow::new(xi, id(&env, "q1"), ratio(1, 2)),
        ]);
        let s2 = apply_move(&s, &env, Player::Attacker, &plan).unwrap();
        let o = observe(&s2, &env.visibility_region(1));
        assert_eq!(o.visible_mass(), ratio(1, 2));
        assert_eq!(o.unobserved_mass, ratio(1, 2));
        assert_eq!(o.groups.len(), 1);
    }

    #[test]
    fn safety_is_weak_inequality() {
        let env = gadget();
        let s = start(&env, "q2", &[]);
        assert!(is_safe(&s, &env));
        let s = start(&env, "p3", &[("p3", int(1))]);
        assert!(is_safe(&s, &env));

        let mut d = AssetDistribution::zeros(env.node_count());
        d.add(id(&env, "p2"), &ratio(1, 5));
        let mut y = AssetDistribution::zeros(env.node_count());
        y.add(id(&env, "p2"), &ratio(3, 10));
        let s = GameState::new(
            d,
            vec![AttackerGroup {
                label: GroupLabel::root(),
                node: id(&env, "p2"),
                amount: ratio(3, 10),
            }],
        );
        assert!(!is_safe(&s, &env));
        assert_eq!(breached_node(&s, &env), Some(id(&env, "p2")));
    }

    #[test]
    fn labels() {
        let a = GroupLabel::root();
        assert!(a.is_ancestor_of(&a.child(0)));
        assert!(a.is_ancestor_of(&a.child(1).child(0)));
        assert!(!a.is_ancestor_of(&a));
        assert!(!GroupLabel::new("A.1").is_ancestor_of(&GroupLabel::new("A.10")));
    }

    proptest! {
        // Random walks with random exact splits conserve mass exactly and keep
        // the group ledger consistent.
        #[test]
        fn conservation_under_random_moves(seed in any::<u64>(), steps in 1usize..30) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let env = gadget();
            let mut s = start(&env, "q2", &[("p2", int(1)), ("p3", int(1)), ("p4", int(1))]);
            let menu = [ratio(1, 2), ratio(3, 10), ratio(7, 10), ratio(1, 4), ratio(3, 4)];
            for _ in 0..steps {
                s = apply_move(&s, &env, Player::Defender, &MovePlan::stay(&s.defender)).unwrap();
                let mut flows = Vec::new();
                for g in &s.groups {
                    let mut opts = vec![g.node];
                    opts.extend_from_slice(env.graph().neighbors(g.node));
                    let a = opts[rng.random_range(0..opts.len())];
                    let b = opts[rng.random_range(0..opts.len())];
                    if rng.random_bool(0.3) {
                        let q = menu[rng.random_range(0..menu.len())].clone();
                        flows.push(Flow::grouped(g.node, a, &g.amount * &q, g.label.clone()));
                        flows.push(Flow::grouped(g.node, b, &g.amount - &g.amount * &q, g.label.clone()));
                    } else {
                        flows.push(Flow::grouped(g.node, a, g.amount.clone(), g.label.clone()));
                    }
                }
                let plan = MovePlan::new(flows);
                s = apply_move(&s, &env, Player::Attacker, &plan).unwrap();
                prop_assert!(s.groups_consistent());
                prop_assert_eq!(s.attacker.total(), &int(1));
                prop_assert!(s.attacker.is_consistent());
                let again = apply_move(
                    &GameState { phase: Phase::Attacker, ..s.clone() },
                    &env,
                    Player::Attacker,
                    &MovePlan::stay_groups(&s.groups),
                ).unwrap();
                prop_assert_eq!(&again.attacker, &s.attacker);
                s = evaluate(&s, &env).unwrap().0;
            }
            prop_assert_eq!(s.defender.total(), &int(3));
        }
    }
}
