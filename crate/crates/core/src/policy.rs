//! The partition/platoon defense strategy.
//!
//! The path is cut into consecutive partitions of `2k + 3` nodes (the last
//! one may be shorter). Each partition of three or more nodes is guarded by
//! a platoon of three unit assets on consecutive path nodes centred at `l`;
//! partitions of one or two nodes get one static unit per node. A platoon
//! reacts to the *advantage* `a_i = d^A_i - d^D_i` of the nodes in its
//! partition: it recentres when its frontier is safe, chases the most
//! negative advantage otherwise, and holds when neither applies.
//!
//! Path indices are 0-based throughout.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::{int, Amount};
use crate::graph::{Environment, NodeId};
use crate::state::{AssetDistribution, Flow, MovePlan};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("attacker total must be positive")]
    NonPositiveAttacker,
    #[error("defender total must be positive")]
    NonPositiveDefender,
    #[error("path length must be at least 1")]
    EmptyPath,
    #[error("negative advantages on both sides of platoon {platoon} in partition {partition}")]
    TwoSidedNegative { partition: usize, platoon: usize },
    #[error("initialization did not reach a_i >= -1 within {0} steps")]
    InitDidNotConverge(usize),
    #[error("platoon centre {center} invalid for partition {partition}")]
    InvalidPlatoon { partition: usize, center: usize },
}

/// Integer multiplier of `Y` needed to guard a path of `path_len` nodes with
/// sensing distance `k`: `3 * floor(n / (2k+3)) + min(n mod (2k+3), 3)`.
pub fn required_units(path_len: usize, k: u32) -> u64 {
    let block = 2 * k as u64 + 3;
    let n = path_len as u64;
    3 * (n / block) + (n % block).min(3)
}

/// Exact number of defender assets needed against `attacker_total`.
pub fn required_assets(path_len: usize, k: u32, attacker_total: &Amount) -> Result<Amount, PolicyError> {
    if path_len == 0 {
        return Err(PolicyError::EmptyPath);
    }
    if !attacker_total.is_positive() {
        return Err(PolicyError::NonPositiveAttacker);
    }
    Ok(int(required_units(path_len, k) as i64) * attacker_total)
}

/// Consecutive block of path indices `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub start: usize,
    pub end: usize,
    pub center: usize,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// One or two nodes: static assets, no platoon.
    pub fn is_small(&self) -> bool {
        self.len() <= 2
    }

    pub fn contains(&self, i: usize) -> bool {
        (self.start..=self.end).contains(&i)
    }

    /// Allowed platoon centres.
    pub fn center_range(&self) -> std::ops::RangeInclusive<usize> {
        self.start + 1..=self.end - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionScheme {
    pub k: u32,
    pub path_len: usize,
    pub partitions: Vec<Partition>,
}

impl PartitionScheme {
    pub fn partition_of(&self, i: usize) -> usize {
        let block = 2 * self.k as usize + 3;
        i / block
    }

    pub fn platoon_count(&self) -> usize {
        self.partitions.iter().filter(|p| !p.is_small()).count()
    }
}

/// Splits from the start node; the remainder block sits next to the target.
/// Centres are the middle index, or the lower middle for even sizes.
pub fn build_partitions(path_len: usize, k: u32) -> PartitionScheme {
    let block = 2 * k as usize + 3;
    let partitions = (0..path_len)
        .step_by(block)
        .map(|start| {
            let end = (start + block - 1).min(path_len - 1);
            Partition {
                start,
                end,
                center: start + (end - start) / 2,
            }
        })
        .collect();
    PartitionScheme {
        k,
        path_len,
        partitions,
    }
}

/// Platoon centre per partition; `None` for small partitions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlatoonState {
    pub centers: Vec<Option<usize>>,
}

impl PlatoonState {
    pub fn at_centers(scheme: &PartitionScheme) -> Self {
        PlatoonState {
            centers: scheme
                .partitions
                .iter()
                .map(|p| (!p.is_small()).then_some(p.center))
                .collect(),
        }
    }

    pub fn is_centered(&self, scheme: &PartitionScheme) -> bool {
        *self == Self::at_centers(scheme)
    }

    pub fn validate(&self, scheme: &PartitionScheme) -> Result<(), PolicyError> {
        for (w, (p, c)) in scheme.partitions.iter().zip(&self.centers).enumerate() {
            match (p.is_small(), c) {
                (true, None) => {}
                (false, Some(l)) if p.center_range().contains(l) => {}
                _ => {
                    return Err(PolicyError::InvalidPlatoon {
                        partition: w,
                        center: c.unwrap_or(usize::MAX),
                    })
                }
            }
        }
        Ok(())
    }
}

/// `d^A - d^D`, or unobserved (compares above every finite value).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Advantage {
    Finite(i64),
    Unobserved,
}

impl Advantage {
    pub fn is_negative(self) -> bool {
        matches!(self, Advantage::Finite(a) if a < 0)
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Advantage::Finite(a) => Some(a),
            Advantage::Unobserved => None,
        }
    }
}

impl fmt::Display for Advantage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Advantage::Finite(a) => write!(f, "{a}"),
            Advantage::Unobserved => f.write_str("inf"),
        }
    }
}

impl Serialize for Advantage {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Advantage::Finite(a) => s.serialize_i64(*a),
            Advantage::Unobserved => s.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdvantageRow {
    pub i: usize,
    /// `None` when the attacker is unobserved.
    pub d_a: Option<u32>,
    pub d_d: u32,
    pub a: Advantage,
    pub in_frontier: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdvantageReport {
    pub rows: Vec<AdvantageRow>,
}

impl AdvantageReport {
    pub fn min(&self) -> Advantage {
        self.rows.iter().map(|r| r.a).min().unwrap_or(Advantage::Unobserved)
    }

    pub fn all_at_least(&self, bound: i64) -> bool {
        self.rows.iter().all(|r| r.a >= Advantage::Finite(bound))
    }

    pub fn frontier(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().filter(|r| r.in_frontier).map(|r| r.i)
    }
}

fn frontier_range(p: &Partition, l: usize) -> (usize, usize) {
    if l == p.center {
        // Both sides, so a centred platoon still reacts to either end.
        (p.start, p.end)
    } else if l - p.start < p.end - l {
        (p.start, l)
    } else {
        (l, p.end)
    }
}

/// Per-node advantages for one attacker group at `attacker` (or unobserved).
pub fn compute_advantages(
    env: &Environment,
    scheme: &PartitionScheme,
    platoons: &PlatoonState,
    attacker: Option<NodeId>,
) -> AdvantageReport {
    let g = env.graph();
    let mut rows = Vec::with_capacity(scheme.path_len);
    for (p, c) in scheme.partitions.iter().zip(&platoons.centers) {
        let frontier = c.map(|l| frontier_range(p, l));
        for i in p.start..=p.end {
            let d_a = attacker.map(|v| g.d(env.path().node(i), v));
            let d_d = c.map(|l| l.abs_diff(i) as u32).unwrap_or(0);
            let a = match d_a {
                Some(d) => Advantage::Finite(d as i64 - d_d as i64),
                None => Advantage::Unobserved,
            };
            let in_frontier = frontier.is_some_and(|(s, e)| (s..=e).contains(&i));
            rows.push(AdvantageRow {
                i,
                d_a,
                d_d,
                a,
                in_frontier,
            });
        }
    }
    AdvantageReport { rows }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum PartitionAction {
    Static,
    Recenter { from: usize, to: usize },
    Chase { toward: usize, from: usize, to: usize },
    Hold { at: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepResult {
    pub platoons: PlatoonState,
    pub actions: Vec<PartitionAction>,
    /// Advantages seen when the decision was made.
    pub report: AdvantageReport,
}

fn step_toward(from: usize, to: usize) -> usize {
    match to.cmp(&from) {
        Ordering::Greater => from + 1,
        Ordering::Less => from - 1,
        Ordering::Equal => from,
    }
}

/// One decision for every partition.
pub fn decide(
    env: &Environment,
    scheme: &PartitionScheme,
    platoons: &PlatoonState,
    attacker: Option<NodeId>,
) -> Result<StepResult, PolicyError> {
    let report = compute_advantages(env, scheme, platoons, attacker);
    let mut next = platoons.clone();
    let mut actions = Vec::with_capacity(scheme.partitions.len());
    for (w, p) in scheme.partitions.iter().enumerate() {
        let Some(l) = platoons.centers[w] else {
            actions.push(PartitionAction::Static);
            continue;
        };
        let rows = &report.rows[p.start..=p.end];
        let left_neg = rows.iter().any(|r| r.i < l && r.a.is_negative());
        let right_neg = rows.iter().any(|r| r.i > l && r.a.is_negative());
        if left_neg && right_neg {
            return Err(PolicyError::TwoSidedNegative {
                partition: w,
                platoon: l,
            });
        }
        let frontier_safe = rows
            .iter()
            .filter(|r| r.in_frontier)
            .all(|r| r.a > Advantage::Finite(0));
        let worst = rows
            .iter()
            .filter(|r| r.a.is_negative())
            .min_by_key(|r| (r.a, r.i));
        let action = if frontier_safe {
            let to = step_toward(l, p.center);
            PartitionAction::Recenter { from: l, to }
        } else if let Some(m) = worst {
            let range = p.center_range();
            let to = step_toward(l, m.i).clamp(*range.start(), *range.end());
            PartitionAction::Chase {
                toward: m.i,
                from: l,
                to,
            }
        } else {
            PartitionAction::Hold { at: l }
        };
        if let PartitionAction::Recenter { to, .. } | PartitionAction::Chase { to, .. } = action {
            next.centers[w] = Some(to);
        }
        actions.push(action);
    }
    Ok(StepResult {
        platoons: next,
        actions,
        report,
    })
}

/// How many unit slots each partition carries and with what weight.
///
/// A full budget puts weight 1 on every slot. A short budget fills slots
/// from the start node and leaves the shortfall at the target end; surplus
/// rides on the first slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deployment {
    /// Per partition: three platoon slot weights (offsets -1, 0, +1) or one
    /// weight per node for small partitions.
    pub weights: Vec<Vec<Amount>>,
}

impl Deployment {
    /// `ratio` is `X / Y`.
    pub fn from_ratio(scheme: &PartitionScheme, ratio: &Amount) -> Self {
        let mut left = ratio.clone();
        let mut weights = Vec::with_capacity(scheme.partitions.len());
        for p in &scheme.partitions {
            let slots = if p.is_small() { p.len() } else { 3 };
            let mut ws = Vec::with_capacity(slots);
            for _ in 0..slots {
                let w = if left >= Amount::one() {
                    Amount::one()
                } else {
                    left.clone()
                };
                left -= &w;
                ws.push(w);
            }
            weights.push(ws);
        }
        if left.is_positive() {
            weights[0][0] += left;
        }
        Deployment { weights }
    }

    pub fn total(&self) -> Amount {
        self.weights.iter().flatten().sum()
    }

    pub fn platoon_total(&self, scheme: &PartitionScheme) -> Amount {
        scheme
            .partitions
            .iter()
            .zip(&self.weights)
            .filter(|(p, _)| !p.is_small())
            .flat_map(|(_, w)| w)
            .sum()
    }
}

/// Test hook for negative controls of the verifier.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyVariant {
    #[default]
    Standard,
    /// Platoons never leave their centres.
    FrozenPlatoons,
}

/// The policy bound to one environment, sensing distance and budget.
#[derive(Debug, Clone)]
pub struct DefenderPolicy {
    env: Arc<Environment>,
    scheme: PartitionScheme,
    deployment: Deployment,
    variant: PolicyVariant,
}

impl DefenderPolicy {
    pub fn new(
        env: Arc<Environment>,
        k: u32,
        defender_total: &Amount,
        attacker_total: &Amount,
    ) -> Result<Self, PolicyError> {
        Self::with_variant(env, k, defender_total, attacker_total, PolicyVariant::Standard)
    }

    pub fn with_variant(
        env: Arc<Environment>,
        k: u32,
        defender_total: &Amount,
        attacker_total: &Amount,
        variant: PolicyVariant,
    ) -> Result<Self, PolicyError> {
        if !attacker_total.is_positive() {
            return Err(PolicyError::NonPositiveAttacker);
        }
        if !defender_total.is_positive() {
            return Err(PolicyError::NonPositiveDefender);
        }
        let scheme = build_partitions(env.path().len(), k);
        let deployment = Deployment::from_ratio(&scheme, &(defender_total / attacker_total));
        Ok(DefenderPolicy {
            env,
            scheme,
            deployment,
            variant,
        })
    }

    pub fn env(&self) -> &Arc<Environment> {
        &self.env
    }

    pub fn k(&self) -> u32 {
        self.scheme.k
    }

    pub fn scheme(&self) -> &PartitionScheme {
        &self.scheme
    }

    pub fn deployment(&self) -> &Deployment {
        &self.deployment
    }

    pub fn advantages(&self, platoons: &PlatoonState, attacker: Option<NodeId>) -> AdvantageReport {
        compute_advantages(&self.env, &self.scheme, platoons, attacker)
    }

    pub fn step(&self, platoons: &PlatoonState, attacker: Option<NodeId>) -> Result<StepResult, PolicyError> {
        let mut r = decide(&self.env, &self.scheme, platoons, attacker)?;
        if self.variant == PolicyVariant::FrozenPlatoons {
            r.platoons = platoons.clone();
        }
        Ok(r)
    }

    /// Starts at the centres and steps in virtual time until every advantage
    /// is at least -1. Returns the platoons and the number of steps taken.
    pub fn initialize(&self, attacker: Option<NodeId>) -> Result<(PlatoonState, usize), PolicyError> {
        let cap = 2 * self.scheme.path_len;
        let mut platoons = PlatoonState::at_centers(&self.scheme);
        let mut steps = 0;
        while !self.advantages(&platoons, attacker).all_at_least(-1) {
            if steps == cap {
                return Err(PolicyError::InitDidNotConverge(cap));
            }
            let next = self.step(&platoons, attacker)?.platoons;
            if next == platoons && self.variant == PolicyVariant::FrozenPlatoons {
                break;
            }
            platoons = next;
            steps += 1;
        }
        Ok((platoons, steps))
    }

    fn slot_nodes(&self, w: usize, center: Option<usize>) -> Vec<NodeId> {
        let p = &self.scheme.partitions[w];
        let path = self.env.path();
        match center {
            Some(l) => vec![path.node(l - 1), path.node(l), path.node(l + 1)],
            None => (p.start..=p.end).map(|i| path.node(i)).collect(),
        }
    }

    /// Platoon assets of one force of attacker-mass `mass`.
    pub fn platoon_distribution(&self, platoons: &PlatoonState, mass: &Amount) -> AssetDistribution {
        let mut d = AssetDistribution::zeros(self.env.node_count());
        for (w, c) in platoons.centers.iter().enumerate() {
            if c.is_none() {
                continue;
            }
            for (v, wt) in self.slot_nodes(w, *c).into_iter().zip(&self.deployment.weights[w]) {
                if !wt.is_zero() {
                    d.add(v, &(wt * mass));
                }
            }
        }
        d
    }

    /// Static small-partition assets for attacker total `mass`.
    pub fn static_distribution(&self, mass: &Amount) -> AssetDistribution {
        let mut d = AssetDistribution::zeros(self.env.node_count());
        for (w, p) in self.scheme.partitions.iter().enumerate() {
            if !p.is_small() {
                continue;
            }
            for (v, wt) in self.slot_nodes(w, None).into_iter().zip(&self.deployment.weights[w]) {
                if !wt.is_zero() {
                    d.add(v, &(wt * mass));
                }
            }
        }
        d
    }

    /// Flows moving one force from `before` to `after`: each slot shifts one
    /// hop along the path or stays.
    pub fn platoon_flows(&self, before: &PlatoonState, after: &PlatoonState, mass: &Amount) -> Vec<Flow> {
        let mut flows = Vec::new();
        for (w, (b, a)) in before.centers.iter().zip(&after.centers).enumerate() {
            if b.is_none() {
                continue;
            }
            let from = self.slot_nodes(w, *b);
            let to = self.slot_nodes(w, *a);
            for ((f, t), wt) in from.into_iter().zip(to).zip(&self.deployment.weights[w]) {
                if !wt.is_zero() {
                    flows.push(Flow::new(f, t, wt * mass));
                }
            }
        }
        flows
    }

    pub fn static_flows(&self, mass: &Amount) -> Vec<Flow> {
        self.static_distribution(mass)
            .nonzero()
            .map(|(v, a)| Flow::new(v, v, a.clone()))
            .collect()
    }
}

/// Single-group, unit-weight form of one policy step: the new platoon
/// centres and the move realising them (static assets stay).
pub fn defender_step(
    env: &Arc<Environment>,
    k: u32,
    platoons: &PlatoonState,
    attacker: Option<NodeId>,
) -> Result<(PlatoonState, MovePlan), PolicyError> {
    let units = int(required_units(env.path().len(), k) as i64);
    let policy = DefenderPolicy::new(env.clone(), k, &units, &int(1))?;
    let r = policy.step(platoons, attacker)?;
    let mut flows = policy.platoon_flows(platoons, &r.platoons, &int(1));
    flows.extend(policy.static_flows(&int(1)));
    Ok((r.platoons, MovePlan::new(flows).normalized()))
}
