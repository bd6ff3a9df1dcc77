//! Observation-driven defender: one policy sub-force per attacker group.
//!
//! A single attacker is guarded by one force. When the attacker splits, each
//! group seen inside the visibility region gets its own force, carved out of
//! the force of its nearest ancestor label in proportion to mass, and the
//! sub-forces play independent copies of the policy. Mass of groups that are
//! not visible stays with the ancestor force, which sees no attacker and
//! recentres. Static small-partition assets are never split.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::amount::{format_amount, Amount};
use crate::graph::NodeId;
use crate::policy::{AdvantageReport, DefenderPolicy, PartitionAction, PlatoonState, PolicyError};
use crate::state::{AssetDistribution, GroupLabel, MovePlan, Observation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ControllerError {
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("observed group {0} has no force to bind to")]
    Unbound(String),
    #[error("group {label} has mass {group} but its ancestor force only {force}")]
    MassExceeded {
        label: String,
        group: String,
        force: String,
    },
    #[error("controller used before initialization")]
    Uninitialized,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Force {
    /// Attacker mass this force answers for.
    pub mass: Amount,
    pub platoons: PlatoonState,
}

/// Why one force moved the way it did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForceDecision {
    pub label: GroupLabel,
    pub mass: Amount,
    pub attacker: Option<NodeId>,
    pub before: PlatoonState,
    pub after: PlatoonState,
    pub actions: Vec<PartitionAction>,
    /// Advantages the decision was based on.
    pub pre: AdvantageReport,
    /// Advantages after the move, same attacker position.
    pub post: AdvantageReport,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefenderDecision {
    pub plan: MovePlan,
    pub forces: Vec<ForceDecision>,
}

#[derive(Debug, Clone)]
pub struct DefenderController {
    policy: DefenderPolicy,
    attacker_total: Amount,
    forces: BTreeMap<GroupLabel, Force>,
    static_mass: Amount,
}

impl DefenderController {
    pub fn new(policy: DefenderPolicy, attacker_total: Amount) -> Self {
        DefenderController {
            policy,
            static_mass: attacker_total.clone(),
            attacker_total,
            forces: BTreeMap::new(),
        }
    }

    pub fn policy(&self) -> &DefenderPolicy {
        &self.policy
    }

    pub fn forces(&self) -> &BTreeMap<GroupLabel, Force> {
        &self.forces
    }

    /// Initial placement from the first observation. Returns the number of
    /// virtual steps the initialization took.
    pub fn initialize(&mut self, obs: &Observation) -> Result<usize, ControllerError> {
        let root = GroupLabel::root();
        let (platoons, steps) = self.policy.initialize(obs.group_node(&root))?;
        self.forces.clear();
        self.forces.insert(
            root,
            Force {
                mass: self.attacker_total.clone(),
                platoons,
            },
        );
        Ok(steps)
    }

    /// Gives every visible group a force of its own.
    fn bind(&mut self, obs: &Observation) -> Result<(), ControllerError> {
        for g in &obs.groups {
            if self.forces.contains_key(&g.label) {
                continue;
            }
            let parent = self
                .forces
                .keys()
                .filter(|l| l.is_ancestor_of(&g.label))
                .max_by_key(|l| l.as_str().len())
                .cloned()
                .ok_or_else(|| ControllerError::Unbound(g.label.to_string()))?;
            let pf = self.forces.get_mut(&parent).expect("parent force");
            if pf.mass < g.amount {
                return Err(ControllerError::MassExceeded {
                    label: g.label.to_string(),
                    group: format_amount(&g.amount),
                    force: format_amount(&pf.mass),
                });
            }
            pf.mass -= &g.amount;
            let child = Force {
                mass: g.amount.clone(),
                platoons: pf.platoons.clone(),
            };
            tracing::debug!(group = %g.label, from = %parent, "force split");
            self.forces.insert(g.label.clone(), child);
        }
        self.forces.retain(|_, f| f.mass.is_positive());
        Ok(())
    }

    /// One defender action. Reads nothing but `obs`.
    pub fn act(&mut self, obs: &Observation) -> Result<DefenderDecision, ControllerError> {
        if self.forces.is_empty() {
            return Err(ControllerError::Uninitialized);
        }
        self.bind(obs)?;
        let mut flows = self.policy.static_flows(&self.static_mass);
        let mut decisions = Vec::with_capacity(self.forces.len());
        for (label, force) in self.forces.iter_mut() {
            let attacker = obs.group_node(label);
            let step = self.policy.step(&force.platoons, attacker)?;
            flows.extend(self.policy.platoon_flows(&force.platoons, &step.platoons, &force.mass));
            let post = self.policy.advantages(&step.platoons, attacker);
            decisions.push(ForceDecision {
                label: label.clone(),
                mass: force.mass.clone(),
                attacker,
                before: force.platoons.clone(),
                after: step.platoons.clone(),
                actions: step.actions,
                pre: step.report,
                post,
            });
            force.platoons = step.platoons;
        }
        Ok(DefenderDecision {
            plan: MovePlan::new(flows).normalized(),
            forces: decisions,
        })
    }

    /// Sum of all forces plus static assets.
    pub fn distribution(&self) -> AssetDistribution {
        let mut d = self.policy.static_distribution(&self.static_mass);
        for f in self.forces.values() {
            for (v, a) in self.policy.platoon_distribution(&f.platoons, &f.mass).nonzero() {
                d.add(v, a);
            }
        }
        d
    }

    /// Each force's own platoon assets, keyed by group label.
    pub fn force_distributions(&self) -> Vec<(GroupLabel, AssetDistribution)> {
        self.forces
            .iter()
            .map(|(l, f)| (l.clone(), self.policy.platoon_distribution(&f.platoons, &f.mass)))
            .collect()
    }

    pub fn static_distribution(&self) -> AssetDistribution {
        self.policy.static_distribution(&self.static_mass)
    }

    pub fn platoon_centers(&self) -> Vec<(GroupLabel, Amount, PlatoonState)> {
        self.forces
            .iter()
            .map(|(l, f)| (l.clone(), f.mass.clone(), f.platoons.clone()))
            .collect()
    }

    pub fn total_force_mass(&self) -> Amount {
        self.forces.values().map(|f| &f.mass).sum()
    }

    /// True when every force's mass is zero-free and they add up to `Y`.
    pub fn is_consistent(&self) -> bool {
        self.forces.values().all(|f| !f.mass.is_zero()) && self.total_force_mass() == self.attacker_total
    }
}
