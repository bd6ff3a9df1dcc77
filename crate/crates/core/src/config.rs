//! JSON run configuration.
//!
//! ```json
//! {
//!   "environment": "envs/demo.json",
//!   "k": 1,
//!   "defender_total": "15",
//!   "attacker_total": "1",
//!   "attacker_start": "b3",
//!   "strategy": {"kind": "random", "seed": 7, "split_probability": 0.2},
//!   "mode": "subgames"
//! }
//! ```
//!
//! `environment` is a path relative to the config file or an inline
//! environment object. `defender_total` defaults to the bound.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{gadget_attack_plan, AttackerStrategy, External, Greedy, RandomParams, RandomWalk, ScriptFlow, Scripted};
use crate::amount::{int, parse_amount, Amount};
use crate::engine::{default_max_steps, GameConfig, Mode};
use crate::env_file::{load_environment, EnvFile, LoadError};
use crate::graph::Environment;
use crate::policy::{required_assets, PolicyVariant};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("environment: {0}")]
    Env(#[from] LoadError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnvSource {
    File(String),
    Inline(EnvFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategySpec {
    #[default]
    Stay,
    Scripted {
        turns: Vec<Vec<ScriptFlow>>,
    },
    Random {
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        split_probability: f64,
        #[serde(default)]
        toward_path: Option<f64>,
        #[serde(default)]
        max_groups: Option<usize>,
    },
    Greedy,
    /// `alpha` is the 0-based path index of the middle target.
    Gadget {
        alpha: usize,
        #[serde(default)]
        wait: usize,
    },
    External,
}

impl StrategySpec {
    /// `seed` overrides a random strategy's own seed.
    pub fn build(&self, env: &Environment, k: u32, seed: Option<u64>) -> Result<Box<dyn AttackerStrategy>, ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        Ok(match self {
            StrategySpec::Stay => Box::new(Scripted::new(env, &[]).map_err(|e| invalid(&e))?),
            StrategySpec::Scripted { turns } => Box::new(Scripted::new(env, turns).map_err(|e| invalid(&e))?),
            StrategySpec::Random {
                seed: own,
                split_probability,
                toward_path,
                max_groups,
            } => {
                if !(0.0..=1.0).contains(split_probability) {
                    return Err(ConfigError::Invalid("split_probability must be in [0, 1]".into()));
                }
                let mut p = RandomParams::new(seed.or(*own).unwrap_or(0));
                p.split_probability = *split_probability;
                if let Some(t) = toward_path {
                    p.toward_path = t.clamp(0.0, 1.0);
                }
                if let Some(m) = max_groups {
                    p.max_groups = (*m).max(1);
                }
                Box::new(RandomWalk::new(p))
            }
            StrategySpec::Greedy => Box::new(Greedy),
            StrategySpec::Gadget { alpha, wait } => Box::new(gadget_attack_plan(env, k, *alpha, *wait).map_err(|e| invalid(&e))?),
            StrategySpec::External => Box::new(External::default()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    #[default]
    Single,
    Subgames,
}

impl From<RunMode> for Mode {
    fn from(m: RunMode) -> Mode {
        match m {
            RunMode::Single => Mode::Single,
            RunMode::Subgames => Mode::Subgames,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub environment: EnvSource,
    pub k: u32,
    #[serde(default)]
    pub defender_total: Option<String>,
    #[serde(default)]
    pub attacker_total: Option<String>,
    pub attacker_start: String,
    #[serde(default)]
    pub strategy: StrategySpec,
    #[serde(default)]
    pub max_steps: Option<u64>,
    #[serde(default)]
    pub mode: RunMode,
    #[serde(default)]
    pub trace_advantages: bool,
    #[serde(default)]
    pub variant: PolicyVariant,
    /// Free-form expectations for scenario goldens; ignored by the engine.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<serde_json::Value>,
}

pub struct ResolvedRun {
    pub config: RunConfig,
    pub game: GameConfig,
    pub mode: Mode,
    pub strategy: Box<dyn AttackerStrategy>,
}

fn amount_field(name: &str, s: &str) -> Result<Amount, ConfigError> {
    parse_amount(s).map_err(|e| ConfigError::Invalid(format!("{name}: {e}")))
}

impl RunConfig {
    pub fn parse(src: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(src)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&src)
    }

    pub fn environment(&self, base: &Path) -> Result<Environment, ConfigError> {
        Ok(match &self.environment {
            EnvSource::File(f) => {
                let p: PathBuf = base.join(f);
                load_environment(&p)?
            }
            EnvSource::Inline(e) => e.clone().into_environment(None)?,
        })
    }

    /// `base` resolves a relative environment path; `seed` overrides the
    /// strategy seed.
    pub fn resolve(self, base: &Path, seed: Option<u64>) -> Result<ResolvedRun, ConfigError> {
        let env = Arc::new(self.environment(base)?);
        let y = match &self.attacker_total {
            Some(s) => amount_field("attacker_total", s)?,
            None => int(1),
        };
        let x = match &self.defender_total {
            Some(s) => amount_field("defender_total", s)?,
            None => required_assets(env.path().len(), self.k, &y).map_err(|e| ConfigError::Invalid(e.to_string()))?,
        };
        let start = env
            .graph()
            .id(&self.attacker_start)
            .map_err(|_| ConfigError::Invalid(format!("attacker_start {:?} is not a node", self.attacker_start)))?;
        let mut game = GameConfig::new(env.clone(), self.k, x, y, start);
        game.max_steps = self.max_steps.unwrap_or_else(|| default_max_steps(&env));
        game.record_advantages = self.trace_advantages;
        game.variant = self.variant;
        let strategy = self.strategy.build(&env, self.k, seed)?;
        Ok(ResolvedRun {
            mode: self.mode.into(),
            config: self,
            game,
            strategy,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CFG: &str = r#"{
        "environment": {"nodes": ["p1","p2","p3","u"], "edges": [["p1","p2"],["p2","p3"],["u","p2"]], "path": ["p1","p2","p3"]},
        "k": 0,
        "attacker_start": "u",
        "strategy": {"kind": "random", "seed": 3}
    }"#;

    #[test]
    fn defaults_to_bound() {
        let r = RunConfig::parse(CFG).unwrap().resolve(Path::new("."), None).unwrap();
        assert_eq!(r.game.defender_total, int(3));
        assert_eq!(r.game.attacker_total, int(1));
        assert_eq!(r.mode, Mode::Single);
        assert_eq!(r.strategy.name(), "random");
    }

    #[test]
    fn rejects_bad_fields() {
        assert!(matches!(RunConfig::parse(&CFG.replace("\"k\"", "\"kk\"")), Err(ConfigError::Json(_))));
        let bad_start = CFG.replace("\"attacker_start\": \"u\"", "\"attacker_start\": \"zz\"");
        assert!(matches!(
            RunConfig::parse(&bad_start).unwrap().resolve(Path::new("."), None),
            Err(ConfigError::Invalid(_))
        ));
    }
}
