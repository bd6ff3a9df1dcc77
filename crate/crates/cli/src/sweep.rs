//! Parameter sweeps over gadget environments.

use std::str::FromStr;

use ddab_core::adversary::{gadget_attack_plan, AttackerStrategy, Greedy, RandomParams, RandomWalk};
use ddab_core::amount::int;
use ddab_core::engine::{run_game, GameConfig};
use ddab_core::par::Exec;
use ddab_core::policy::required_units;
use ddab_core::verifier::{build_gadget, GadgetSpec};
use serde::{Deserialize, Serialize};

use crate::args::{Global, SweepArgs};
use crate::{emit, exit, write_file, write_meta, CmdResult, Failure};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XRule {
    Eq9,
    Eq9Minus1,
    Explicit(Vec<u64>),
}

impl FromStr for XRule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "eq9" => Ok(XRule::Eq9),
            "eq9-minus-1" | "eq9_minus_1" => Ok(XRule::Eq9Minus1),
            list => list
                .split(',')
                .map(|t| t.trim().parse::<u64>().map_err(|e| format!("budget {t:?}: {e}")))
                .collect::<Result<Vec<_>, _>>()
                .map(XRule::Explicit),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepStrategy {
    Random,
    Greedy,
    Gadget,
}

impl FromStr for SweepStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "random" => Ok(SweepStrategy::Random),
            "greedy" => Ok(SweepStrategy::Greedy),
            "gadget" => Ok(SweepStrategy::Gadget),
            other => Err(format!("unknown strategy {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub path_len: usize,
    pub k_min: u32,
    pub k_max: u32,
    pub x_rule: XRule,
    pub strategies: Vec<SweepStrategy>,
    /// Seeds `base .. base + seeds` for randomized strategies.
    pub seeds: u64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub split_probability: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            path_len: 9,
            k_min: 0,
            k_max: 2,
            x_rule: XRule::Eq9,
            strategies: vec![SweepStrategy::Random, SweepStrategy::Greedy, SweepStrategy::Gadget],
            seeds: 16,
            base_seed: 0,
            split_probability: 0.0,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.path_len < 3 {
            return Err("path_len must be at least 3".into());
        }
        if self.k_min > self.k_max {
            return Err("k range is empty".into());
        }
        if self.strategies.is_empty() || self.seeds == 0 {
            return Err("strategies and seeds must be nonempty".into());
        }
        if matches!(&self.x_rule, XRule::Explicit(v) if v.is_empty()) {
            return Err("budget list is empty".into());
        }
        if !(0.0..=1.0).contains(&self.split_probability) {
            return Err("split_probability must be in [0, 1]".into());
        }
        Ok(())
    }

    fn budgets(&self, k: u32) -> Vec<u64> {
        let b = required_units(self.path_len, k);
        match &self.x_rule {
            XRule::Eq9 => vec![b],
            XRule::Eq9Minus1 => vec![b.saturating_sub(1)],
            XRule::Explicit(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone)]
struct Job {
    k: u32,
    x: u64,
    strategy: SweepStrategy,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub path_len: usize,
    pub k: u32,
    #[serde(rename = "X")]
    pub x: u64,
    pub strategy: SweepStrategy,
    pub seed: Option<u64>,
    pub result: String,
    pub win_step: Option<u64>,
    pub steps: u64,
}

fn jobs(spec: &SweepSpec) -> Vec<Job> {
    let mut out = Vec::new();
    for k in spec.k_min..=spec.k_max {
        for x in spec.budgets(k) {
            for &strategy in &spec.strategies {
                match strategy {
                    SweepStrategy::Random => out.extend((0..spec.seeds).map(|s| Job {
                        k,
                        x,
                        strategy,
                        seed: Some(spec.base_seed + s),
                    })),
                    _ => out.push(Job {
                        k,
                        x,
                        strategy,
                        seed: None,
                    }),
                }
            }
        }
    }
    out
}

fn play(spec: &SweepSpec, job: &Job) -> SweepRow {
    let mut row = SweepRow {
        path_len: spec.path_len,
        k: job.k,
        x: job.x,
        strategy: job.strategy,
        seed: job.seed,
        result: String::new(),
        win_step: None,
        steps: 0,
    };
    let gspec = GadgetSpec::new(spec.path_len, job.k, spec.path_len / 2);
    let gadget = match build_gadget(gspec) {
        Ok(g) => g,
        Err(e) => {
            row.result = format!("ERROR: {e}");
            return row;
        }
    };
    let mut strategy: Box<dyn AttackerStrategy> = match job.strategy {
        SweepStrategy::Random => {
            let mut p = RandomParams::new(job.seed.unwrap_or(0));
            p.split_probability = spec.split_probability;
            Box::new(RandomWalk::new(p))
        }
        SweepStrategy::Greedy => Box::new(Greedy),
        SweepStrategy::Gadget => match gadget_attack_plan(&gadget.env, job.k, gspec.alpha, 0) {
            Ok(a) => Box::new(a),
            Err(e) => {
                row.result = format!("ERROR: {e}");
                return row;
            }
        },
    };
    let cfg = GameConfig::new(gadget.env.clone(), job.k, int(job.x as i64), int(1), gadget.staging);
    let played = if spec.split_probability > 0.0 {
        ddab_core::engine::run_parallel_subgames(cfg, strategy.as_mut())
    } else {
        run_game(cfg, strategy.as_mut())
    };
    match played {
        Ok(o) => {
            row.result = serde_json::to_value(o.result)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            row.win_step = o.win_step;
            row.steps = o.steps;
        }
        Err(e) => row.result = format!("ERROR: {e}"),
    }
    row
}

pub fn run_sweep(spec: &SweepSpec, exec: Exec) -> Vec<SweepRow> {
    exec.map(&jobs(spec), |j| play(spec, j))
}

pub fn rows_csv(rows: &[SweepRow]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Failure::new(exit::IO, e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::new(exit::IO, e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn resolve_spec(g: &Global, a: &SweepArgs) -> Result<SweepSpec, Failure> {
    let mut spec = match &g.config {
        Some(p) => {
            let src = std::fs::read_to_string(p).map_err(|e| Failure::io(p, e))?;
            serde_json::from_str(&src).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?
        }
        None => SweepSpec::default(),
    };
    if let Some(n) = a.path_len {
        spec.path_len = n;
    }
    if let Some(k) = a.k_min {
        spec.k_min = k;
    }
    if let Some(k) = a.k_max {
        spec.k_max = k;
    }
    if let Some(r) = &a.x_rule {
        spec.x_rule = r.parse().map_err(Failure::usage)?;
    }
    if let Some(s) = &a.strategies {
        spec.strategies = s
            .split(',')
            .map(str::parse)
            .collect::<Result<_, String>>()
            .map_err(Failure::usage)?;
    }
    if let Some(n) = a.seeds {
        spec.seeds = n;
    }
    if let Some(s) = g.seed {
        spec.base_seed = s;
    }
    spec.validate().map_err(Failure::usage)?;
    Ok(spec)
}

/// Writes `sweep.csv` (and `meta.json`) into `--out`, or CSV to stdout.
pub fn cmd_sweep(g: &Global, a: &SweepArgs) -> CmdResult {
    let spec = resolve_spec(g, a)?;
    let rows = run_sweep(&spec, Exec::from_jobs(g.jobs));
    let csv = rows_csv(&rows)?;
    match &g.out {
        Some(dir) => {
            write_file(&dir.join("sweep.csv"), csv.as_bytes())?;
            write_meta(dir, "sweep", serde_json::to_value(&spec).expect("spec serializes"))?;
        }
        None => emit(None, csv.as_bytes())?,
    }
    Ok(exit::OK)
}
