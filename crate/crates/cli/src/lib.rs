//! `ddab` command implementations. Every command returns a process exit
//! code; data artifacts carry no timestamps (those go to `meta.json`).

pub mod args;
pub mod sweep;
pub mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ddab_core::amount::{format_amount, is_integer, parse_amount, Amount};
use ddab_core::config::RunConfig;
use ddab_core::engine::{replay as replay_trace, Game, GameOutcome};
use ddab_core::env_file::EnvFile;
use ddab_core::policy::required_assets;
use ddab_core::trace::{from_jsonl, to_jsonl, GameResult};
use ddab_core::verifier::{build_gadget, GadgetSpec};
use serde::Serialize;

use args::{BoundTableArgs, Cli, Command, GadgetArgs, Global, ReplayArgs, ServeArgs};

pub mod exit {
    pub const OK: i32 = 0;
    pub const BRACKET_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const INCONCLUSIVE: i32 = 3;
    pub const ENGINE: i32 = 4;
    pub const CORRUPT_TRACE: i32 = 5;
    pub const IO: i32 = 6;
    pub const ATTACKER_WIN: i32 = 10;
}

/// Error carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Failure::new(exit::USAGE, message)
    }

    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Failure::new(exit::IO, format!("{}: {e}", path.display()))
    }
}

pub type CmdResult = Result<i32, Failure>;

pub fn execute(cli: Cli) -> i32 {
    let g = &cli.global;
    let r = match &cli.command {
        Command::Run => cmd_run(g),
        Command::BoundTable(a) => cmd_bound_table(g, a),
        Command::Verify(a) => verify::cmd_verify(g, a),
        Command::GadgetGen(a) => cmd_gadget_gen(g, a),
        Command::Replay(a) => cmd_replay(g, a),
        Command::Serve(a) => cmd_serve(a),
        Command::Sweep(a) => sweep::cmd_sweep(g, a),
    };
    match r {
        Ok(code) => code,
        Err(f) => {
            eprintln!("ddab: {}", f.message);
            f.code
        }
    }
}

/// Integers print bare, everything else as `num/den`.
pub fn plain(a: &Amount) -> String {
    if is_integer(a) {
        a.to_integer().to_string()
    } else {
        format_amount(a)
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Failure::io(path, e))
}

/// Writes to `out` if given, else stdout.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(p) => write_file(p, bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::new(exit::IO, format!("stdout: {e}"))),
    }
}

/// Run metadata kept apart from the data so the data stays reproducible.
pub fn write_meta(dir: &Path, command: &str, extra: serde_json::Value) -> Result<(), Failure> {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = serde_json::json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "unix_time": secs,
        "parallel": cfg!(feature = "parallel"),
        "params": extra,
    });
    write_file(&dir.join("meta.json"), format!("{meta:#}\n").as_bytes())
}

pub fn to_json_line<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("serializable");
    s.push('\n');
    s
}

#[derive(Debug, Serialize)]
pub struct OutcomeSummary {
    pub result: GameResult,
    pub win_step: Option<u64>,
    pub witness: Option<String>,
    pub steps: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_path: Option<String>,
}

impl OutcomeSummary {
    pub fn new(o: &GameOutcome, env: &ddab_core::graph::Environment, trace_path: Option<&Path>) -> Self {
        OutcomeSummary {
            result: o.result,
            win_step: o.win_step,
            witness: o.witness.map(|w| env.graph().name(w).to_string()),
            steps: o.steps,
            trace_path: trace_path.map(|p| p.display().to_string()),
        }
    }
}

pub fn cmd_run(g: &Global) -> CmdResult {
    let path = g.config.as_ref().ok_or_else(|| Failure::usage("run needs --config"))?;
    let cfg = RunConfig::load(path).map_err(|e| Failure::usage(e.to_string()))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let mut resolved = cfg.resolve(&base, g.seed).map_err(|e| Failure::usage(e.to_string()))?;
    resolved.game.record_advantages |= g.trace_advantages;
    let env = resolved.game.env.clone();
    let name = resolved.strategy.name().to_string();
    let game = Game::new(resolved.game, resolved.mode, &name).map_err(|e| Failure::usage(e.to_string()))?;
    let outcome = game
        .run(resolved.strategy.as_mut())
        .map_err(|e| Failure::new(exit::ENGINE, e.to_string()))?;
    if let Some(out) = &g.out {
        write_file(out, to_jsonl(&outcome.trace).as_bytes())?;
    }
    let summary = OutcomeSummary::new(&outcome, &env, g.out.as_deref());
    print!("{}", to_json_line(&summary));
    Ok(if outcome.result.is_defended() {
        exit::OK
    } else {
        exit::ATTACKER_WIN
    })
}

#[derive(Debug, Serialize)]
struct BoundRow {
    k: u32,
    required_assets: String,
    annotation: &'static str,
}

/// Rows for k = 0..=k_max. The first k at which the budget reaches its
/// floor of three attacker masses is marked as the start of saturation.
pub fn bound_table_csv(path_len: usize, k_max: u32, attacker_total: &Amount) -> Result<String, Failure> {
    if path_len < 3 {
        return Err(Failure::usage("path length must be at least 3"));
    }
    let floor = attacker_total * Amount::from_integer(3.into());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut saturated = false;
    for k in 0..=k_max {
        let x = required_assets(path_len, k, attacker_total).map_err(|e| Failure::usage(e.to_string()))?;
        let annotation = if x == floor && !saturated {
            saturated = true;
            "saturation: k >= |P|/2 region"
        } else if saturated {
            "saturated"
        } else {
            ""
        };
        w.serialize(BoundRow {
            k,
            required_assets: plain(&x),
            annotation,
        })
        .map_err(|e| Failure::new(exit::IO, e.to_string()))?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Failure::new(exit::IO, e.to_string()))?).expect("csv is utf-8"))
}

pub fn cmd_bound_table(g: &Global, a: &BoundTableArgs) -> CmdResult {
    let y = parse_amount(&a.attacker_total).map_err(|e| Failure::usage(format!("--attacker-total: {e}")))?;
    let csv = bound_table_csv(a.path_len, a.k_max, &y)?;
    emit(g.out.as_deref(), csv.as_bytes())?;
    Ok(exit::OK)
}

pub fn cmd_gadget_gen(g: &Global, a: &GadgetArgs) -> CmdResult {
    let spec = GadgetSpec {
        entry_chain_len: a.chain_len,
        ring: a.ring,
        ..GadgetSpec::new(a.path_len, a.k, a.alpha.unwrap_or(a.path_len / 2))
    };
    let gadget = build_gadget(spec).map_err(|e| Failure::usage(e.to_string()))?;
    let mut json = EnvFile::from_environment(&gadget.env).to_json_pretty();
    json.push('\n');
    emit(g.out.as_deref(), json.as_bytes())?;
    eprintln!(
        "hub {} staging {}",
        gadget.env.graph().name(gadget.xi),
        gadget.env.graph().name(gadget.staging)
    );
    Ok(exit::OK)
}

pub fn cmd_replay(g: &Global, a: &ReplayArgs) -> CmdResult {
    let src = fs::read_to_string(&a.trace).map_err(|e| Failure::io(&a.trace, e))?;
    let records = from_jsonl(&src).map_err(|e| Failure::new(exit::CORRUPT_TRACE, e.to_string()))?;
    let outcome = replay_trace(&records).map_err(|e| Failure::new(exit::CORRUPT_TRACE, e.to_string()))?;
    let env = match records.first() {
        Some(ddab_core::trace::Record::Header(h)) => h.env.clone().into_environment(None),
        _ => unreachable!("replay checked the header"),
    }
    .map_err(|e| Failure::new(exit::CORRUPT_TRACE, e.to_string()))?;
    let summary = OutcomeSummary::new(&outcome, &Arc::new(env), None);
    emit(g.out.as_deref(), to_json_line(&summary).as_bytes())?;
    Ok(exit::OK)
}

pub fn cmd_serve(a: &ServeArgs) -> CmdResult {
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::new(exit::IO, e.to_string()))?;
    rt.block_on(ddab_server::serve(a.addr, a.static_dir.clone()))
        .map_err(|e| Failure::new(exit::IO, format!("serve: {e}")))?;
    Ok(exit::OK)
}
