use std::path::Path;
use std::sync::Arc;

use ddab_core::amount::int;
use ddab_core::corpus::{desk_corpus, CorpusEntry, EntryKind};
use ddab_core::engine::replay;
use ddab_core::env_file::load_environment;
use ddab_core::par::Exec;
use ddab_core::policy::{required_assets, required_units, PolicyVariant};
use ddab_core::trace::{to_jsonl, Record};
use ddab_core::verifier::{
    replay_breach, verify_necessity, verify_sufficiency, NecessityVerdict, Reentry, SufficiencyOptions, Verdict,
    VerifyError,
};
use serde::Serialize;

use crate::args::{CorpusKind, Global, ReentryArg, VariantArg, VerifyArgs};
use crate::{exit, plain, to_json_line, write_file, write_meta, CmdResult, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Sufficiency,
    Necessity,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictRow {
    pub name: String,
    pub check: Check,
    pub verdict: String,
    #[serde(rename = "X")]
    pub x: String,
    pub k: u32,
    pub path_len: usize,
    pub explored_states: Option<usize>,
    pub witness_trace_path: Option<String>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip)]
    pub witness: Option<Vec<Record>>,
    #[serde(skip)]
    pub inconclusive: bool,
}

impl VerdictRow {
    fn new(e: &CorpusEntry, check: Check, x: String) -> Self {
        VerdictRow {
            name: e.name.clone(),
            check,
            verdict: String::new(),
            x,
            k: e.k,
            path_len: e.env.path().len(),
            explored_states: None,
            witness_trace_path: None,
            pass: false,
            note: None,
            witness: None,
            inconclusive: false,
        }
    }

    fn failed(mut self, e: VerifyError) -> Self {
        self.inconclusive = matches!(e, VerifyError::Inconclusive { .. });
        self.verdict = if self.inconclusive { "INCONCLUSIVE" } else { "ERROR" }.into();
        self.note = Some(e.to_string());
        self
    }
}

fn verdict_name<T: Serialize>(v: T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

pub fn sufficiency_row(e: &CorpusEntry, opts: SufficiencyOptions) -> VerdictRow {
    let x = required_assets(e.env.path().len(), e.k, &int(1)).expect("nonempty path");
    let row = VerdictRow::new(e, Check::Sufficiency, plain(&x));
    let r = match verify_sufficiency(&e.env, e.k, &x, opts) {
        Ok(r) => r,
        Err(err) => return row.failed(err),
    };
    let mut row = VerdictRow {
        verdict: verdict_name(r.verdict),
        explored_states: Some(r.explored_states),
        pass: r.verdict == Verdict::SafeClosed && r.floor_violations == 0,
        ..row
    };
    if r.floor_violations > 0 {
        row.note = Some(format!("{} advantage floor violations", r.floor_violations));
    }
    if let Some(b) = &r.breach {
        match replay_breach(&e.env, e.k, &x, b) {
            Ok(o) => row.witness = Some(o.trace),
            Err(err) => row.note = Some(format!("witness replay failed: {err}")),
        }
    }
    row
}

/// Runs the gadget attack one unit below the bound and replays the
/// resulting trace.
pub fn necessity_row(e: &CorpusEntry) -> Option<VerdictRow> {
    let spec = e.gadget?;
    let x = required_units(spec.path_len, spec.k).saturating_sub(1) as i64;
    let row = VerdictRow::new(e, Check::Necessity, x.to_string());
    let r = match verify_necessity(spec, &int(x)) {
        Ok(r) => r,
        Err(err) => return Some(row.failed(err)),
    };
    let mut row = VerdictRow {
        verdict: verdict_name(r.verdict),
        ..row
    };
    if r.retargeted {
        row.note = Some("attack re-targeted to an uncovered window".into());
    }
    if let Some(out) = r.outcome {
        let replayed = replay(&out.trace);
        row.pass = r.verdict == NecessityVerdict::AttackerWins
            && matches!(&replayed, Ok(o) if o.result == out.result && o.win_step == out.win_step);
        if let Err(err) = replayed {
            row.note = Some(format!("witness does not replay: {err}"));
        }
        row.witness = Some(out.trace);
    }
    Some(row)
}

pub fn build_corpus(g: &Global, a: &VerifyArgs) -> Result<Vec<CorpusEntry>, Failure> {
    let mut corpus = match a.corpus {
        CorpusKind::Desk => desk_corpus(g.seed.unwrap_or(2024)),
        CorpusKind::None => Vec::new(),
    };
    for p in &a.envs {
        let env = load_environment(p).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?;
        let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("env");
        corpus.push(CorpusEntry {
            name: format!("file-{stem}-k{}", a.k),
            kind: EntryKind::Decorated,
            env: Arc::new(env),
            k: a.k,
            gadget: None,
        });
    }
    Ok(corpus)
}

pub fn run_corpus(corpus: &[CorpusEntry], a: &VerifyArgs, exec: Exec) -> Vec<VerdictRow> {
    let opts = SufficiencyOptions {
        budget: a.budget,
        reentry: match a.reentry {
            ReentryArg::Abstract => Reentry::Abstract,
            ReentryArg::Concrete => Reentry::Concrete,
        },
        exec: Exec::Sequential,
        variant: match a.variant {
            VariantArg::Standard => PolicyVariant::Standard,
            VariantArg::FrozenPlatoons => PolicyVariant::FrozenPlatoons,
        },
    };
    exec.map(corpus, |e| {
        let mut rows = vec![sufficiency_row(e, opts)];
        if a.variant == VariantArg::Standard {
            rows.extend(necessity_row(e));
        }
        rows
    })
    .into_iter()
    .flatten()
    .collect()
}

fn check_name(c: Check) -> &'static str {
    match c {
        Check::Sufficiency => "sufficiency",
        Check::Necessity => "necessity",
    }
}

pub fn cmd_verify(g: &Global, a: &VerifyArgs) -> CmdResult {
    let corpus = build_corpus(g, a)?;
    if corpus.is_empty() {
        return Err(Failure::usage("empty corpus: use --corpus desk or pass --env files"));
    }
    let mut rows = run_corpus(&corpus, a, Exec::from_jobs(g.jobs));
    let out: Option<&Path> = g.out.as_deref();
    let mut lines = String::new();
    for r in &mut rows {
        if let (Some(dir), Some(w)) = (out, &r.witness) {
            let rel = format!("witnesses/{}-{}.jsonl", r.name, check_name(r.check));
            write_file(&dir.join(&rel), to_jsonl(w).as_bytes())?;
            r.witness_trace_path = Some(rel);
        }
        lines.push_str(&to_json_line(r));
    }
    let failed: Vec<&VerdictRow> = rows.iter().filter(|r| !r.pass && !r.inconclusive).collect();
    let inconclusive: Vec<&str> = rows.iter().filter(|r| r.inconclusive).map(|r| r.name.as_str()).collect();
    let summary = serde_json::json!({
        "instances": corpus.len(),
        "checks": rows.len(),
        "passed": rows.iter().filter(|r| r.pass).count(),
        "failed": failed.iter().map(|r| format!("{}:{}", r.name, check_name(r.check))).collect::<Vec<_>>(),
        "inconclusive": inconclusive,
    });
    match out {
        Some(dir) => {
            write_file(&dir.join("verdicts.jsonl"), lines.as_bytes())?;
            write_file(&dir.join("summary.json"), format!("{summary:#}\n").as_bytes())?;
            write_meta(
                dir,
                "verify",
                serde_json::json!({"seed": g.seed, "jobs": g.jobs, "budget": a.budget}),
            )?;
        }
        None => print!("{lines}"),
    }
    eprintln!("{summary}");
    Ok(if !failed.is_empty() {
        exit::BRACKET_FAILED
    } else if !inconclusive.is_empty() {
        exit::INCONCLUSIVE
    } else {
        exit::OK
    })
}
