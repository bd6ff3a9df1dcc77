use ddab_core::adversary::ScriptFlow;
use ddab_core::amount::int;
use ddab_core::env_file::EnvFile;
use ddab_core::state::Phase;
use ddab_core::trace::{from_jsonl, GameResult, Record};
use ddab_core::verifier::{verify_necessity, GadgetSpec};
use ddab_server::protocol::{ClientMessage, ServerMessage, SessionConfig, SessionEnv, StateView};
use ddab_server::{replay_log, Sessions};

fn demo(fractional: bool) -> SessionConfig {
    SessionConfig {
        environment: SessionEnv::Builtin("demo".into()),
        k: 1,
        defender_total: None,
        attacker_total: None,
        attacker_start: "b3".into(),
        fractional,
        max_steps: None,
    }
}

fn mv(from: &str, to: &str) -> ScriptFlow {
    ScriptFlow {
        from: from.into(),
        to: to.into(),
        amount: None,
        group: None,
    }
}

fn state(m: ServerMessage) -> StateView {
    match m {
        ServerMessage::State(v) => *v,
        other => panic!("expected state, got {other:?}"),
    }
}

#[test]
fn new_session_reports_bound_and_moves() {
    let s = Sessions::default();
    let v = state(s.handle(&ClientMessage::New { config: demo(false) }));
    assert_eq!(v.required, "15/1");
    assert!(!v.no_guarantee);
    assert_eq!(v.legal_moves.len(), 1);
    assert_eq!(v.legal_moves[0].to, vec!["b3", "b2"]);
    assert!(v.legal_moves[0].split_shares.is_empty());
    assert!(v.visibility.contains(&"x2".to_string()) && !v.visibility.contains(&"b3".to_string()));
    assert!(v.outcome.is_none());
}

#[test]
fn illegal_move_leaves_state_unchanged() {
    let s = Sessions::default();
    let v = state(s.handle(&ClientMessage::New { config: demo(false) }));
    let id = v.session;
    let before = s.handle(&ClientMessage::Export { session: id });
    let bad = [
        vec![mv("b3", "x2")],
        vec![mv("b2", "b1")],
        vec![mv("nowhere", "b2")],
        vec![ScriptFlow {
            amount: Some("1/2".into()),
            ..mv("b3", "b2")
        }],
    ];
    for flows in bad {
        let r = s.handle(&ClientMessage::Move { session: id, flows });
        assert!(matches!(r, ServerMessage::Error { session: Some(x), .. } if x == id), "{r:?}");
    }
    assert_eq!(s.handle(&ClientMessage::Export { session: id }), before);
    let v = state(s.handle(&ClientMessage::Move {
        session: id,
        flows: vec![mv("b3", "b2")],
    }));
    assert_eq!(v.attacker_amounts.get("b2").map(String::as_str), Some("1/1"));
    assert_eq!(v.attacker_flows.len(), 1);
}

#[test]
fn fractional_split_gives_two_groups() {
    let s = Sessions::default();
    let id = state(s.handle(&ClientMessage::New { config: demo(true) })).session;
    let v = state(s.handle(&ClientMessage::Move {
        session: id,
        flows: vec![ScriptFlow {
            amount: Some("3/10".into()),
            ..mv("b3", "b2")
        }],
    }));
    assert_eq!(v.groups.len(), 2);
    assert_eq!(v.legal_moves[0].split_shares.len(), 5);
    let bad = s.handle(&ClientMessage::Move {
        session: id,
        flows: vec![ScriptFlow {
            amount: Some("1/3".into()),
            group: Some(v.groups[0].label.clone()),
            ..mv(&v.groups[0].node, &v.groups[0].node)
        }],
    });
    assert!(matches!(bad, ServerMessage::Error { .. }));
}

#[test]
fn log_replay_is_deterministic() {
    let log = vec![
        ClientMessage::New { config: demo(true) },
        ClientMessage::Move {
            session: 1,
            flows: vec![ScriptFlow {
                amount: Some("1/2".into()),
                ..mv("b3", "b2")
            }],
        },
        ClientMessage::Move {
            session: 1,
            flows: vec![mv("b3", "b2")],
        },
        ClientMessage::Move {
            session: 1,
            flows: vec![mv("b2", "b1")],
        },
        ClientMessage::Move {
            session: 7,
            flows: vec![],
        },
        ClientMessage::Export { session: 1 },
    ];
    let a = replay_log(&log);
    let b = replay_log(&log);
    assert_eq!(a, b);
    assert!(matches!(&a[4], ServerMessage::Error { reason, .. } if reason.contains("not found")));
    let ServerMessage::Trace { jsonl, .. } = &a[5] else { panic!() };
    assert!(from_jsonl(jsonl).is_ok());
}

#[test]
fn under_resourced_session_loses_to_recorded_attack() {
    let spec = GadgetSpec::new(5, 1, 2);
    let r = verify_necessity(spec, &int(2)).unwrap();
    let out = r.outcome.unwrap();
    assert_eq!(out.result, GameResult::AttackerWin);
    let Some(Record::Header(h)) = out.trace.first() else { panic!() };
    let cfg = SessionConfig {
        environment: SessionEnv::Inline(EnvFile::from_environment(&r.gadget.env)),
        k: 1,
        defender_total: Some("2".into()),
        attacker_total: None,
        attacker_start: h.attacker_start.clone(),
        fractional: false,
        max_steps: None,
    };
    let s = Sessions::default();
    let mut v = state(s.handle(&ClientMessage::New { config: cfg }));
    assert!(v.no_guarantee);
    for rec in &out.trace {
        let Record::Phase(p) = rec else { continue };
        if p.phase != Phase::Attacker {
            continue;
        }
        let flows = p
            .flows
            .iter()
            .map(|f| ScriptFlow {
                from: f.from.clone(),
                to: f.to.clone(),
                amount: None,
                group: f.group.clone(),
            })
            .collect();
        v = state(s.handle(&ClientMessage::Move { session: v.session, flows }));
    }
    let o = v.outcome.expect("finished");
    assert_eq!(o.result, GameResult::AttackerWin);
    assert_eq!(o.win_step, out.win_step);
    assert!(v.legal_moves.is_empty());
}

#[test]
fn malformed_graph_is_rejected() {
    let s = Sessions::default();
    let mut cfg = demo(false);
    cfg.environment = SessionEnv::Inline(EnvFile {
        nodes: vec!["p1".into(), "p2".into(), "u".into()],
        edges: vec![["p1".into(), "p2".into()]],
        path: vec!["p1".into(), "p2".into()],
    });
    cfg.attacker_start = "u".into();
    assert!(matches!(s.handle(&ClientMessage::New { config: cfg }), ServerMessage::Error { .. }));
    cfg = demo(false);
    cfg.environment = SessionEnv::Builtin("/etc/passwd".into());
    assert!(matches!(s.handle(&ClientMessage::New { config: cfg }), ServerMessage::Error { .. }));
    assert!(matches!(s.handle_text("{\"type\":\"nope\"}"), ServerMessage::Error { .. }));
    assert!(s.is_empty());
}
