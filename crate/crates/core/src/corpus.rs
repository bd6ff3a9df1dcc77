//! Deterministic small-instance corpus and the 23-node demo environment.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::graph::{validate_environment, Environment, Graph, NodeId, PathSpec};
use crate::verifier::{build_gadget, GadgetSpec};

pub const MAX_NODES: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    PathOnly,
    Gadget,
    Decorated,
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub kind: EntryKind,
    pub env: Arc<Environment>,
    pub k: u32,
    pub gadget: Option<GadgetSpec>,
}

fn path_only(n: usize) -> Environment {
    let names = (1..=n).map(|i| format!("p{i}")).collect();
    let edges: Vec<_> = (1..n).map(|i| (NodeId(i - 1), NodeId(i))).collect();
    let g = Graph::new(names, &edges).expect("chain graph");
    Environment::new(g, PathSpec::new((0..n).map(NodeId).collect())).expect("chain path")
}

/// Path of `n` nodes plus up to `extra` random off-path nodes that keep the
/// path shortest. Retries until validation passes.
pub fn decorate(n: usize, extra: usize, rng: &mut ChaCha8Rng) -> Environment {
    for _ in 0..200 {
        let mut names: Vec<String> = (1..=n).map(|i| format!("p{i}")).collect();
        let mut edges: Vec<(NodeId, NodeId)> = (1..n).map(|i| (NodeId(i - 1), NodeId(i))).collect();
        let m = rng.random_range(1..=extra);
        for j in 0..m {
            let u = NodeId(names.len());
            names.push(format!("u{}", j + 1));
            let prev_deco = (j > 0).then(|| NodeId(n + rng.random_range(0..j)));
            match (rng.random_range(0..4), prev_deco) {
                (1, _) => {
                    // touches two or three consecutive path nodes
                    let span = rng.random_range(1..=2usize).min(n - 1);
                    let s = rng.random_range(0..n - span);
                    for i in s..=s + span {
                        edges.push((u, NodeId(i)));
                    }
                }
                (2, Some(d)) => edges.push((u, d)),
                (3, Some(d)) => {
                    edges.push((u, d));
                    edges.push((u, NodeId(rng.random_range(0..n))));
                }
                _ => edges.push((u, NodeId(rng.random_range(0..n)))),
            }
        }
        let Ok(g) = Graph::new(names, &edges) else { continue };
        let path = PathSpec::new((0..n).map(NodeId).collect());
        if validate_environment(&g, &path).is_ok() {
            return Environment::new(g, path).expect("validated");
        }
    }
    path_only(n)
}

/// Every `(|P|, k)` with `|P|` in 3..=9 and `k` in 0..=2: the bare path, a
/// three-target gadget (plus a ringed variant where it fits in
/// [`MAX_NODES`]) and a randomly decorated path.
pub fn desk_corpus(seed: u64) -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for n in 3..=9usize {
        for k in 0..=2u32 {
            out.push(CorpusEntry {
                name: format!("path-n{n}-k{k}"),
                kind: EntryKind::PathOnly,
                env: Arc::new(path_only(n)),
                k,
                gadget: None,
            });
            let alpha = n / 2;
            for ring in [false, true] {
                let spec = GadgetSpec {
                    ring,
                    ..GadgetSpec::new(n, k, alpha)
                };
                let Ok(g) = build_gadget(spec) else { continue };
                if g.env.node_count() > MAX_NODES {
                    continue;
                }
                out.push(CorpusEntry {
                    name: format!("gadget{}-n{n}-k{k}-a{alpha}", if ring { "-ring" } else { "" }),
                    kind: EntryKind::Gadget,
                    env: g.env,
                    k,
                    gadget: Some(spec),
                });
            }
            let extra = (MAX_NODES - n).min(5);
            out.push(CorpusEntry {
                name: format!("deco-n{n}-k{k}"),
                kind: EntryKind::Decorated,
                env: Arc::new(decorate(n, extra, &mut rng)),
                k,
                gadget: None,
            });
        }
    }
    out
}

/// 23-node path with two hubs, their entry chains and a pendant spur.
pub fn demo_environment() -> Environment {
    let mut names: Vec<String> = (1..=23).map(|i| format!("p{i}")).collect();
    let extra = ["x1", "a1", "a2", "x2", "b1", "b2", "b3", "c1", "c2"];
    names.extend(extra.iter().map(|s| s.to_string()));
    let id = |names: &[String], s: &str| NodeId(names.iter().position(|n| n == s).expect("demo node"));
    let mut edges: Vec<(NodeId, NodeId)> = (1..23).map(|i| (NodeId(i - 1), NodeId(i))).collect();
    for (a, b) in [
        ("x1", "p4"),
        ("x1", "p5"),
        ("x1", "p6"),
        ("x1", "a1"),
        ("a1", "a2"),
        ("x2", "p12"),
        ("x2", "p13"),
        ("x2", "p14"),
        ("x2", "b1"),
        ("b1", "b2"),
        ("b2", "b3"),
        ("c1", "p20"),
        ("c1", "c2"),
    ] {
        edges.push((id(&names, a), id(&names, b)));
    }
    let g = Graph::new(names, &edges).expect("demo graph");
    Environment::new(g, PathSpec::new((0..23).map(NodeId).collect())).expect("demo path")
}
