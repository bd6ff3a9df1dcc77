//! JSON interchange format for a graph and its defended path.
//!
//! ```json
//! { "nodes": ["p1", "p2", "p3"], "edges": [["p1", "p2"], ["p2", "p3"]], "path": ["p1", "p2", "p3"] }
//! ```

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EnvError, Environment, Graph, NodeId, PathSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvFile {
    pub nodes: Vec<String>,
    pub edges: Vec<[String; 2]>,
    pub path: Vec<String>,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {message}")]
    AtLine { line: usize, message: String },
    #[error(transparent)]
    Env(#[from] EnvError),
}

impl EnvFile {
    pub fn from_environment(env: &Environment) -> Self {
        let g = env.graph();
        EnvFile {
            nodes: g.names().to_vec(),
            edges: g
                .edges()
                .iter()
                .map(|&(a, b)| [g.name(a).to_string(), g.name(b).to_string()])
                .collect(),
            path: env
                .path()
                .nodes()
                .iter()
                .map(|&v| g.name(v).to_string())
                .collect(),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("env file serializes")
    }

    /// Resolves names and validates. `src` is only used for line numbers.
    pub fn into_environment(self, src: Option<&str>) -> Result<Environment, LoadError> {
        let line_of = |key: &str, idx: usize| -> usize {
            src.and_then(|s| array_element_lines(s, key).get(idx).copied())
                .unwrap_or(0)
        };
        let mut seen = HashSet::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if !seen.insert(n.as_str()) {
                return Err(LoadError::AtLine {
                    line: line_of("nodes", i),
                    message: format!("duplicate node {n:?}"),
                });
            }
        }
        let index = |name: &str| self.nodes.iter().position(|n| n == name).map(NodeId);

        let mut pairs = HashSet::new();
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, [a, b]) in self.edges.iter().enumerate() {
            let at = |message: String| LoadError::AtLine {
                line: line_of("edges", i),
                message,
            };
            let ia = index(a).ok_or_else(|| at(format!("edge {i} references unknown node {a:?}")))?;
            let ib = index(b).ok_or_else(|| at(format!("edge {i} references unknown node {b:?}")))?;
            if ia == ib {
                return Err(at(format!("edge {i} is a self-loop on {a:?}")));
            }
            if !pairs.insert((ia.min(ib), ia.max(ib))) {
                return Err(at(format!("duplicate edge {a:?} -- {b:?}")));
            }
            edges.push((ia, ib));
        }
        let mut path = Vec::with_capacity(self.path.len());
        for (i, p) in self.path.iter().enumerate() {
            let v = index(p).ok_or_else(|| LoadError::AtLine {
                line: line_of("path", i),
                message: format!("path references unknown node {p:?}"),
            })?;
            path.push(v);
        }
        let graph = Graph::new(self.nodes, &edges).map_err(EnvError::from)?;
        Ok(Environment::new(graph, PathSpec::new(path))?)
    }
}

pub fn parse_environment(src: &str) -> Result<Environment, LoadError> {
    let file: EnvFile = serde_json::from_str(src)?;
    file.into_environment(Some(src))
}

pub fn load_environment(path: &Path) -> Result<Environment, LoadError> {
    let src = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_environment(&src)
}

/// 1-based line of the start of each element of the top-level array stored
/// under `key`. Returns an empty list if the key is absent.
pub fn array_element_lines(src: &str, key: &str) -> Vec<usize> {
    let bytes = src.as_bytes();
    let needle = format!("\"{key}\"");
    let mut depth = 0i32;
    let mut line = 1usize;
    let mut i = 0;
    let mut in_str = false;
    // Phase 1: find the key at object depth 1, then its '['.
    let mut arr_depth = None;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            line += 1;
        }
        if in_str {
            if c == b'\\' {
                i += 2;
                continue;
            }
            if c == b'"' {
                in_str = false;
            }
            i += 1;
            continue;
        }
        match c {
            b'"' => {
                if depth == 1 && src[i..].starts_with(&needle) {
                    i += needle.len();
                    while i < bytes.len() && bytes[i] != b'[' {
                        if bytes[i] == b'\n' {
                            line += 1;
                        }
                        i += 1;
                    }
                    depth += 1;
                    arr_depth = Some(depth);
                    i += 1;
                    break;
                }
                in_str = true;
            }
            b'{' | b'[' => depth += 1,
            b'}' | b']' => depth -= 1,
            _ => {}
        }
        i += 1;
    }
    let Some(target) = arr_depth else {
        return Vec::new();
    };
    // Phase 2: record the line of every element start directly inside it.
    let mut out = Vec::new();
    let mut expecting = true;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            line += 1;
        }
        if in_str {
            if c == b'\\' {
                i += 2;
                continue;
            }
            if c == b'"' {
                in_str = false;
            }
            i += 1;
            continue;
        }
        if depth == target && expecting && !c.is_ascii_whitespace() && c != b']' {
            out.push(line);
            expecting = false;
        }
        match c {
            b'"' => in_str = true,
            b'{' | b'[' => depth += 1,
            b'}' | b']' => {
                depth -= 1;
                if depth < target {
                    break;
                }
            }
            b',' if depth == target => expecting = true,
            _ => {}
        }
        i += 1;
    }
    out
}
