//! Graphs, the defended path, hop distances and visibility regions.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense internal node index. Names live on the [`Graph`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph has no nodes")]
    Empty,
    #[error("duplicate node name {0:?}")]
    DuplicateNode(String),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("node index {0} out of range")]
    UnknownNodeId(usize),
    #[error("self-loop on node {0:?}")]
    SelfLoop(String),
    #[error("duplicate edge {0:?} -- {1:?}")]
    DuplicateEdge(String, String),
    #[error("graph is disconnected: {0:?} is unreachable from {1:?}")]
    Disconnected(String, String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnvError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("path is empty")]
    EmptyPath,
    #[error("path has {0} nodes; at least 3 are required")]
    PathTooShort(usize),
    #[error("path visits {0:?} twice")]
    RepeatedPathNode(String),
    #[error("path nodes {0:?} and {1:?} are consecutive but not adjacent")]
    NotAdjacent(String, String),
    #[error("path is not a shortest path: d(S,T) = {distance} < {expected}; shortcut {witness:?}")]
    Shortcut {
        distance: u32,
        expected: u32,
        witness: Vec<String>,
    },
}

/// Finite, connected, undirected graph with all-pairs hop distances.
#[derive(Debug, Clone)]
pub struct Graph {
    names: Vec<String>,
    ids: HashMap<String, NodeId>,
    adj: Vec<Vec<NodeId>>,
    edges: Vec<(NodeId, NodeId)>,
    dist: Vec<Vec<u32>>,
}

impl Graph {
    /// Builds the graph and precomputes distances. Rejects self-loops,
    /// duplicate edges and disconnected inputs.
    pub fn new(names: Vec<String>, edges: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        if names.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut ids = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if ids.insert(n.clone(), NodeId(i)).is_some() {
                return Err(GraphError::DuplicateNode(n.clone()));
            }
        }
        let n = names.len();
        let mut adj = vec![Vec::new(); n];
        let mut canon = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a.0 >= n {
                return Err(GraphError::UnknownNodeId(a.0));
            }
            if b.0 >= n {
                return Err(GraphError::UnknownNodeId(b.0));
            }
            if a == b {
                return Err(GraphError::SelfLoop(names[a.0].clone()));
            }
            if adj[a.0].contains(&b) {
                return Err(GraphError::DuplicateEdge(names[a.0].clone(), names[b.0].clone()));
            }
            adj[a.0].push(b);
            adj[b.0].push(a);
            canon.push((a.min(b), a.max(b)));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        canon.sort_unstable();

        let dist: Vec<Vec<u32>> = (0..n).map(|s| bfs(&adj, NodeId(s))).collect();
        if let Some(far) = dist[0].iter().position(|&d| d == u32::MAX) {
            return Err(GraphError::Disconnected(names[far].clone(), names[0].clone()));
        }
        Ok(Graph {
            names,
            ids,
            adj,
            edges: canon,
            dist,
        })
    }

    /// Convenience constructor from name pairs.
    pub fn from_names<S: AsRef<str>>(names: &[S], edges: &[(S, S)]) -> Result<Self, GraphError> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        let lookup: HashMap<&str, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mut ids = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            let a = *lookup
                .get(a.as_ref())
                .ok_or_else(|| GraphError::UnknownNode(a.as_ref().to_string()))?;
            let b = *lookup
                .get(b.as_ref())
                .ok_or_else(|| GraphError::UnknownNode(b.as_ref().to_string()))?;
            ids.push((NodeId(a), NodeId(b)));
        }
        Graph::new(names, &ids)
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.names.len()).map(NodeId)
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn name(&self, v: NodeId) -> &str {
        &self.names[v.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id(&self, name: &str) -> Result<NodeId, GraphError> {
        self.ids
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(name.to_string()))
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.0 < self.names.len()
    }

    /// Sorted neighbour list.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adj[v.0]
    }

    pub fn adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.adj[a.0].binary_search(&b).is_ok()
    }

    /// Exact hop distance.
    pub fn distance(&self, a: NodeId, b: NodeId) -> Result<u32, GraphError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.dist[a.0][b.0])
    }

    /// Hop distance for indices already known to be in range.
    #[inline]
    pub fn d(&self, a: NodeId, b: NodeId) -> u32 {
        self.dist[a.0][b.0]
    }

    /// One shortest path from `a` to `b`, lowest-index neighbour first.
    pub fn shortest_path(&self, a: NodeId, b: NodeId) -> Vec<NodeId> {
        let mut out = vec![a];
        let mut cur = a;
        while cur != b {
            let here = self.d(cur, b);
            cur = *self
                .neighbors(cur)
                .iter()
                .find(|&&w| self.d(w, b) + 1 == here)
                .expect("connected graph has a descending neighbour");
            out.push(cur);
        }
        out
    }

    fn check(&self, v: NodeId) -> Result<(), GraphError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(GraphError::UnknownNodeId(v.0))
        }
    }
}

fn bfs(adj: &[Vec<NodeId>], src: NodeId) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adj.len()];
    let mut queue = VecDeque::new();
    dist[src.0] = 0;
    queue.push_back(src);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v.0] {
            if dist[w.0] == u32::MAX {
                dist[w.0] = dist[v.0] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// The defended path `p_1 .. p_n`, stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSpec {
    nodes: Vec<NodeId>,
}

impl PathSpec {
    pub fn new(nodes: Vec<NodeId>) -> Self {
        PathSpec { nodes }
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn start(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn target(&self) -> NodeId {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn node(&self, i: usize) -> NodeId {
        self.nodes[i]
    }
}

/// Nodes within `k` hops of the path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisibilityRegion {
    k: u32,
    mask: Vec<bool>,
}

impl VisibilityRegion {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.mask.get(v.0).copied().unwrap_or(false)
    }

    pub fn members(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| NodeId(i))
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_subset_of(&self, other: &VisibilityRegion) -> bool {
        self.mask
            .iter()
            .zip(&other.mask)
            .all(|(&a, &b)| !a || b)
    }
}

/// A graph together with a validated shortest path. Immutable.
#[derive(Debug, Clone)]
pub struct Environment {
    graph: Graph,
    path: PathSpec,
    path_pos: Vec<Option<usize>>,
    path_dist: Vec<u32>,
    analysis_only: bool,
}

impl Environment {
    /// Playable environment: requires `|P| >= 3` and the shortest-path property.
    pub fn new(graph: Graph, path: PathSpec) -> Result<Self, EnvError> {
        if path.len() < 3 {
            return Err(EnvError::PathTooShort(path.len()));
        }
        Self::build(graph, path, false)
    }

    /// Like [`Environment::new`] but also accepts one- and two-node paths,
    /// flagged as analysis-only.
    pub fn new_analysis(graph: Graph, path: PathSpec) -> Result<Self, EnvError> {
        let short = path.len() < 3;
        Self::build(graph, path, short)
    }

    fn build(graph: Graph, path: PathSpec, analysis_only: bool) -> Result<Self, EnvError> {
        check_path(&graph, &path)?;
        let n = graph.node_count();
        let mut path_pos = vec![None; n];
        for (i, &v) in path.nodes().iter().enumerate() {
            path_pos[v.0] = Some(i);
        }
        let path_dist = (0..n)
            .map(|v| {
                path.nodes()
                    .iter()
                    .map(|&p| graph.d(NodeId(v), p))
                    .min()
                    .unwrap_or(u32::MAX)
            })
            .collect();
        Ok(Environment {
            graph,
            path,
            path_pos,
            path_dist,
            analysis_only,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn path(&self) -> &PathSpec {
        &self.path
    }

    pub fn analysis_only(&self) -> bool {
        self.analysis_only
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// Position of `v` on the path, if any.
    pub fn path_index(&self, v: NodeId) -> Option<usize> {
        self.path_pos[v.0]
    }

    pub fn on_path(&self, v: NodeId) -> bool {
        self.path_pos[v.0].is_some()
    }

    /// `min_i d(v, p_i)`.
    pub fn path_distance(&self, v: NodeId) -> Result<u32, GraphError> {
        self.graph.check(v)?;
        Ok(self.path_dist[v.0])
    }

    #[inline]
    pub fn dstar(&self, v: NodeId) -> u32 {
        self.path_dist[v.0]
    }

    pub fn visibility_region(&self, k: u32) -> VisibilityRegion {
        VisibilityRegion {
            k,
            mask: self.path_dist.iter().map(|&d| d <= k).collect(),
        }
    }

    /// Nodes outside `U_k`, in index order.
    pub fn invisible_nodes(&self, k: u32) -> Vec<NodeId> {
        self.graph.nodes().filter(|&v| self.dstar(v) > k).collect()
    }
}

/// Converts a signed radius from user input.
pub fn radius_from_i64(k: i64) -> Result<u32, String> {
    u32::try_from(k).map_err(|_| format!("sensing distance must be a nonnegative integer, got {k}"))
}

fn check_path(graph: &Graph, path: &PathSpec) -> Result<(), EnvError> {
    if path.is_empty() {
        return Err(EnvError::EmptyPath);
    }
    let mut seen = vec![false; graph.node_count()];
    for &v in path.nodes() {
        graph.check(v)?;
        if std::mem::replace(&mut seen[v.0], true) {
            return Err(EnvError::RepeatedPathNode(graph.name(v).to_string()));
        }
    }
    for w in path.nodes().windows(2) {
        if !graph.adjacent(w[0], w[1]) {
            return Err(EnvError::NotAdjacent(
                graph.name(w[0]).to_string(),
                graph.name(w[1]).to_string(),
            ));
        }
    }
    let expected = (path.len() - 1) as u32;
    let d = graph.d(path.start(), path.target());
    if d < expected {
        let witness = graph
            .shortest_path(path.start(), path.target())
            .into_iter()
            .map(|v| graph.name(v).to_string())
            .collect();
        return Err(EnvError::Shortcut {
            distance: d,
            expected,
            witness,
        });
    }
    Ok(())
}

/// Off-path node touching the path, with the (0-based) path indices it touches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Attachment {
    pub node: String,
    pub path_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub path_len: usize,
    pub st_distance: u32,
    pub analysis_only: bool,
    pub attachments: Vec<Attachment>,
    /// Every attachment touches at most three consecutive path nodes.
    pub attachments_consecutive: bool,
}

/// Checks the shortest-path assumption and reports the off-path attachment
/// structure it implies.
pub fn validate_environment(graph: &Graph, path: &PathSpec) -> Result<ValidationReport, EnvError> {
    let env = Environment::new_analysis(graph.clone(), path.clone())?;
    let mut attachments = Vec::new();
    let mut consecutive = true;
    for v in graph.nodes().filter(|&v| !env.on_path(v)) {
        let mut idx: Vec<usize> = graph
            .neighbors(v)
            .iter()
            .filter_map(|&w| env.path_index(w))
            .collect();
        if idx.is_empty() {
            continue;
        }
        idx.sort_unstable();
        let span = idx[idx.len() - 1] - idx[0];
        if idx.len() > 3 || span > 2 {
            consecutive = false;
        }
        attachments.push(Attachment {
            node: graph.name(v).to_string(),
            path_indices: idx,
        });
    }
    Ok(ValidationReport {
        path_len: path.len(),
        st_distance: graph.d(path.start(), path.target()),
        analysis_only: env.analysis_only(),
        attachments,
        attachments_consecutive: consecutive,
    })
}
