//! Graph and rooted-tree representation shared by every scheme and oracle.
//!
//! Graphs are simple, connected, loopless, with distinct positive integer
//! identifiers. Identifiers are arbitrary (not necessarily 1..n); the
//! canonical constructors use 1..n for determinism. Everything is immutable
//! after construction, so concurrent readers need no synchronization.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

/// A vertex identifier: a positive integer, unique within its graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(u64);

impl VertexId {
    pub fn new(value: u64) -> Result<Self, GraphError> {
        if value == 0 {
            return Err(GraphError::ZeroId);
        }
        Ok(VertexId(value))
    }

    pub fn value(self) -> u64 {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Shorthand used pervasively in tests.
pub fn vid(value: u64) -> VertexId {
    VertexId::new(value).expect("positive id")
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("identifiers must be positive")]
    ZeroId,
    #[error("duplicate identifier {0}")]
    DuplicateId(VertexId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(VertexId, VertexId),
    #[error("self-loop at {0}")]
    SelfLoop(VertexId),
    #[error("edge endpoint {0} is not a listed vertex")]
    UnknownEndpoint(VertexId),
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph must be non-empty")]
    Empty,
    #[error("vertex {0} not in graph")]
    NoSuchVertex(VertexId),
    #[error("constructor argument out of range: {0}")]
    BadParameter(String),
    #[error("malformed graph file: {0}")]
    Parse(String),
    #[error("node {0} not in tree")]
    NoSuchNode(VertexId),
    #[error("malformed tree: {0}")]
    BadTree(String),
}

/// A simple connected graph. Vertices are kept sorted; adjacency is stored
/// both as index lists (for the oracles) and as an id set per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    ids: Vec<VertexId>,
    index_of: BTreeMap<VertexId, usize>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from explicit vertex and edge lists, enforcing every
    /// representation invariant (distinct ids, no loops, no duplicate edges,
    /// connectivity).
    pub fn new(ids: Vec<VertexId>, edges: &[(VertexId, VertexId)]) -> Result<Self, GraphError> {
        if ids.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut sorted = ids;
        sorted.sort();
        for pair in sorted.windows(2) {
            if pair[0] == pair[1] {
                return Err(GraphError::DuplicateId(pair[0]));
            }
        }
        let index_of: BTreeMap<VertexId, usize> =
            sorted.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut adj = vec![Vec::new(); sorted.len()];
        let mut seen = BTreeSet::new();
        for &(a, b) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let ia = *index_of.get(&a).ok_or(GraphError::UnknownEndpoint(a))?;
            let ib = *index_of.get(&b).ok_or(GraphError::UnknownEndpoint(b))?;
            let key = (ia.min(ib), ia.max(ib));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge(a.min(b), a.max(b)));
            }
            adj[ia].push(ib);
            adj[ib].push(ia);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let g = Graph { ids: sorted, index_of, adj };
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n()
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|l| l.len()).sum::<usize>() / 2
    }

    /// Vertex ids in ascending order.
    pub fn vertices(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn max_id(&self) -> VertexId {
        *self.ids.last().expect("non-empty")
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.index_of.contains_key(&v)
    }

    pub fn index(&self, v: VertexId) -> Option<usize> {
        self.index_of.get(&v).copied()
    }

    pub fn id(&self, index: usize) -> VertexId {
        self.ids[index]
    }

    pub fn neighbors_idx(&self, index: usize) -> &[usize] {
        &self.adj[index]
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        let idx = self.index(v).unwrap_or_else(|| panic!("vertex {v} not in graph"));
        self.adj[idx].iter().map(move |&i| self.ids[i])
    }

    pub fn degree(&self, v: VertexId) -> usize {
        let idx = self.index(v).unwrap_or_else(|| panic!("vertex {v} not in graph"));
        self.adj[idx].len()
    }

    pub fn adjacent(&self, a: VertexId, b: VertexId) -> bool {
        match (self.index(a), self.index(b)) {
            (Some(ia), Some(ib)) => self.adj[ia].binary_search(&ib).is_ok(),
            _ => false,
        }
    }

    /// Edges as (smaller id, larger id) pairs in lexicographic order.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, list) in self.adj.iter().enumerate() {
            for &j in list {
                if i < j {
                    out.push((self.ids[i], self.ids[j]));
                }
            }
        }
        out
    }

    /// The induced subgraph on `keep`, which must be connected.
    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> Result<Graph, GraphError> {
        let ids: Vec<VertexId> = keep.iter().copied().collect();
        for &v in &ids {
            if !self.contains(v) {
                return Err(GraphError::NoSuchVertex(v));
            }
        }
        let edges: Vec<(VertexId, VertexId)> = self
            .edges()
            .into_iter()
            .filter(|(a, b)| keep.contains(a) && keep.contains(b))
            .collect();
        Graph::new(ids, &edges)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    ids: Vec<u64>,
    edges: Vec<[u64; 2]>,
}

/// Parses the JSON graph file format: `{"ids": [...], "edges": [[a,b], ...]}`.
/// Order-insensitive on read.
pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    let file: GraphFile =
        serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
    let mut ids = Vec::with_capacity(file.ids.len());
    for raw in file.ids {
        ids.push(VertexId::new(raw)?);
    }
    let mut edges = Vec::with_capacity(file.edges.len());
    for [a, b] in file.edges {
        edges.push((VertexId::new(a)?, VertexId::new(b)?));
    }
    Graph::new(ids, &edges)
}

/// Canonical serialization: vertices ascending, edges lexicographic with the
/// smaller endpoint first. `parse_graph(serialize_graph(g)) == g` bit-exactly.
pub fn serialize_graph(g: &Graph) -> String {
    let file = GraphFile {
        ids: g.vertices().iter().map(|v| v.value()).collect(),
        edges: g.edges().iter().map(|(a, b)| [a.value(), b.value()]).collect(),
    };
    serde_json::to_string(&file).expect("serializable")
}

pub fn make_path(n: usize) -> Result<Graph, GraphError> {
    if n < 1 {
        return Err(GraphError::BadParameter(format!("path needs n >= 1, got {n}")));
    }
    let ids: Vec<VertexId> = (1..=n as u64).map(vid).collect();
    let edges: Vec<_> = (1..n as u64).map(|i| (vid(i), vid(i + 1))).collect();
    Graph::new(ids, &edges)
}

pub fn make_cycle(n: usize) -> Result<Graph, GraphError> {
    if n < 3 {
        return Err(GraphError::BadParameter(format!("cycle needs n >= 3, got {n}")));
    }
    let ids: Vec<VertexId> = (1..=n as u64).map(vid).collect();
    let mut edges: Vec<_> = (1..n as u64).map(|i| (vid(i), vid(i + 1))).collect();
    edges.push((vid(1), vid(n as u64)));
    Graph::new(ids, &edges)
}

/// Star K_{1,leaves} with the center as vertex 1.
pub fn make_star(leaves: usize) -> Result<Graph, GraphError> {
    if leaves < 1 {
        return Err(GraphError::BadParameter(format!("star needs >= 1 leaf, got {leaves}")));
    }
    let ids: Vec<VertexId> = (1..=leaves as u64 + 1).map(vid).collect();
    let edges: Vec<_> = (2..=leaves as u64 + 1).map(|i| (vid(1), vid(i))).collect();
    Graph::new(ids, &edges)
}

pub fn make_clique(n: usize) -> Result<Graph, GraphError> {
    if n < 1 {
        return Err(GraphError::BadParameter(format!("clique needs n >= 1, got {n}")));
    }
    let ids: Vec<VertexId> = (1..=n as u64).map(vid).collect();
    let mut edges = Vec::new();
    for a in 1..=n as u64 {
        for b in a + 1..=n as u64 {
            edges.push((vid(a), vid(b)));
        }
    }
    Graph::new(ids, &edges)
}

/// A rooted tree over a set of vertex ids: every non-root node has a parent
/// and reaches the root by iterated parent steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    root: VertexId,
    parent: BTreeMap<VertexId, VertexId>,
    children: BTreeMap<VertexId, Vec<VertexId>>,
}

impl RootedTree {
    pub fn new(root: VertexId, parent: BTreeMap<VertexId, VertexId>) -> Result<Self, GraphError> {
        if parent.contains_key(&root) {
            return Err(GraphError::BadTree(format!("root {root} has a parent")));
        }
        let mut children: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        children.entry(root).or_default();
        for (&c, &p) in &parent {
            if p != root && !parent.contains_key(&p) {
                return Err(GraphError::BadTree(format!("parent {p} of {c} is not a node")));
            }
            children.entry(c).or_default();
            children.entry(p).or_default().push(c);
        }
        let tree = RootedTree { root, parent, children };
        // Acyclicity: every node must reach the root without revisiting.
        for &node in tree.children.keys() {
            let mut steps = 0;
            let mut cur = node;
            while cur != tree.root {
                cur = tree.parent[&cur];
                steps += 1;
                if steps > tree.children.len() {
                    return Err(GraphError::BadTree(format!("cycle through {node}")));
                }
            }
        }
        Ok(tree)
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.children.contains_key(&v)
    }

    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructed trees always contain the root
    }

    pub fn nodes(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.children.keys().copied()
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent.get(&v).copied()
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        self.children.get(&v).map(|c| c.as_slice()).unwrap_or(&[])
    }

    /// Path from `v` to the root, starting at `v` itself.
    pub fn ancestors(&self, v: VertexId) -> Result<Vec<VertexId>, GraphError> {
        if !self.contains(v) {
            return Err(GraphError::NoSuchNode(v));
        }
        let mut out = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            out.push(p);
            cur = p;
        }
        Ok(out)
    }

    /// Edge-depth of `v`: number of edges to the root (root = 0).
    pub fn depth(&self, v: VertexId) -> Result<usize, GraphError> {
        Ok(self.ancestors(v)?.len() - 1)
    }

    /// Vertex-count height of the tree: 1 + max edge-depth.
    pub fn levels(&self) -> usize {
        self.children.keys().map(|&v| self.depth(v).unwrap()).max().unwrap_or(0) + 1
    }

    /// All nodes in the subtree rooted at `v`, including `v`.
    pub fn subtree(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend(self.children(u).iter().copied());
        }
        out
    }
}

/// True iff `u` lies on the path from `v` to the root. By convention
/// `is_ancestor(t, v, v)` is true.
pub fn is_ancestor(tree: &RootedTree, u: VertexId, v: VertexId) -> Result<bool, GraphError> {
    if !tree.contains(u) {
        return Err(GraphError::NoSuchNode(u));
    }
    Ok(tree.ancestors(v)?.contains(&u))
}

#[derive(Serialize, Deserialize)]
struct TreeFile {
    root: u64,
    parent: BTreeMap<String, u64>,
}

/// Model/tree file format: `{"root": id, "parent": {"child": parent, ...}}`.
pub fn parse_tree(text: &str) -> Result<RootedTree, GraphError> {
    let file: TreeFile = serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
    let mut parent = BTreeMap::new();
    for (child, p) in file.parent {
        let c = child.parse::<u64>().map_err(|_| GraphError::Parse(format!("bad id {child}")))?;
        parent.insert(VertexId::new(c)?, VertexId::new(p)?);
    }
    RootedTree::new(VertexId::new(file.root)?, parent)
}

pub fn serialize_tree(tree: &RootedTree) -> String {
    let file = TreeFile {
        root: tree.root().value(),
        parent: tree
            .nodes()
            .filter_map(|v| tree.parent(v).map(|p| (v.value().to_string(), p.value())))
            .collect(),
    };
    serde_json::to_string(&file).expect("serializable")
}

/// BFS tree rooted at `root`, visiting neighbors in ascending id order.
/// Used by every scheme that needs a deterministic spanning tree.
pub fn bfs_tree(g: &Graph, root: VertexId) -> RootedTree {
    let root_idx = g.index(root).expect("root in graph");
    let mut parent = BTreeMap::new();
    let mut seen = vec![false; g.n()];
    seen[root_idx] = true;
    let mut queue = VecDeque::from([root_idx]);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors_idx(u) {
            if !seen[v] {
                seen[v] = true;
                parent.insert(g.id(v), g.id(u));
                queue.push_back(v);
            }
        }
    }
    RootedTree::new(root, parent).expect("BFS tree is a tree")
}

/// BFS hop distances from `root`, indexed like the graph's vertex list.
pub fn bfs_distances(g: &Graph, root: VertexId) -> Vec<usize> {
    let root_idx = g.index(root).expect("root in graph");
    let mut dist = vec![usize::MAX; g.n()];
    dist[root_idx] = 0;
    let mut queue = VecDeque::from([root_idx]);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors_idx(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_k2() {
        let g = parse_graph(r#"{"ids":[1,2],"edges":[[1,2]]}"#).unwrap();
        assert_eq!(g.n(), 2);
        assert!(g.adjacent(vid(1), vid(2)));
    }

    #[test]
    fn parse_p7_matches_constructor() {
        let text = r#"{"ids":[1,2,3,4,5,6,7],"edges":[[1,2],[2,3],[3,4],[4,5],[5,6],[6,7]]}"#;
        assert_eq!(parse_graph(text).unwrap(), make_path(7).unwrap());
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(matches!(
            parse_graph(r#"{"ids":[1,2],"edges":[]}"#),
            Err(GraphError::Disconnected)
        ));
        assert!(matches!(
            parse_graph(r#"{"ids":[1,1],"edges":[[1,1]]}"#),
            Err(GraphError::DuplicateId(_)) | Err(GraphError::SelfLoop(_))
        ));
        assert!(matches!(
            parse_graph(r#"{"ids":[1,2],"edges":[[1,1]]}"#),
            Err(GraphError::SelfLoop(_))
        ));
        assert!(matches!(
            parse_graph(r#"{"ids":[1,2],"edges":[[1,2],[2,1]]}"#),
            Err(GraphError::DuplicateEdge(_, _))
        ));
        assert!(parse_graph("not json").is_err());
    }

    #[test]
    fn serialize_round_trip_is_identity() {
        for g in [make_path(7).unwrap(), make_cycle(5).unwrap(), make_star(4).unwrap()] {
            let text = serialize_graph(&g);
            assert_eq!(parse_graph(&text).unwrap(), g);
            // canonical form is a fixed point
            assert_eq!(serialize_graph(&parse_graph(&text).unwrap()), text);
        }
    }

    #[test]
    fn constructors() {
        assert_eq!(make_path(1).unwrap().n(), 1);
        assert_eq!(make_path(5).unwrap().edge_count(), 4);
        let c8 = make_cycle(8).unwrap();
        assert_eq!(c8.edge_count(), 8);
        let star = make_star(5).unwrap();
        assert_eq!(star.edge_count(), 5);
        assert_eq!(star.degree(vid(1)), 5);
        assert_eq!(make_clique(4).unwrap().edge_count(), 6);
        assert!(make_cycle(2).is_err());
        assert!(make_path(0).is_err());
    }

    fn fig1_tree() -> RootedTree {
        // Elimination tree of P7: root 4, children 2 and 6, leaves 1,3,5,7.
        let parent: BTreeMap<VertexId, VertexId> =
            [(2, 4), (6, 4), (1, 2), (3, 2), (5, 6), (7, 6)]
                .into_iter()
                .map(|(c, p)| (vid(c), vid(p)))
                .collect();
        RootedTree::new(vid(4), parent).unwrap()
    }

    #[test]
    fn ancestor_queries() {
        let t = fig1_tree();
        assert!(is_ancestor(&t, vid(4), vid(1)).unwrap());
        assert!(is_ancestor(&t, vid(4), vid(4)).unwrap());
        assert!(!is_ancestor(&t, vid(1), vid(4)).unwrap());
        assert!(is_ancestor(&t, vid(2), vid(3)).unwrap());
        assert!(!is_ancestor(&t, vid(2), vid(5)).unwrap());
        assert!(is_ancestor(&t, vid(9), vid(1)).is_err());
        assert_eq!(t.ancestors(vid(1)).unwrap(), vec![vid(1), vid(2), vid(4)]);
        assert_eq!(t.levels(), 3);
    }

    #[test]
    fn tree_rejects_cycles_and_dangling_parents() {
        let parent: BTreeMap<VertexId, VertexId> =
            [(vid(2), vid(3)), (vid(3), vid(2))].into_iter().collect();
        assert!(RootedTree::new(vid(1), parent).is_err());
        let parent: BTreeMap<VertexId, VertexId> = [(vid(2), vid(9))].into_iter().collect();
        assert!(RootedTree::new(vid(1), parent).is_err());
    }

    #[test]
    fn tree_file_round_trip() {
        let t = fig1_tree();
        let text = serialize_tree(&t);
        assert_eq!(parse_tree(&text).unwrap(), t);
    }

    #[test]
    fn bfs_tree_spans() {
        let g = make_cycle(6).unwrap();
        let t = bfs_tree(&g, vid(1));
        assert_eq!(t.len(), 6);
        assert_eq!(t.root(), vid(1));
        let d = bfs_distances(&g, vid(1));
        assert_eq!(d[g.index(vid(4)).unwrap()], 3);
    }
}
