//! Undirected node-labeled graphs, atomic types, permutations, and the
//! brute-force isomorphism oracle used to check soundness of every
//! refinement routine in the crate.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest graph accepted by [`are_isomorphic_bruteforce`].
pub const BRUTEFORCE_MAX_NODES: usize = 9;

/// An undirected graph without self-loops and without isolated nodes.
///
/// Nodes are `0..num_nodes`; index order is the fixed node ordering every
/// enumeration in the crate is defined against. Edges are stored as sorted
/// `(u, v)` pairs with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    labels: Vec<u32>,
    edge_labels: Option<Vec<u32>>,
    adjacency: Vec<bool>,
    neighbors: Vec<Vec<usize>>,
    edge_index: HashMap<(usize, usize), usize>,
}

/// Wire format of a graph. Field names are part of the external interface.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub num_nodes: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_labels: Option<Vec<u32>>,
}

impl Graph {
    /// Builds and validates a graph. Labels default to all-zero.
    pub fn new(
        num_nodes: usize,
        edges: &[(usize, usize)],
        labels: Option<Vec<u32>>,
        edge_labels: Option<Vec<u32>>,
    ) -> Result<Self> {
        if num_nodes == 0 {
            return Err(Error::EmptyGraph);
        }
        let labels = labels.unwrap_or_else(|| vec![0; num_nodes]);
        if labels.len() != num_nodes {
            return Err(Error::LengthMismatch { what: "labels", got: labels.len(), expected: num_nodes });
        }
        if let Some(el) = &edge_labels {
            if el.len() != edges.len() {
                return Err(Error::LengthMismatch { what: "edge_labels", got: el.len(), expected: edges.len() });
            }
        }

        let mut keyed: Vec<((usize, usize), Option<u32>)> = Vec::with_capacity(edges.len());
        let mut adjacency = vec![false; num_nodes * num_nodes];
        for (i, &(u, v)) in edges.iter().enumerate() {
            for x in [u, v] {
                if x >= num_nodes {
                    return Err(Error::IndexOutOfRange { index: x, len: num_nodes });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            let (a, b) = (u.min(v), u.max(v));
            if adjacency[a * num_nodes + b] {
                return Err(Error::DuplicateEdge(a, b));
            }
            adjacency[a * num_nodes + b] = true;
            adjacency[b * num_nodes + a] = true;
            keyed.push(((a, b), edge_labels.as_ref().map(|el| el[i])));
        }
        keyed.sort_by_key(|&(e, _)| e);

        let mut neighbors = vec![Vec::new(); num_nodes];
        for &((a, b), _) in &keyed {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for (v, nb) in neighbors.iter_mut().enumerate() {
            if nb.is_empty() {
                return Err(Error::IsolatedNode(v));
            }
            nb.sort_unstable();
        }

        let edges: Vec<(usize, usize)> = keyed.iter().map(|&(e, _)| e).collect();
        let edge_labels = edge_labels.map(|_| keyed.iter().map(|&(_, l)| l.unwrap_or(0)).collect());
        let edge_index = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        Ok(Graph { num_nodes, edges, labels, edge_labels, adjacency, neighbors, edge_index })
    }

    /// Unlabeled graph from an edge list.
    pub fn from_edges(num_nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(num_nodes, edges, None, None)
    }

    pub fn from_doc(doc: GraphDoc) -> Result<Self> {
        let edges: Vec<(usize, usize)> = doc.edges.iter().map(|e| (e[0], e[1])).collect();
        Self::new(doc.num_nodes, &edges, doc.labels, doc.edge_labels)
    }

    pub fn to_doc(&self) -> GraphDoc {
        let labeled = self.labels.iter().any(|&l| l != 0);
        GraphDoc {
            num_nodes: self.num_nodes,
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
            labels: labeled.then(|| self.labels.clone()),
            edge_labels: self.edge_labels.clone(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> u32 {
        self.labels[v]
    }

    pub fn has_edge_labels(&self) -> bool {
        self.edge_labels.is_some()
    }

    #[inline]
    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency[u * self.num_nodes + v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    /// Label of edge `{u, v}`; `None` if the nodes are not adjacent. Graphs
    /// without edge labels report label 0 on every edge.
    pub fn edge_label(&self, u: usize, v: usize) -> Option<u32> {
        let key = (u.min(v), u.max(v));
        let i = *self.edge_index.get(&key)?;
        Some(self.edge_labels.as_ref().map_or(0, |el| el[i]))
    }

    /// Dense 0/1 adjacency matrix, row-major.
    pub fn adjacency_matrix(&self) -> Vec<Vec<u8>> {
        (0..self.num_nodes).map(|u| (0..self.num_nodes).map(|v| self.adjacent(u, v) as u8).collect()).collect()
    }

    pub fn check_node(&self, v: usize) -> Result<()> {
        if v >= self.num_nodes {
            Err(Error::IndexOutOfRange { index: v, len: self.num_nodes })
        } else {
            Ok(())
        }
    }

    /// Number of connected components of the subgraph induced by the
    /// distinct nodes of `nodes`. Repeated nodes count once.
    pub fn induced_components(&self, nodes: &[usize]) -> usize {
        let mut distinct: Vec<usize> = nodes.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let mut parent: Vec<usize> = (0..distinct.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut components = distinct.len();
        for i in 0..distinct.len() {
            for j in (i + 1)..distinct.len() {
                if self.adjacent(distinct[i], distinct[j]) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a] = b;
                        components -= 1;
                    }
                }
            }
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        let nodes: Vec<usize> = (0..self.num_nodes).collect();
        self.induced_components(&nodes) == 1
    }
}

/// Parses and validates a graph JSON document.
pub fn load_graph(text: &str) -> Result<Graph> {
    let doc: GraphDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    Graph::from_doc(doc)
}

pub fn load_graph_file(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.display().to_string()),
        _ => Error::Io(e.to_string()),
    })?;
    load_graph(&text)
}

pub fn graph_to_json(g: &Graph) -> String {
    serde_json::to_string(&g.to_doc()).expect("graph doc serializes")
}

/// k×k matrix over {1, 2, 3}: 1 for an edge, 2 for equal nodes, 3 otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomicTypeMatrix {
    k: usize,
    entries: Vec<u8>,
}

impl AtomicTypeMatrix {
    pub const EDGE: u8 = 1;
    pub const EQUAL: u8 = 2;
    pub const OTHER: u8 = 3;

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.k + j]
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.entries.chunks(self.k).map(|r| r.to_vec()).collect()
    }
}

pub fn atomic_type(g: &Graph, tuple: &[usize]) -> Result<AtomicTypeMatrix> {
    for &v in tuple {
        g.check_node(v)?;
    }
    Ok(atomic_type_unchecked(g, tuple))
}

pub(crate) fn atomic_type_unchecked(g: &Graph, tuple: &[usize]) -> AtomicTypeMatrix {
    let k = tuple.len();
    let mut entries = Vec::with_capacity(k * k);
    for &a in tuple {
        for &b in tuple {
            entries.push(if a == b {
                AtomicTypeMatrix::EQUAL
            } else if g.adjacent(a, b) {
                AtomicTypeMatrix::EDGE
            } else {
                AtomicTypeMatrix::OTHER
            });
        }
    }
    AtomicTypeMatrix { k, entries }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::NotBijective(n));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::NotBijective(n));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Relabels node `v` as `perm[v]`. Labels and edge labels travel with
/// their nodes and edges.
pub fn apply_permutation(g: &Graph, perm: &[usize]) -> Result<Graph> {
    let n = g.num_nodes();
    check_permutation(perm, n)?;
    let edges: Vec<(usize, usize)> = g.edges().iter().map(|&(u, v)| (perm[u], perm[v])).collect();
    let mut labels = vec![0; n];
    for v in 0..n {
        labels[perm[v]] = g.label(v);
    }
    Graph::new(n, &edges, Some(labels), g.edge_labels.clone())
}

pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

/// Exhaustive isomorphism test with label and degree pruning.
pub fn are_isomorphic_bruteforce(g: &Graph, h: &Graph) -> Result<bool> {
    for x in [g, h] {
        if x.num_nodes() > BRUTEFORCE_MAX_NODES {
            return Err(Error::SizeLimit { got: x.num_nodes(), limit: BRUTEFORCE_MAX_NODES });
        }
    }
    let n = g.num_nodes();
    if n != h.num_nodes() || g.num_edges() != h.num_edges() {
        return Ok(false);
    }
    let signature = |x: &Graph| {
        let mut s: Vec<(u32, usize)> = (0..n).map(|v| (x.label(v), x.degree(v))).collect();
        s.sort_unstable();
        s
    };
    if signature(g) != signature(h) {
        return Ok(false);
    }

    let mut mapping = vec![usize::MAX; n];
    let mut used = vec![false; n];
    Ok(extend_mapping(g, h, 0, &mut mapping, &mut used))
}

fn extend_mapping(g: &Graph, h: &Graph, v: usize, mapping: &mut [usize], used: &mut [bool]) -> bool {
    let n = g.num_nodes();
    if v == n {
        return true;
    }
    for target in 0..n {
        if used[target] || g.label(v) != h.label(target) || g.degree(v) != h.degree(target) {
            continue;
        }
        let consistent = (0..v).all(|u| {
            let mu = mapping[u];
            g.adjacent(u, v) == h.adjacent(mu, target) && g.edge_label(u, v) == h.edge_label(mu, target)
        });
        if !consistent {
            continue;
        }
        mapping[v] = target;
        used[target] = true;
        if extend_mapping(g, h, v + 1, mapping, used) {
            return true;
        }
        used[target] = false;
    }
    mapping[v] = usize::MAX;
    false
}

/// Names accepted by [`builtin_pair`].
pub const BUILTIN_PAIRS: [&str; 3] = ["c6_vs_2c3", "k33_vs_prism", "shrikhande_vs_rook"];

const SHRIKHANDE_JSON: &str = include_str!("../data/shrikhande.json");
const ROOK_4X4_JSON: &str = include_str!("../data/rook_4x4.json");

pub fn cycle(n: usize) -> Graph {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_edges(n, &edges).expect("cycle is valid for n >= 3")
}

pub fn path(n: usize) -> Graph {
    let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    Graph::from_edges(n, &edges).expect("path is valid for n >= 2")
}

pub fn complete(n: usize) -> Graph {
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    Graph::from_edges(n, &edges).expect("complete graph is valid for n >= 2")
}

/// Deterministic construction of a named non-isomorphic pair.
pub fn builtin_pair(name: &str) -> Result<(Graph, Graph)> {
    match name {
        "c6_vs_2c3" => {
            let two_triangles = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])?;
            Ok((cycle(6), two_triangles))
        }
        "k33_vs_prism" => {
            let k33: Vec<(usize, usize)> = (0..3).flat_map(|a| (3..6).map(move |b| (a, b))).collect();
            let prism = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4), (2, 5)];
            Ok((Graph::from_edges(6, &k33)?, Graph::from_edges(6, &prism)?))
        }
        "shrikhande_vs_rook" => Ok((load_graph(SHRIKHANDE_JSON)?, load_graph(ROOK_4X4_JSON)?)),
        other => Err(Error::UnknownPair(other.to_string())),
    }
}

/// Random graph with `n` nodes: each edge present with probability `p`,
/// then every isolated node is attached to a uniformly random other node.
pub fn random_graph<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
    assert!(n >= 2, "need at least two nodes to avoid isolated nodes");
    let mut adj = vec![false; n * n];
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random_bool(p) {
                adj[u * n + v] = true;
                adj[v * n + u] = true;
            }
        }
    }
    for v in 0..n {
        if !(0..n).any(|u| adj[v * n + u]) {
            let mut u = rng.random_range(0..n - 1);
            if u >= v {
                u += 1;
            }
            adj[u * n + v] = true;
            adj[v * n + u] = true;
        }
    }
    let edges: Vec<(usize, usize)> =
        (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v))).filter(|&(u, v)| adj[u * n + v]).collect();
    Graph::from_edges(n, &edges).expect("generator output is valid")
}

/// Random connected graph: a random recursive tree plus extra edges with
/// probability `p`.
pub fn random_connected_graph<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
    assert!(n >= 2);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if !edges.iter().any(|&(a, b)| (a.min(b), a.max(b)) == (u, v)) && rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).expect("generator output is valid")
}

/// Random labeling with `alphabet` distinct labels.
pub fn with_random_labels<R: Rng + ?Sized>(g: &Graph, alphabet: u32, rng: &mut R) -> Graph {
    let labels = (0..g.num_nodes()).map(|_| rng.random_range(0..alphabet)).collect();
    Graph::new(g.num_nodes(), g.edges(), Some(labels), g.edge_labels.clone()).expect("relabeling keeps the graph valid")
}
