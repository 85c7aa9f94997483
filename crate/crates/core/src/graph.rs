//! Simple undirected graphs, input sequences and packing maps.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::edge_table::EdgeTable;
use crate::error::GraphError;
use crate::separation::Separation;

/// Immutable simple graph on the vertex set `0..n`.
///
/// Edges are stored normalized (`u < v`) and sorted; adjacency lists are
/// sorted as well, so two graphs built from the same edge set compare equal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
    adj: Vec<Vec<u32>>,
}

impl Graph {
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let mut norm = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::VertexOutOfRange {
                    vertex: u.max(v),
                    n,
                });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            norm.push((a as u32, b as u32));
        }
        norm.sort_unstable();
        if let Some(w) = norm.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::ParallelEdge(w[0].0 as usize, w[0].1 as usize));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &norm {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            edges: norm,
            adj,
        })
    }

    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    pub fn path(n: usize) -> Self {
        Graph::new(n, (1..n).map(|i| (i - 1, i))).expect("path is simple")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3);
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle is simple")
    }

    pub fn complete(n: usize) -> Self {
        Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
            .expect("clique is simple")
    }

    pub fn star(leaves: usize) -> Self {
        Graph::new(leaves + 1, (1..=leaves).map(|v| (0, v))).expect("star is simple")
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adj[u].binary_search(&(v as u32)).is_ok()
    }

    pub fn isolated_vertices(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| self.adj[v].is_empty()).collect()
    }

    /// Subgraph induced on `vertices`; vertex `vertices[k]` becomes `k`.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut local = vec![usize::MAX; self.n];
        for (k, &v) in vertices.iter().enumerate() {
            local[v] = k;
        }
        let edges = self
            .edges
            .iter()
            .filter_map(|&(u, v)| {
                let (a, b) = (local[u as usize], local[v as usize]);
                (a != usize::MAX && b != usize::MAX).then_some((a, b))
            })
            .collect::<Vec<_>>();
        Graph::new(vertices.len(), edges).expect("induced subgraph of a simple graph is simple")
    }

    /// Connected components of the subgraph induced by vertices with
    /// `keep[v] == true`, each sorted, listed by smallest vertex.
    pub fn components_where(&self, keep: &[bool]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for start in 0..self.n {
            if seen[start] || !keep[start] {
                continue;
            }
            seen[start] = true;
            stack.push(start);
            let mut comp = Vec::new();
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &w in &self.adj[v] {
                    let w = w as usize;
                    if keep[w] && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        self.components_where(&vec![true; self.n])
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().len() == 1
    }

    pub fn is_forest(&self) -> bool {
        self.edges.len() + self.components().len() == self.n
    }

    /// Removes isolated vertices. Returns the stripped graph and, for every
    /// vertex of it, the original id.
    pub fn strip_isolated(&self) -> (Graph, Vec<usize>) {
        let kept: Vec<usize> = (0..self.n).filter(|&v| !self.adj[v].is_empty()).collect();
        (self.induced(&kept), kept)
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.n);
        Graph::new(
            self.n,
            self.edges
                .iter()
                .map(|&(u, v)| (perm[u as usize], perm[v as usize])),
        )
        .expect("relabeling preserves simplicity")
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n, self.edges)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GraphRepr {
            n: self.n,
            edges: self
                .edges
                .iter()
                .map(|&(u, v)| [u as usize, v as usize])
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = GraphRepr::deserialize(d)?;
        Graph::new(repr.n, repr.edges.into_iter().map(|[u, v]| (u, v)))
            .map_err(serde::de::Error::custom)
    }
}

/// An ordered list of graphs to be packed, with the host-size parameter `n`
/// and the degree bound.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphSequence {
    pub n: usize,
    pub delta: usize,
    pub graphs: Vec<Graph>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separations: Option<Vec<Separation>>,
}

impl GraphSequence {
    pub fn new(n: usize, delta: usize, graphs: Vec<Graph>) -> Self {
        GraphSequence {
            n,
            delta,
            graphs,
            separations: None,
        }
    }

    pub fn total_edges(&self) -> usize {
        self.graphs.iter().map(Graph::edge_count).sum()
    }

    pub fn edge_capacity(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    OrderTooLarge {
        graph: usize,
        order: usize,
        n: usize,
    },
    DegreeTooLarge {
        graph: usize,
        vertex: usize,
        degree: usize,
        delta: usize,
    },
    EdgeSumExceeded {
        sum: usize,
        capacity: usize,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
    /// `(graph, count)` for every graph that had isolated vertices stripped.
    pub isolated_stripped: Vec<(usize, usize)>,
    pub edge_sum: usize,
    pub edge_capacity: usize,
}

/// Checks the order/degree clause and the edge-sum clause. Isolated vertices
/// are not violations; they are reported and excluded from the order check.
pub fn validate_sequence(seq: &GraphSequence) -> ValidationReport {
    let mut violations = Vec::new();
    let mut isolated_stripped = Vec::new();
    for (i, g) in seq.graphs.iter().enumerate() {
        let isolated = g.isolated_vertices().len();
        if isolated > 0 {
            isolated_stripped.push((i, isolated));
        }
        let order = g.vertex_count() - isolated;
        if order > seq.n {
            violations.push(Violation::OrderTooLarge {
                graph: i,
                order,
                n: seq.n,
            });
        }
        for v in 0..g.vertex_count() {
            if g.degree(v) > seq.delta {
                violations.push(Violation::DegreeTooLarge {
                    graph: i,
                    vertex: v,
                    degree: g.degree(v),
                    delta: seq.delta,
                });
            }
        }
    }
    let edge_sum = seq.total_edges();
    let edge_capacity = seq.edge_capacity();
    if edge_sum > edge_capacity {
        violations.push(Violation::EdgeSumExceeded {
            sum: edge_sum,
            capacity: edge_capacity,
        });
    }
    ValidationReport {
        passed: violations.is_empty(),
        violations,
        isolated_stripped,
        edge_sum,
        edge_capacity,
    }
}

/// Per input graph, a vertex map into the host clique `K_{host_order}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackingMap {
    pub host_order: usize,
    pub maps: Vec<Vec<Option<u32>>>,
}

impl PackingMap {
    pub fn new(host_order: usize, seq: &GraphSequence) -> Self {
        PackingMap {
            host_order,
            maps: seq
                .graphs
                .iter()
                .map(|g| vec![None; g.vertex_count()])
                .collect(),
        }
    }

    pub fn get(&self, graph: usize, v: usize) -> Option<usize> {
        self.maps[graph][v].map(|h| h as usize)
    }

    pub fn set(&mut self, graph: usize, v: usize, host: usize) {
        self.maps[graph][v] = Some(host as u32);
    }

    pub fn is_total(&self) -> bool {
        self.maps.iter().all(|m| m.iter().all(Option::is_some))
    }

    /// Host edge slots occupied by all mapped edges, as a bit table.
    pub fn edge_table(&self, seq: &GraphSequence) -> EdgeTable {
        let mut table = EdgeTable::new(self.host_order);
        for (i, g) in seq.graphs.iter().enumerate() {
            for &(u, v) in g.edges() {
                if let (Some(a), Some(b)) = (self.get(i, u as usize), self.get(i, v as usize)) {
                    if a != b && a < self.host_order && b < self.host_order {
                        table.insert(a, b);
                    }
                }
            }
        }
        table
    }
}

#[derive(Serialize, Deserialize)]
struct MapEntry {
    graph: usize,
    map: Vec<[u32; 2]>,
}

#[derive(Serialize, Deserialize)]
struct PackingRepr {
    #[serde(rename = "N")]
    host_order: usize,
    maps: Vec<MapEntry>,
}

impl Serialize for PackingMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PackingRepr {
            host_order: self.host_order,
            maps: self
                .maps
                .iter()
                .enumerate()
                .map(|(graph, m)| MapEntry {
                    graph,
                    map: m
                        .iter()
                        .enumerate()
                        .filter_map(|(v, h)| h.map(|h| [v as u32, h]))
                        .collect(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PackingMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = PackingRepr::deserialize(d)?;
        let count = repr.maps.iter().map(|e| e.graph + 1).max().unwrap_or(0);
        let mut maps = vec![Vec::new(); count];
        for entry in repr.maps {
            let len = entry
                .map
                .iter()
                .map(|p| p[0] as usize + 1)
                .max()
                .unwrap_or(0);
            let slot: &mut Vec<Option<u32>> = &mut maps[entry.graph];
            if slot.len() < len {
                slot.resize(len, None);
            }
            for [v, h] in entry.map {
                slot[v as usize] = Some(h);
            }
        }
        Ok(PackingMap {
            host_order: repr.host_order,
            maps,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerifyIssue {
    GraphCountMismatch {
        graphs: usize,
        maps: usize,
    },
    HostOrderExceeded {
        host_order: usize,
        bound: usize,
    },
    Unmapped {
        graph: usize,
        vertex: usize,
    },
    HostOutOfRange {
        graph: usize,
        vertex: usize,
        host: usize,
    },
    NotInjective {
        graph: usize,
        host: usize,
        vertices: (usize, usize),
    },
    EdgeReuse {
        host_edge: (usize, usize),
        first: (usize, (usize, usize)),
        second: (usize, (usize, usize)),
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub issues: Vec<VerifyIssue>,
    pub edges_checked: usize,
    pub host_edges_used: usize,
}

/// Independent check of a packing: every vertex mapped into `0..bound`,
/// every map injective, every host edge used by at most one graph edge.
///
/// An injective map sends the edges of `F_i` onto distinct host edges, so the
/// image always contains a copy of `F_i`; the check therefore reduces to
/// injectivity plus edge-disjointness.
pub fn verify_packing(seq: &GraphSequence, pm: &PackingMap, bound: usize) -> VerifyReport {
    let mut issues = Vec::new();
    if pm.maps.len() != seq.graphs.len() {
        issues.push(VerifyIssue::GraphCountMismatch {
            graphs: seq.graphs.len(),
            maps: pm.maps.len(),
        });
    }
    if pm.host_order > bound {
        issues.push(VerifyIssue::HostOrderExceeded {
            host_order: pm.host_order,
            bound,
        });
    }
    let host = pm.host_order.min(bound);
    let mut owner: BTreeMap<(usize, usize), (usize, (usize, usize))> = BTreeMap::new();
    let mut edges_checked = 0;
    for (i, g) in seq.graphs.iter().enumerate() {
        let Some(map) = pm.maps.get(i) else { continue };
        let mut image = vec![None; g.vertex_count()];
        let mut preimage: BTreeMap<usize, usize> = BTreeMap::new();
        for v in 0..g.vertex_count() {
            match map.get(v).copied().flatten() {
                None => issues.push(VerifyIssue::Unmapped {
                    graph: i,
                    vertex: v,
                }),
                Some(h) if h as usize >= host => issues.push(VerifyIssue::HostOutOfRange {
                    graph: i,
                    vertex: v,
                    host: h as usize,
                }),
                Some(h) => {
                    let h = h as usize;
                    if let Some(&w) = preimage.get(&h) {
                        issues.push(VerifyIssue::NotInjective {
                            graph: i,
                            host: h,
                            vertices: (w, v),
                        });
                    } else {
                        preimage.insert(h, v);
                    }
                    image[v] = Some(h);
                }
            }
        }
        for &(u, v) in g.edges() {
            let (u, v) = (u as usize, v as usize);
            let (Some(a), Some(b)) = (image[u], image[v]) else {
                continue;
            };
            if a == b {
                continue;
            }
            edges_checked += 1;
            let key = (a.min(b), a.max(b));
            if let Some(&first) = owner.get(&key) {
                issues.push(VerifyIssue::EdgeReuse {
                    host_edge: key,
                    first,
                    second: (i, (u, v)),
                });
            } else {
                owner.insert(key, (i, (u, v)));
            }
        }
    }
    VerifyReport {
        passed: issues.is_empty(),
        issues,
        edges_checked,
        host_edges_used: owner.len(),
    }
}
