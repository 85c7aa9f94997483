//! Exhaustive small-instance machinery: a backtracking packer, a free-tree
//! enumerator and design re-verification.

use std::collections::BTreeSet;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::clock::Instant;
use crate::designs::factorize::{verify_factorization, EtaFactorization};
use crate::designs::resolvable::{verify_decomposition, DesignReport, ResolvableDecomposition};
use crate::edge_table::EdgeTable;
use crate::graph::{verify_packing, Graph, GraphSequence, PackingMap};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BacktrackBudget {
    pub node_limit: u64,
    pub time_limit: Duration,
    pub symmetry_breaking: bool,
}

impl Default for BacktrackBudget {
    fn default() -> Self {
        BacktrackBudget {
            node_limit: 50_000_000,
            time_limit: Duration::from_secs(60),
            symmetry_breaking: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Sat(PackingMap),
    Unsat,
    BudgetExhausted,
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Sat(_) => "sat",
            Outcome::Unsat => "unsat",
            Outcome::BudgetExhausted => "budget-exhausted",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchReport {
    pub outcome: Outcome,
    pub nodes: u64,
    /// Set when `Unsat` was decided by counting alone.
    pub early_cut: bool,
}

struct Search<'a> {
    graphs: Vec<&'a Graph>,
    orders: Vec<Vec<usize>>,
    host: usize,
    table: EdgeTable,
    free_degree: Vec<usize>,
    touched: Vec<usize>,
    images: Vec<Vec<Option<usize>>>,
    in_graph: Vec<bool>,
    nodes: u64,
    budget: BacktrackBudget,
    started: Instant,
    exhausted: bool,
}

/// Packs `seq` into `K_host` by complete backtracking, or proves that no
/// packing exists. Sequences with more edges than `C(host, 2)` or a graph
/// with more than `host` vertices are rejected without search.
pub fn brute_force_pack(seq: &GraphSequence, host: usize, budget: BacktrackBudget) -> SearchReport {
    let cut = SearchReport {
        outcome: Outcome::Unsat,
        nodes: 0,
        early_cut: true,
    };
    if seq.total_edges() > host * host.saturating_sub(1) / 2
        || seq.graphs.iter().any(|g| g.vertex_count() > host)
    {
        return cut;
    }
    let mut idx: Vec<usize> = (0..seq.graphs.len())
        .filter(|&i| seq.graphs[i].edge_count() > 0)
        .collect();
    idx.sort_by_key(|&i| (std::cmp::Reverse(seq.graphs[i].edge_count()), i));
    let graphs: Vec<&Graph> = idx.iter().map(|&i| &seq.graphs[i]).collect();
    if graphs
        .iter()
        .any(|g| (0..g.vertex_count()).any(|v| g.degree(v) >= host))
    {
        return cut;
    }
    let orders = graphs.iter().map(|g| search_order(g)).collect();
    let mut s = Search {
        images: graphs
            .iter()
            .map(|g| vec![None; g.vertex_count()])
            .collect(),
        graphs,
        orders,
        host,
        table: EdgeTable::new(host),
        free_degree: vec![host.saturating_sub(1); host],
        touched: vec![0; host],
        in_graph: vec![false; host],
        nodes: 0,
        budget,
        started: Instant::now(),
        exhausted: false,
    };
    let found = s.place(0, 0);
    let outcome = if found {
        let mut pm = PackingMap::new(host, seq);
        for (k, &gi) in idx.iter().enumerate() {
            for (v, h) in s.images[k].iter().enumerate() {
                if let Some(h) = *h {
                    pm.set(gi, v, h);
                }
            }
        }
        for (gi, g) in seq.graphs.iter().enumerate() {
            let mut used: Vec<bool> = vec![false; host];
            for v in 0..g.vertex_count() {
                if let Some(h) = pm.get(gi, v) {
                    used[h] = true;
                }
            }
            let mut free = (0..host).filter(|&h| !used[h]);
            for v in 0..g.vertex_count() {
                if pm.get(gi, v).is_none() {
                    pm.set(gi, v, free.next().expect("vertex count checked"));
                }
            }
        }
        assert!(
            verify_packing(seq, &pm, host).passed,
            "backtracking produced an invalid packing"
        );
        Outcome::Sat(pm)
    } else if s.exhausted {
        Outcome::BudgetExhausted
    } else {
        Outcome::Unsat
    };
    SearchReport {
        outcome,
        nodes: s.nodes,
        early_cut: false,
    }
}

/// Non-isolated vertices, component by component in BFS order, so every
/// vertex after a component's first has an earlier neighbour.
fn search_order(g: &Graph) -> Vec<usize> {
    let mut comps = g.components();
    comps.retain(|c| c.len() > 1);
    comps.sort_by_key(|c| std::cmp::Reverse(c.len()));
    let mut seen = vec![false; g.vertex_count()];
    let mut out = Vec::new();
    for c in comps {
        let root = *c
            .iter()
            .max_by_key(|&&v| (g.degree(v), std::cmp::Reverse(v)))
            .unwrap();
        seen[root] = true;
        let mut head = out.len();
        out.push(root);
        while head < out.len() {
            let u = out[head];
            head += 1;
            for &w in g.neighbors(u) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    out.push(w as usize);
                }
            }
        }
    }
    out
}

impl Search<'_> {
    fn place(&mut self, k: usize, pos: usize) -> bool {
        if k == self.graphs.len() {
            return true;
        }
        if pos == self.orders[k].len() {
            for h in self.images[k].iter().flatten() {
                self.in_graph[*h] = false;
            }
            if self.place(k + 1, 0) {
                return true;
            }
            for h in self.images[k].iter().flatten() {
                self.in_graph[*h] = true;
            }
            return false;
        }
        self.nodes += 1;
        if self.nodes >= self.budget.node_limit
            || (self.nodes & 1023 == 0 && self.started.elapsed() >= self.budget.time_limit)
        {
            self.exhausted = true;
        }
        if self.exhausted {
            return false;
        }
        let g = self.graphs[k];
        let v = self.orders[k][pos];
        let placed: Vec<usize> = g
            .neighbors(v)
            .iter()
            .filter_map(|&w| self.images[k][w as usize])
            .collect();
        let deg = g.degree(v);
        let mut fresh_tried = false;
        for h in 0..self.host {
            if self.in_graph[h] || self.free_degree[h] < deg {
                continue;
            }
            if self.budget.symmetry_breaking && self.touched[h] == 0 {
                if fresh_tried {
                    continue;
                }
                fresh_tried = true;
            }
            if placed.iter().any(|&x| self.table.contains(x, h)) {
                continue;
            }
            for &x in &placed {
                self.table.insert(x, h);
                self.free_degree[x] -= 1;
                self.free_degree[h] -= 1;
            }
            self.images[k][v] = Some(h);
            self.in_graph[h] = true;
            self.touched[h] += 1;
            if self.place(k, pos + 1) {
                return true;
            }
            self.touched[h] -= 1;
            self.in_graph[h] = false;
            self.images[k][v] = None;
            for &x in &placed {
                self.table.remove(x, h);
                self.free_degree[x] += 1;
                self.free_degree[h] += 1;
            }
            if self.exhausted {
                return false;
            }
        }
        false
    }
}

/// Either design kind, with the `η` threshold for factorizations.
pub enum DesignRef<'a> {
    Resolvable(&'a ResolvableDecomposition),
    Factorization(&'a EtaFactorization, Rational),
}

pub fn verify_design(d: DesignRef<'_>) -> DesignReport {
    match d {
        DesignRef::Resolvable(r) => verify_decomposition(r),
        DesignRef::Factorization(f, eta) => verify_factorization(f, eta),
    }
}

/// Rooted trees on `n` vertices as canonical level sequences, in reverse
/// lexicographic order.
pub fn rooted_level_sequences(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return Vec::new();
    }
    let mut l: Vec<usize> = (0..n).collect();
    let mut out = vec![l.clone()];
    while let Some(p) = (0..n).rev().find(|&i| l[i] > 1) {
        let q = (0..p).rev().find(|&i| l[i] == l[p] - 1).unwrap();
        for i in p..n {
            l[i] = l[i - (p - q)];
        }
        out.push(l.clone());
    }
    out
}

pub fn tree_from_levels(levels: &[usize]) -> Graph {
    let mut edges = Vec::new();
    for i in 1..levels.len() {
        let parent = (0..i).rev().find(|&j| levels[j] + 1 == levels[i]).unwrap();
        edges.push((parent, i));
    }
    Graph::new(levels.len(), edges).expect("level sequence yields a tree")
}

/// Canonical string of a free tree: the smaller AHU encoding over its
/// centre rootings.
pub fn tree_canonical_form(g: &Graph) -> String {
    let n = g.vertex_count();
    if n <= 2 {
        return format!("#{n}");
    }
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&v| deg[v] == 1).collect();
    let mut left = n;
    while left > 2 {
        left -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            deg[v] = 0;
            for &w in g.neighbors(v) {
                let w = w as usize;
                if deg[w] > 0 {
                    deg[w] -= 1;
                    if deg[w] == 1 {
                        next.push(w);
                    }
                }
            }
        }
        layer = next;
    }
    layer.iter().map(|&c| ahu(g, c, usize::MAX)).min().unwrap()
}

fn ahu(g: &Graph, v: usize, parent: usize) -> String {
    let mut kids: Vec<String> = g
        .neighbors(v)
        .iter()
        .map(|&w| w as usize)
        .filter(|&w| w != parent)
        .map(|w| ahu(g, w, v))
        .collect();
    kids.sort();
    format!("({})", kids.concat())
}

/// One representative of every isomorphism class of trees on `n` vertices.
pub fn free_trees(n: usize) -> Vec<Graph> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for levels in rooted_level_sequences(n) {
        let t = tree_from_levels(&levels);
        if seen.insert(tree_canonical_form(&t)) {
            out.push(t);
        }
    }
    out
}

/// Every sequence `(T_1, …, T_n)` with `v(T_i) = i`, as graph sequences
/// for `K_n` with `Δ = n - 1`.
pub fn tree_sequences(n: usize) -> Vec<GraphSequence> {
    let mut seqs: Vec<Vec<Graph>> = vec![Vec::new()];
    for i in 1..=n {
        let trees = free_trees(i);
        seqs = seqs
            .into_iter()
            .flat_map(|s| {
                trees.iter().map(move |t| {
                    let mut s = s.clone();
                    s.push(t.clone());
                    s
                })
            })
            .collect();
    }
    seqs.into_iter()
        .map(|g| GraphSequence::new(n, n.saturating_sub(1), g))
        .collect()
}
