//! Isomorphism types of components with a marked boundary, and the census of
//! a component graph.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::IsoTypeError;
use crate::graph::Graph;

/// Largest order handled by exhaustive permutation search. Bigger graphs go
/// through individualization-refinement.
pub const EXHAUSTIVE_ORDER: usize = 8;
/// Hard cap on component order (bit masks are `u32`).
pub const MAX_ORDER: usize = 24;

/// A small graph `R` in canonical vertex order with a boundary set `B`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IsoType {
    pub v: usize,
    pub edges: Vec<(usize, usize)>,
    pub boundary: Vec<usize>,
}

impl IsoType {
    pub fn graph(&self) -> Graph {
        Graph::new(self.v, self.edges.iter().copied()).expect("canonical edges are simple")
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn boundary_mask(&self) -> u32 {
        self.boundary.iter().fold(0, |m, &b| m | 1 << b)
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary_mask() >> v & 1 == 1
    }

    /// Density order: `e/v` non-increasing, then `v`, edge list and boundary
    /// mask ascending.
    pub fn density_cmp(&self, other: &Self) -> Ordering {
        let lhs = self.edges.len() * other.v;
        let rhs = other.edges.len() * self.v;
        rhs.cmp(&lhs)
            .then(self.v.cmp(&other.v))
            .then_with(|| self.edges.cmp(&other.edges))
            .then_with(|| self.boundary_mask().cmp(&other.boundary_mask()))
    }

    pub fn label(&self) -> String {
        let edges: Vec<String> = self.edges.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        let bd: Vec<String> = self.boundary.iter().map(|b| b.to_string()).collect();
        format!("v{}[{}]b[{}]", self.v, edges.join(","), bd.join(","))
    }
}

fn adjacency_masks(g: &Graph) -> Vec<u32> {
    (0..g.vertex_count())
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w))
        .collect()
}

/// The code of a labeling: for each position `k`, the boundary bit of the
/// vertex at `k` followed by its adjacency to positions `0..k`.
fn push_position(code: &mut Vec<bool>, adj: &[u32], bmask: u32, order: &[usize], k: usize) {
    let v = order[k];
    code.push(bmask >> v & 1 == 1);
    for &w in &order[..k] {
        code.push(adj[v] >> w & 1 == 1);
    }
}

fn full_code(adj: &[u32], bmask: u32, order: &[usize]) -> Vec<bool> {
    let mut code = Vec::new();
    for k in 0..order.len() {
        push_position(&mut code, adj, bmask, order, k);
    }
    code
}

/// Branch and bound over all orders, keeping the lexicographically smallest
/// code.
fn exhaustive_order(adj: &[u32], bmask: u32, n: usize) -> Vec<usize> {
    struct Search<'a> {
        adj: &'a [u32],
        bmask: u32,
        n: usize,
        best: Option<(Vec<bool>, Vec<usize>)>,
    }
    impl Search<'_> {
        fn go(&mut self, order: &mut Vec<usize>, code: &mut Vec<bool>, used: u32) {
            let k = order.len();
            if k == self.n {
                if self.best.as_ref().is_none_or(|(b, _)| code[..] < b[..]) {
                    self.best = Some((code.clone(), order.clone()));
                }
                return;
            }
            for v in 0..self.n {
                if used >> v & 1 == 1 {
                    continue;
                }
                order.push(v);
                let mark = code.len();
                push_position(code, self.adj, self.bmask, order, k);
                let prune = match &self.best {
                    Some((b, _)) => code[..] > b[..code.len()],
                    None => false,
                };
                if !prune {
                    self.go(order, code, used | 1 << v);
                }
                code.truncate(mark);
                order.pop();
            }
        }
    }
    let mut s = Search {
        adj,
        bmask,
        n,
        best: None,
    };
    s.go(&mut Vec::new(), &mut Vec::new(), 0);
    s.best.map(|(_, o)| o).unwrap_or_default()
}

/// Colour refinement of an ordered partition (a list of cells). Cells are
/// split by neighbour counts into each cell, in an isomorphism-invariant way.
fn refine(adj: &[u32], mut cells: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    loop {
        let masks: Vec<u32> = cells
            .iter()
            .map(|c| c.iter().fold(0u32, |m, &v| m | 1 << v))
            .collect();
        let mut next = Vec::with_capacity(cells.len());
        for cell in &cells {
            if cell.len() == 1 {
                next.push(cell.clone());
                continue;
            }
            let mut keyed: Vec<(Vec<u32>, usize)> = cell
                .iter()
                .map(|&v| (masks.iter().map(|m| (adj[v] & m).count_ones()).collect(), v))
                .collect();
            keyed.sort();
            let mut start = 0;
            for i in 1..=keyed.len() {
                if i == keyed.len() || keyed[i].0 != keyed[start].0 {
                    next.push(keyed[start..i].iter().map(|(_, v)| *v).collect());
                    start = i;
                }
            }
        }
        if next.len() == cells.len() {
            return next;
        }
        cells = next;
    }
}

/// Individualization-refinement: every leaf is a discrete invariant
/// partition; the canonical order is the leaf with the smallest code.
fn refined_order(adj: &[u32], bmask: u32, n: usize) -> Vec<usize> {
    fn go(
        adj: &[u32],
        bmask: u32,
        cells: Vec<Vec<usize>>,
        best: &mut Option<(Vec<bool>, Vec<usize>)>,
    ) {
        let cells = refine(adj, cells);
        match cells.iter().position(|c| c.len() > 1) {
            None => {
                let order: Vec<usize> = cells.into_iter().map(|c| c[0]).collect();
                let code = full_code(adj, bmask, &order);
                if best.as_ref().is_none_or(|(b, _)| code < *b) {
                    *best = Some((code, order));
                }
            }
            Some(t) => {
                for &v in &cells[t] {
                    let mut split = cells.clone();
                    let rest: Vec<usize> = split[t].iter().copied().filter(|&w| w != v).collect();
                    split[t] = vec![v];
                    split.insert(t + 1, rest);
                    go(adj, bmask, split, best);
                }
            }
        }
    }
    let (bd, inner): (Vec<usize>, Vec<usize>) = (0..n).partition(|&v| bmask >> v & 1 == 1);
    let cells: Vec<Vec<usize>> = [inner, bd].into_iter().filter(|c| !c.is_empty()).collect();
    let mut best = None;
    go(adj, bmask, cells, &mut best);
    best.map(|(_, o)| o).unwrap_or_default()
}

/// Canonical labeling of `(g, boundary)`. Returns the type and `position`,
/// where `position[v]` is the canonical id of vertex `v`.
pub fn canonical_labeling(g: &Graph, boundary: &[usize]) -> (IsoType, Vec<usize>) {
    let n = g.vertex_count();
    assert!(n <= MAX_ORDER, "component too large for canonical labeling");
    let adj = adjacency_masks(g);
    let bmask = boundary.iter().fold(0u32, |m, &b| m | 1 << b);
    let order = if n <= EXHAUSTIVE_ORDER {
        exhaustive_order(&adj, bmask, n)
    } else {
        refined_order(&adj, bmask, n)
    };
    let mut position = vec![0; n];
    for (k, &v) in order.iter().enumerate() {
        position[v] = k;
    }
    let mut edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (position[a as usize], position[b as usize]);
            (x.min(y), x.max(y))
        })
        .collect();
    edges.sort_unstable();
    let mut bd: Vec<usize> = boundary.iter().map(|&b| position[b]).collect();
    bd.sort_unstable();
    bd.dedup();
    (
        IsoType {
            v: n,
            edges,
            boundary: bd,
        },
        position,
    )
}

pub fn canonicalize(g: &Graph, boundary: &[usize], s: usize) -> Result<IsoType, IsoTypeError> {
    let n = g.vertex_count();
    if n < 2 || n > s.min(MAX_ORDER) {
        return Err(IsoTypeError::SizeOutOfRange {
            order: n,
            min: 2,
            max: s.min(MAX_ORDER),
        });
    }
    Ok(canonical_labeling(g, boundary).0)
}

/// `2^{s²}`, the bound on the number of isomorphism types with at most `s`
/// vertices.
pub fn sigma_bound(s: usize) -> Result<BigUint, IsoTypeError> {
    if s < 2 {
        return Err(IsoTypeError::SizeOutOfRange {
            order: s,
            min: 2,
            max: usize::MAX,
        });
    }
    Ok(BigUint::from(1u8) << (s * s))
}

/// Interns isomorphism types and memoizes canonical labelings of labeled
/// inputs.
#[derive(Clone, Debug, Default)]
pub struct TypeRegistry {
    types: Vec<IsoType>,
    index: HashMap<IsoType, usize>,
    cache: HashMap<(usize, Vec<(u32, u32)>, u32), (usize, Vec<usize>)>,
}

impl TypeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Type id of `(g, boundary)` and the canonical position of each vertex.
    pub fn classify(&mut self, g: &Graph, boundary: &[usize]) -> (usize, Vec<usize>) {
        let bmask = boundary.iter().fold(0u32, |m, &b| m | 1 << b);
        let key = (g.vertex_count(), g.edges().to_vec(), bmask);
        if let Some(hit) = self.cache.get(&key) {
            return hit.clone();
        }
        let (ty, position) = canonical_labeling(g, boundary);
        let id = match self.index.get(&ty) {
            Some(&id) => id,
            None => {
                self.types.push(ty.clone());
                self.index.insert(ty, self.types.len() - 1);
                self.types.len() - 1
            }
        };
        self.cache.insert(key, (id, position.clone()));
        (id, position)
    }

    pub fn get(&self, id: usize) -> &IsoType {
        &self.types[id]
    }

    pub fn id_of(&self, ty: &IsoType) -> Option<usize> {
        self.index.get(ty).copied()
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn types(&self) -> &[IsoType] {
        &self.types
    }

    /// Type ids sorted by [`IsoType::density_cmp`].
    pub fn density_order(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = (0..self.types.len()).collect();
        ids.sort_by(|&a, &b| self.types[a].density_cmp(&self.types[b]));
        ids
    }
}

/// The multiset of component types of one component graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeCensus {
    /// Types in density order with their counts `ν(S)`.
    pub entries: Vec<(IsoType, usize)>,
}

impl TypeCensus {
    pub fn count(&self, ty: &IsoType) -> usize {
        self.entries
            .iter()
            .find(|(t, _)| t == ty)
            .map_or(0, |(_, c)| *c)
    }

    pub fn total_vertices(&self) -> usize {
        self.entries.iter().map(|(t, c)| t.v * c).sum()
    }

    pub fn total_edges(&self) -> usize {
        self.entries.iter().map(|(t, c)| t.edges.len() * c).sum()
    }

    pub fn distinct(&self) -> usize {
        self.entries.len()
    }
}

/// Census of a list of components, each given as a graph with its boundary.
pub fn census(parts: &[(Graph, Vec<usize>)]) -> TypeCensus {
    let mut counts: HashMap<IsoType, usize> = HashMap::new();
    for (g, bd) in parts {
        *counts.entry(canonical_labeling(g, bd).0).or_default() += 1;
    }
    let mut entries: Vec<(IsoType, usize)> = counts.into_iter().collect();
    entries.sort_by(|a, b| a.0.density_cmp(&b.0));
    TypeCensus { entries }
}
