//! Seeded instance generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphSequence};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerateError {
    #[error("cannot generate {kind} instances: {reason}")]
    GenerationFailed { kind: &'static str, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    RandomTrees,
    RandomOuterplanar,
    Caterpillars,
    GyarfasExact,
}

impl InstanceKind {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "random-trees" => InstanceKind::RandomTrees,
            "random-outerplanar" => InstanceKind::RandomOuterplanar,
            "caterpillars" => InstanceKind::Caterpillars,
            "gyarfas-exact" => InstanceKind::GyarfasExact,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::RandomTrees => "random-trees",
            InstanceKind::RandomOuterplanar => "random-outerplanar",
            InstanceKind::Caterpillars => "caterpillars",
            InstanceKind::GyarfasExact => "gyarfas-exact",
        }
    }
}

pub const DEFAULT_FILL: f64 = 0.9;

/// Builds a sequence of the given kind. Graph orders are drawn uniformly
/// from `2..=n` and graphs are appended until the next one would push the
/// edge sum past `fill · C(n,2)`. `gyarfas-exact` ignores `fill`.
pub fn generate_instance(
    kind: InstanceKind,
    n: usize,
    delta_max: usize,
    seed: u64,
    fill: f64,
) -> Result<GraphSequence, GenerateError> {
    let fail = |reason: &str| GenerateError::GenerationFailed {
        kind: kind.name(),
        reason: reason.to_string(),
    };
    if n < 2 {
        return Err(fail("n must be at least 2"));
    }
    if delta_max == 0 {
        return Err(fail("the degree bound must be positive"));
    }
    let min_delta = match kind {
        InstanceKind::RandomOuterplanar => 2,
        _ => 1,
    };
    if delta_max < min_delta {
        return Err(fail("the degree bound is below what the family needs"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if kind == InstanceKind::GyarfasExact {
        if delta_max < n.saturating_sub(1).min(2) {
            return Err(fail("trees on 3 or more vertices need degree 2"));
        }
        let graphs = (1..=n)
            .map(|order| random_tree(order, delta_max, &mut rng))
            .collect();
        return Ok(GraphSequence::new(n, delta_max, graphs));
    }
    if !(0.0..=1.0).contains(&fill) {
        return Err(fail("fill must lie in [0, 1]"));
    }
    let target = (fill * (n * (n - 1) / 2) as f64).floor() as usize;
    let mut graphs = Vec::new();
    let mut total = 0;
    loop {
        let order = rng.gen_range(2..=n);
        let g = match kind {
            InstanceKind::RandomTrees => random_tree(order, delta_max, &mut rng),
            InstanceKind::Caterpillars => caterpillar(order, delta_max, &mut rng),
            InstanceKind::RandomOuterplanar => random_outerplanar(order, delta_max, &mut rng),
            InstanceKind::GyarfasExact => unreachable!(),
        };
        if total + g.edge_count() > target {
            break;
        }
        total += g.edge_count();
        graphs.push(g);
    }
    Ok(GraphSequence::new(n, delta_max, graphs))
}

fn shuffled(g: &Graph, rng: &mut ChaCha8Rng) -> Graph {
    let mut perm: Vec<usize> = (0..g.vertex_count()).collect();
    perm.shuffle(rng);
    g.relabel(&perm)
}

/// Random recursive tree with degrees capped at `delta`. Falls back to a
/// path when `delta < 2` makes larger trees impossible.
pub fn random_tree(order: usize, delta: usize, rng: &mut ChaCha8Rng) -> Graph {
    if order <= 1 {
        return Graph::empty(order);
    }
    if delta < 2 {
        return Graph::complete(2);
    }
    let mut degree = vec![0usize; order];
    let mut open: Vec<usize> = vec![0];
    let mut edges = Vec::with_capacity(order - 1);
    for v in 1..order {
        let k = rng.gen_range(0..open.len());
        let u = open[k];
        edges.push((u, v));
        degree[u] += 1;
        degree[v] += 1;
        if degree[u] == delta {
            open.swap_remove(k);
        }
        open.push(v);
    }
    shuffled(
        &Graph::new(order, edges).expect("tree edges are valid"),
        rng,
    )
}

/// A spine path with leaves hung on spine vertices while degrees allow.
pub fn caterpillar(order: usize, delta: usize, rng: &mut ChaCha8Rng) -> Graph {
    if order <= 2 || delta < 2 {
        return Graph::complete(order.min(2));
    }
    let spine_len = rng
        .gen_range(1..=order - 1)
        .max(order.div_ceil(delta.max(2) - 1).min(order));
    let spine_len = spine_len.min(order);
    let mut degree = vec![0usize; order];
    let mut edges = Vec::with_capacity(order - 1);
    for v in 1..spine_len {
        edges.push((v - 1, v));
        degree[v - 1] += 1;
        degree[v] += 1;
    }
    let mut open: Vec<usize> = (0..spine_len).filter(|&v| degree[v] < delta).collect();
    for leaf in spine_len..order {
        if open.is_empty() {
            // Extend the spine instead.
            let tail = leaf - 1;
            edges.push((tail, leaf));
            degree[tail] += 1;
            degree[leaf] += 1;
            if degree[leaf] < delta {
                open.push(leaf);
            }
            continue;
        }
        let k = rng.gen_range(0..open.len());
        let u = open[k];
        edges.push((u, leaf));
        degree[u] += 1;
        degree[leaf] += 1;
        if degree[u] == delta {
            open.swap_remove(k);
        }
    }
    shuffled(
        &Graph::new(order, edges).expect("caterpillar edges are valid"),
        rng,
    )
}

/// Random outerplanar graph: a cycle (or an edge for order 2) plus random
/// non-crossing chords that respect the degree bound.
pub fn random_outerplanar(order: usize, delta: usize, rng: &mut ChaCha8Rng) -> Graph {
    if order <= 2 {
        return Graph::complete(order);
    }
    let mut degree = vec![2usize; order];
    let mut edges: Vec<(usize, usize)> = (0..order).map(|v| (v, (v + 1) % order)).collect();
    let mut chords: Vec<(usize, usize)> = Vec::new();
    let attempts = 3 * order;
    for _ in 0..attempts {
        let a = rng.gen_range(0..order);
        let b = rng.gen_range(0..order);
        let (a, b) = (a.min(b), a.max(b));
        if b < a + 2 || (a == 0 && b == order - 1) || degree[a] >= delta || degree[b] >= delta {
            continue;
        }
        let crosses = chords.iter().any(|&(c, d)| {
            let inside = |x: usize| a < x && x < b;
            c != a && c != b && d != a && d != b && inside(c) != inside(d)
        });
        if crosses || chords.contains(&(a, b)) {
            continue;
        }
        chords.push((a, b));
        degree[a] += 1;
        degree[b] += 1;
    }
    edges.extend(chords);
    shuffled(
        &Graph::new(order, edges).expect("outerplanar edges are valid"),
        rng,
    )
}
