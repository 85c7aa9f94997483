//! `(δ, s)`-separations: a small separator `U` whose removal leaves
//! components of order between 2 and `s`.
//!
//! Components larger than `s` are split by the configured strategy, largest
//! first, until every piece has order at most `s`. Pieces of order one are
//! then moved into the separator ([`fixup_singletons`]).

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::SeparationError;
use crate::graph::Graph;
use crate::rational::{to_f64, Rational};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Separation {
    pub separator: Vec<usize>,
    pub components: Vec<Vec<usize>>,
}

impl Separation {
    /// Boundary of each component: vertices with a neighbour in the separator.
    pub fn boundaries(&self, g: &Graph) -> Vec<Vec<usize>> {
        let mut in_sep = vec![false; g.vertex_count()];
        for &u in &self.separator {
            in_sep[u] = true;
        }
        self.components
            .iter()
            .map(|c| {
                c.iter()
                    .copied()
                    .filter(|&v| g.neighbors(v).iter().any(|&w| in_sep[w as usize]))
                    .collect()
            })
            .collect()
    }

    /// Every way this separation fails to be a `(δ, s)`-separation of `g`.
    pub fn problems(&self, g: &Graph, delta: Rational, s: usize) -> Vec<String> {
        let mut out = Vec::new();
        let n = g.vertex_count();
        if (self.separator.len() as i64) * *delta.denom() > *delta.numer() * n as i64 {
            out.push(format!(
                "|U| = {} exceeds delta * {}",
                self.separator.len(),
                n
            ));
        }
        let mut owner = vec![usize::MAX; n];
        for &u in &self.separator {
            if owner[u] != usize::MAX {
                out.push(format!("vertex {u} listed twice"));
            }
            owner[u] = usize::MAX - 1;
        }
        for (k, c) in self.components.iter().enumerate() {
            if c.len() < 2 || c.len() > s {
                out.push(format!("component {k} has order {}", c.len()));
            }
            for &v in c {
                if owner[v] != usize::MAX {
                    out.push(format!("vertex {v} covered twice"));
                }
                owner[v] = k;
            }
        }
        if let Some(v) = owner.iter().position(|&o| o == usize::MAX) {
            out.push(format!("vertex {v} not covered"));
        }
        let mut keep = vec![true; n];
        for &u in &self.separator {
            keep[u] = false;
        }
        let mut flood = g.components_where(&keep);
        let mut stored: Vec<Vec<usize>> = self
            .components
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.sort_unstable();
                c
            })
            .collect();
        flood.sort();
        stored.sort();
        if flood != stored {
            out.push("stored components differ from the components of G - U".into());
        }
        out
    }
}

/// Splits one connected piece (given as an induced graph with local ids) and
/// returns the local ids to put into the separator.
pub type SplitCallback = Arc<dyn Fn(&Graph) -> Vec<usize> + Send + Sync>;

#[derive(Clone)]
pub enum SeparatorStrategy {
    /// Remove a centroid of each oversized tree piece.
    TreeCentroid,
    /// Remove a breadth-first layer near the median depth.
    BfsLayer,
    /// Optimal separator by subset search, for pieces of at most 16 vertices.
    ExhaustiveTiny,
    /// Optimal separator for forests by dynamic programming over subtrees.
    TreeOptimal,
    UserCallback(SplitCallback),
}

impl fmt::Debug for SeparatorStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeparatorStrategy::TreeCentroid => "TreeCentroid",
            SeparatorStrategy::BfsLayer => "BfsLayer",
            SeparatorStrategy::ExhaustiveTiny => "ExhaustiveTiny",
            SeparatorStrategy::TreeOptimal => "TreeOptimal",
            SeparatorStrategy::UserCallback(_) => "UserCallback",
        })
    }
}

impl SeparatorStrategy {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "tree-centroid" => SeparatorStrategy::TreeCentroid,
            "bfs-layer" => SeparatorStrategy::BfsLayer,
            "exhaustive-tiny" => SeparatorStrategy::ExhaustiveTiny,
            "tree-optimal" => SeparatorStrategy::TreeOptimal,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SeparatorConfig {
    /// The family's separator constant `c_G`.
    pub c_family: f64,
    pub strategy: SeparatorStrategy,
}

impl Default for SeparatorConfig {
    fn default() -> Self {
        SeparatorConfig {
            c_family: 1.0,
            strategy: SeparatorStrategy::TreeCentroid,
        }
    }
}

pub const EXHAUSTIVE_LIMIT: usize = 16;

/// Statistics of one `separate` call.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SeparationTrace {
    /// Separator size before singleton fix-up.
    pub initial_separator: usize,
    /// Number of splitting steps performed.
    pub splits: usize,
    /// Largest piece order before each split.
    pub split_orders: Vec<usize>,
}

pub fn separate(
    g: &Graph,
    delta: Rational,
    s: usize,
    cfg: &SeparatorConfig,
) -> Result<Separation, SeparationError> {
    separate_traced(g, delta, s, cfg).map(|(sep, _)| sep)
}

pub fn separate_traced(
    g: &Graph,
    delta: Rational,
    s: usize,
    cfg: &SeparatorConfig,
) -> Result<(Separation, SeparationTrace), SeparationError> {
    if s < 2 {
        return Err(SeparationError::InvalidParameters(format!("s = {s} < 2")));
    }
    if delta <= Rational::from_integer(0) || delta >= Rational::from_integer(1) {
        return Err(SeparationError::InvalidParameters(format!(
            "delta = {delta} not in (0, 1)"
        )));
    }
    if let Some(v) = g.isolated_vertices().first() {
        return Err(SeparationError::IsolatedVertex(*v));
    }
    let n = g.vertex_count();
    let mut in_sep = vec![false; n];
    let mut trace = SeparationTrace::default();
    // Max-heap on order; ties by smallest first vertex for determinism.
    let mut heap: BinaryHeap<(usize, Reverse<usize>, Vec<usize>)> = g
        .components()
        .into_iter()
        .map(|c| (c.len(), Reverse(c[0]), c))
        .collect();
    while let Some((order, _, piece)) = heap.pop() {
        if order <= s {
            continue;
        }
        trace.splits += 1;
        trace.split_orders.push(order);
        let local = g.induced(&piece);
        let cut = split_piece(&local, s, &cfg.strategy)?;
        if cut.is_empty() {
            return Err(SeparationError::StrategyFailed {
                order,
                reason: "empty split".into(),
            });
        }
        for &c in &cut {
            in_sep[piece[c]] = true;
        }
        let keep: Vec<bool> = piece.iter().map(|&v| !in_sep[v]).collect();
        for sub in local.components_where(&keep) {
            let sub: Vec<usize> = sub.into_iter().map(|k| piece[k]).collect();
            heap.push((sub.len(), Reverse(sub[0]), sub));
        }
    }
    let candidate: Vec<usize> = (0..n).filter(|&v| in_sep[v]).collect();
    trace.initial_separator = candidate.len();
    let sep = fixup_singletons(g, &candidate, delta)?;
    Ok((sep, trace))
}

/// Moves every order-one component of `G - U⁰` into the separator and checks
/// the `δ·v(G)` budget.
pub fn fixup_singletons(
    g: &Graph,
    candidate: &[usize],
    delta: Rational,
) -> Result<Separation, SeparationError> {
    let n = g.vertex_count();
    let mut keep = vec![true; n];
    for &u in candidate {
        keep[u] = false;
    }
    let mut separator: Vec<usize> = candidate.to_vec();
    let mut components = Vec::new();
    for c in g.components_where(&keep) {
        if c.len() == 1 {
            separator.push(c[0]);
        } else {
            components.push(c);
        }
    }
    separator.sort_unstable();
    separator.dedup();
    if (separator.len() as i64) * *delta.denom() > *delta.numer() * n as i64 {
        return Err(SeparationError::BudgetExceeded {
            required: separator.len(),
            budget: to_f64(delta) * n as f64,
        });
    }
    Ok(Separation {
        separator,
        components,
    })
}

/// `6 c_G n^{1/2} 2^{i/2}`: the bound on the separator accumulated over `i`
/// halving rounds.
pub fn iterated_separator_bound(n: usize, c_g: f64, i: u32) -> f64 {
    6.0 * c_g * (n as f64).sqrt() * 2f64.powf(i as f64 / 2.0)
}

/// Smallest number of halving rounds after which pieces of a graph on `n`
/// vertices have order at most `s` (`n / 2^i <= s`), at least one.
pub fn halving_rounds(n: usize, s: usize) -> u32 {
    let mut i = 1;
    while n > s << i {
        i += 1;
    }
    i
}

fn split_piece(
    local: &Graph,
    s: usize,
    strategy: &SeparatorStrategy,
) -> Result<Vec<usize>, SeparationError> {
    match strategy {
        SeparatorStrategy::TreeCentroid => {
            if !local.is_forest() {
                return Err(SeparationError::StrategyFailed {
                    order: local.vertex_count(),
                    reason: "tree-centroid needs a forest".into(),
                });
            }
            Ok(vec![tree_centroid(local)])
        }
        SeparatorStrategy::BfsLayer => Ok(bfs_layer_cut(local)),
        SeparatorStrategy::ExhaustiveTiny => {
            if local.vertex_count() <= EXHAUSTIVE_LIMIT {
                Ok(exhaustive_separator(local, s))
            } else {
                Ok(bfs_layer_cut(local))
            }
        }
        SeparatorStrategy::TreeOptimal => {
            if !local.is_forest() {
                return Err(SeparationError::StrategyFailed {
                    order: local.vertex_count(),
                    reason: "tree-optimal needs a forest".into(),
                });
            }
            Ok(optimal_forest_separator(local, s))
        }
        SeparatorStrategy::UserCallback(cb) => {
            let mut cut = cb(local);
            cut.retain(|&v| v < local.vertex_count());
            cut.sort_unstable();
            cut.dedup();
            Ok(cut)
        }
    }
}

/// Centroid of a tree: the vertex minimizing the largest remaining branch,
/// smallest id on ties. Every branch then has order at most `n / 2`.
pub fn tree_centroid(tree: &Graph) -> usize {
    let n = tree.vertex_count();
    let mut parent = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![0usize];
    let mut seen = vec![false; n];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        order.push(v);
        for &w in tree.neighbors(v) {
            let w = w as usize;
            if !seen[w] {
                seen[w] = true;
                parent[w] = v;
                stack.push(w);
            }
        }
    }
    let mut size = vec![1usize; n];
    for &v in order.iter().rev() {
        if parent[v] != usize::MAX {
            size[parent[v]] += size[v];
        }
    }
    let mut best = (usize::MAX, usize::MAX);
    for v in 0..n {
        let mut worst = n - size[v];
        for &w in tree.neighbors(v) {
            let w = w as usize;
            if parent[w] == v {
                worst = worst.max(size[w]);
            }
        }
        if (worst, v) < best {
            best = (worst, v);
        }
    }
    best.1
}

fn bfs_layers(g: &Graph, root: usize) -> Vec<Vec<usize>> {
    let mut dist = vec![usize::MAX; g.vertex_count()];
    let mut layers: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::from([root]);
    dist[root] = 0;
    while let Some(v) = queue.pop_front() {
        if layers.len() <= dist[v] {
            layers.push(Vec::new());
        }
        layers[dist[v]].push(v);
        for &w in g.neighbors(v) {
            let w = w as usize;
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    layers
}

/// Removes one BFS layer from a peripheral root. Layers below and above the
/// cut are disconnected from each other, so both sides shrink.
fn bfs_layer_cut(g: &Graph) -> Vec<usize> {
    let n = g.vertex_count();
    let first = bfs_layers(g, 0);
    let root = *first.last().and_then(|l| l.iter().min()).unwrap_or(&0);
    let layers = bfs_layers(g, root);
    if layers.len() <= 2 {
        // Diameter at most 2: cut the highest-degree vertex.
        let hub = (0..n)
            .max_by_key(|&v| (g.degree(v), Reverse(v)))
            .unwrap_or(0);
        return vec![hub];
    }
    let mut best: Option<(usize, usize, usize)> = None;
    let mut below = 0;
    for (k, layer) in layers.iter().enumerate() {
        let above = n - below - layer.len();
        let worst = below.max(above);
        if k > 0 && 3 * worst <= 2 * n {
            let key = (layer.len(), worst, k);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
        below += layer.len();
    }
    let k = match best {
        Some((_, _, k)) => k,
        None => {
            // Fall back to the median layer.
            let mut acc = 0;
            let mut k = 1;
            for (idx, layer) in layers.iter().enumerate().skip(1) {
                acc += layers[idx - 1].len();
                k = idx;
                if 2 * (acc + layer.len()) >= n {
                    break;
                }
            }
            k
        }
    };
    let mut cut = layers[k].clone();
    cut.sort_unstable();
    cut
}

/// Minimum vertex set whose removal leaves components of order in `[2, s]`.
fn exhaustive_separator(g: &Graph, s: usize) -> Vec<usize> {
    let n = g.vertex_count();
    assert!(n <= EXHAUSTIVE_LIMIT);
    let adj: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w))
        .collect();
    let full = (1u32 << n) - 1;
    let valid = |removed: u32| -> bool {
        let mut left = full & !removed;
        while left != 0 {
            let start = left.trailing_zeros();
            let mut comp = 1u32 << start;
            let mut frontier = comp;
            while frontier != 0 {
                let v = frontier.trailing_zeros();
                frontier &= frontier - 1;
                let next = adj[v as usize] & left & !comp;
                comp |= next;
                frontier |= next;
            }
            let size = comp.count_ones() as usize;
            if size < 2 || size > s {
                return false;
            }
            left &= !comp;
        }
        true
    };
    for k in 0..=n {
        // Masks with exactly k bits in increasing order (Gosper's hack).
        if k == 0 {
            if valid(0) {
                return Vec::new();
            }
            continue;
        }
        let mut mask: u32 = (1 << k) - 1;
        while mask <= full {
            if valid(mask) {
                return (0..n).filter(|&v| mask >> v & 1 == 1).collect();
            }
            let c = mask & mask.wrapping_neg();
            let r = mask + c;
            mask = (((r ^ mask) >> 2) / c) | r;
        }
    }
    (0..n).collect()
}

/// Minimum separator of a forest with all remaining components of order in
/// `[2, s]`, by a knapsack over children.
fn optimal_forest_separator(g: &Graph, s: usize) -> Vec<usize> {
    const INF: usize = usize::MAX / 4;
    let n = g.vertex_count();
    let mut parent = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut roots = Vec::new();
    let mut seen = vec![false; n];
    for r in 0..n {
        if seen[r] {
            continue;
        }
        roots.push(r);
        seen[r] = true;
        let mut stack = vec![r];
        while let Some(v) = stack.pop() {
            order.push(v);
            for &w in g.neighbors(v) {
                let w = w as usize;
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = v;
                    stack.push(w);
                }
            }
        }
    }
    let children: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            g.neighbors(v)
                .iter()
                .map(|&w| w as usize)
                .filter(|&w| parent[w] == v)
                .collect()
        })
        .collect();
    // cut[v]: v in U. open[v][k]: v's open piece has order k (1..=s).
    // steps[v][j][k]: open table after absorbing the first j children.
    let mut cut = vec![0usize; n];
    let mut open = vec![vec![INF; s + 1]; n];
    let mut steps: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
    let closed = |cut: &[usize], open: &[Vec<usize>], c: usize| -> usize {
        let mut best = cut[c];
        for k in 2..=s {
            best = best.min(open[c][k]);
        }
        best
    };
    for &v in order.iter().rev() {
        let mut in_cut = 1;
        let mut table = vec![INF; s + 1];
        table[1] = 0;
        let mut history = vec![table.clone()];
        for &c in &children[v] {
            in_cut += closed(&cut, &open, c);
            // A child adjacent to an open parent is either cut or merged.
            let cl = cut[c];
            let mut next = vec![INF; s + 1];
            for k in 1..=s {
                if table[k] >= INF {
                    continue;
                }
                next[k] = next[k].min(table[k] + cl);
                for j in 1..=s - k {
                    if open[c][j] < INF {
                        next[k + j] = next[k + j].min(table[k] + open[c][j]);
                    }
                }
            }
            table = next;
            history.push(table.clone());
        }
        cut[v] = in_cut;
        open[v] = table;
        steps[v] = history;
    }
    // Reconstruct: state 0 = in separator, k >= 1 = open piece of order k.
    let mut removed = Vec::new();
    let mut work: Vec<(usize, usize)> = Vec::new();
    for &r in &roots {
        let mut state = 0;
        let mut best = cut[r];
        for k in 2..=s {
            if open[r][k] < best {
                best = open[r][k];
                state = k;
            }
        }
        work.push((r, state));
    }
    while let Some((v, state)) = work.pop() {
        let kids = &children[v];
        if state == 0 {
            removed.push(v);
            for &c in kids {
                let mut st = 0;
                let mut best = cut[c];
                for k in 2..=s {
                    if open[c][k] < best {
                        best = open[c][k];
                        st = k;
                    }
                }
                work.push((c, st));
            }
            continue;
        }
        let mut k = state;
        for j in (0..kids.len()).rev() {
            let c = kids[j];
            let prev = &steps[v][j];
            let target = steps[v][j + 1][k];
            if prev[k] < INF && prev[k] + cut[c] == target {
                work.push((c, 0));
                continue;
            }
            let mut found = false;
            for jj in 1..k {
                if prev[k - jj] < INF && open[c][jj] < INF && prev[k - jj] + open[c][jj] == target {
                    work.push((c, jj));
                    k -= jj;
                    found = true;
                    break;
                }
            }
            debug_assert!(found, "dp reconstruction lost track");
        }
        debug_assert_eq!(k, 1);
    }
    removed.sort_unstable();
    removed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    /// Smallest separator over all subsets satisfying the `(δ, s)` rules.
    fn brute_min_separator(g: &Graph, s: usize) -> usize {
        let n = g.vertex_count();
        (0u32..1 << n)
            .filter(|&mask| {
                let keep: Vec<bool> = (0..n).map(|v| mask >> v & 1 == 0).collect();
                g.components_where(&keep)
                    .iter()
                    .all(|c| c.len() >= 2 && c.len() <= s)
            })
            .map(|m| m.count_ones() as usize)
            .min()
            .unwrap()
    }

    #[test]
    fn path9_center_split() {
        let g = Graph::path(9);
        assert_eq!(brute_min_separator(&g, 4), 1);
        let sep = separate(&g, ratio(1, 5), 4, &SeparatorConfig::default()).unwrap();
        assert_eq!(sep.separator, vec![4]);
        assert_eq!(sep.components, vec![vec![0, 1, 2, 3], vec![5, 6, 7, 8]]);
        assert!(sep.problems(&g, ratio(1, 5), 4).is_empty());
    }

    #[test]
    fn k2_needs_nothing() {
        let g = Graph::complete(2);
        let sep = separate(&g, ratio(1, 10), 2, &SeparatorConfig::default()).unwrap();
        assert!(sep.separator.is_empty());
        assert_eq!(sep.components, vec![vec![0, 1]]);
    }

    #[test]
    fn star_blows_budget() {
        let g = Graph::star(3);
        // Every valid separator of K_{1,3} with s = 2 has at least 2 vertices.
        assert_eq!(brute_min_separator(&g, 2), 2);
        let err = separate(&g, ratio(3, 10), 2, &SeparatorConfig::default()).unwrap_err();
        assert!(matches!(
            err,
            SeparationError::BudgetExceeded { required: 4, .. }
        ));
    }

    #[test]
    fn fixup_on_p3_and_p9() {
        let err = fixup_singletons(&Graph::path(3), &[1], ratio(1, 2)).unwrap_err();
        assert!(matches!(
            err,
            SeparationError::BudgetExceeded { required: 3, .. }
        ));
        let sep = fixup_singletons(&Graph::path(9), &[4], ratio(1, 5)).unwrap();
        assert_eq!(sep.separator, vec![4]);
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        let sep = fixup_singletons(&g, &[], ratio(1, 5)).unwrap();
        assert!(sep.separator.is_empty());
        assert_eq!(sep.components.len(), 2);
    }

    #[test]
    fn bound_values() {
        assert!((iterated_separator_bound(100, 1.0, 2) - 120.0).abs() < 1e-9);
        assert_eq!(iterated_separator_bound(0, 1.0, 3), 0.0);
        let n = 10_000f64;
        for i in 1..=20u32 {
            let s2 = 2f64.sqrt();
            let geometric = 2.0 * n.sqrt() * (s2.powi(i as i32) - 1.0) / (s2 - 1.0);
            assert!(geometric < iterated_separator_bound(10_000, 1.0, i));
        }
        assert_eq!(halving_rounds(200, 16), 4);
        assert_eq!(halving_rounds(10, 16), 1);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = Graph::new(3, [(0, 1)]).unwrap();
        assert!(matches!(
            separate(&g, ratio(1, 2), 2, &SeparatorConfig::default()),
            Err(SeparationError::IsolatedVertex(2))
        ));
        let p = Graph::path(4);
        assert!(separate(&p, ratio(1, 2), 1, &SeparatorConfig::default()).is_err());
        assert!(separate(&p, ratio(1, 1), 2, &SeparatorConfig::default()).is_err());
        let cfg = SeparatorConfig {
            strategy: SeparatorStrategy::TreeCentroid,
            ..Default::default()
        };
        assert!(matches!(
            separate(&Graph::cycle(6), ratio(1, 2), 3, &cfg),
            Err(SeparationError::StrategyFailed { .. })
        ));
    }

    #[test]
    fn exhaustive_and_dp_are_optimal_on_small_trees() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let n = rng.gen_range(2..=12);
            let edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
            let g = Graph::new(n, edges).unwrap();
            for s in 2..=4 {
                let best = brute_min_separator(&g, s);
                assert_eq!(exhaustive_separator(&g, s).len(), best);
                let dp = optimal_forest_separator(&g, s);
                assert_eq!(dp.len(), best, "{g:?} s={s}");
                let sep = fixup_singletons(&g, &dp, ratio(99, 100)).unwrap();
                assert_eq!(sep.separator.len(), best);
                assert!(sep.problems(&g, ratio(99, 100), s).is_empty());
            }
        }
    }

    #[test]
    fn bfs_layer_splits_cycles_and_grids() {
        let cfg = SeparatorConfig {
            strategy: SeparatorStrategy::BfsLayer,
            ..Default::default()
        };
        let g = Graph::cycle(30);
        let sep = separate(&g, ratio(1, 2), 5, &cfg).unwrap();
        assert!(sep.problems(&g, ratio(1, 2), 5).is_empty());
        let mut edges = Vec::new();
        for r in 0..6 {
            for c in 0..6 {
                let v = r * 6 + c;
                if c + 1 < 6 {
                    edges.push((v, v + 1));
                }
                if r + 1 < 6 {
                    edges.push((v, v + 6));
                }
            }
        }
        let grid = Graph::new(36, edges).unwrap();
        let sep = separate(&grid, ratio(3, 4), 8, &cfg).unwrap();
        assert!(sep.problems(&grid, ratio(3, 4), 8).is_empty());
    }

    #[test]
    fn user_callback_is_used() {
        let cb: SplitCallback = Arc::new(|g: &Graph| vec![g.vertex_count() / 2]);
        let cfg = SeparatorConfig {
            strategy: SeparatorStrategy::UserCallback(cb),
            c_family: 1.0,
        };
        let g = Graph::path(11);
        let sep = separate(&g, ratio(1, 2), 5, &cfg).unwrap();
        assert_eq!(sep.separator, vec![5]);
    }
}
