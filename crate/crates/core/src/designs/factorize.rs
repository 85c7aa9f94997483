//! `(S, η)`-factorizations of `K_ℓ`: edge-disjoint `S`-matchings, each almost
//! perfect, jointly covering almost every edge.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::resolvable::{family, resolvable_decomposition, DesignReport};
use crate::edge_table::EdgeTable;
use crate::error::DesignError;
use crate::graph::Graph;
use crate::rational::{ratio, serde_rational, Rational};

pub const DEFAULT_RESTARTS: usize = 32;

/// A placement lists the host vertex of each pattern vertex.
pub type Placement = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaFactorization {
    pub l: usize,
    pub pattern: Graph,
    pub matchings: Vec<Vec<Placement>>,
    #[serde(with = "serde_rational")]
    pub eta_achieved: Rational,
}

impl EtaFactorization {
    pub fn covered_edges(&self) -> usize {
        self.matchings.iter().map(|m| m.len()).sum::<usize>() * self.pattern.edge_count()
    }

    pub fn min_matching_size(&self) -> usize {
        self.matchings.iter().map(|m| m.len()).min().unwrap_or(0)
    }
}

/// `t_max = ⌊(ℓ-1)v / 2e⌋`, the most edge-disjoint `S`-matchings an
/// `(S, η)`-factorization may contain.
pub fn matching_cap(l: usize, pattern: &Graph) -> usize {
    let e = pattern.edge_count();
    if e == 0 {
        return 0;
    }
    ((l - 1) * pattern.vertex_count() / (2 * e)).max(1)
}

/// Smallest `η` for which `matchings` satisfy both clauses: every matching
/// has at least `(1-η)ℓ/v` placements, and at most `η·C(ℓ,2)` edges are left.
pub fn eta_of(l: usize, pattern: &Graph, matchings: &[Vec<Placement>]) -> Rational {
    let slots = (l * (l - 1) / 2) as i64;
    if matchings.is_empty() || slots == 0 {
        return ratio(1, 1);
    }
    let covered = (matchings.iter().map(|m| m.len()).sum::<usize>() * pattern.edge_count()) as i64;
    let uncovered = ratio(slots - covered.min(slots), slots);
    let min_size = matchings.iter().map(|m| m.len()).min().unwrap_or(0) as i64;
    let size_gap = ratio(
        l as i64 - min_size * pattern.vertex_count() as i64,
        l as i64,
    );
    uncovered.max(size_gap).max(ratio(0, 1))
}

/// A lower bound on the `η` of any factorization within the matching cap:
/// at most `⌊ℓ/v⌋` placements per matching and `t_max` matchings.
pub fn eta_floor(l: usize, pattern: &Graph) -> Rational {
    let (v, e) = (pattern.vertex_count(), pattern.edge_count());
    let slots = (l * (l - 1) / 2) as i64;
    if v == 0 || v > l || slots == 0 {
        return ratio(1, 1);
    }
    let per = l / v;
    let covered = (matching_cap(l, pattern) * per * e) as i64;
    let uncovered = ratio(slots - covered.min(slots), slots);
    let size_gap = ratio((l - per * v) as i64, l as i64);
    uncovered.max(size_gap)
}

fn is_complete(g: &Graph) -> bool {
    let v = g.vertex_count();
    g.edge_count() == v * (v - 1) / 2
}

/// Places the matchings of a design on `K_ℓ` directly when `S` is a clique
/// with a known resolvable decomposition (or `K_2` with `ℓ` odd).
fn from_design(l: usize, pattern: &Graph, rng: &mut ChaCha8Rng) -> Option<Vec<Vec<Placement>>> {
    let v = pattern.vertex_count();
    if !is_complete(pattern) {
        return None;
    }
    let (host, drop_last) = if family(l, v).is_some() {
        (l, false)
    } else if v == 2 && l % 2 == 1 {
        (l + 1, true)
    } else {
        return None;
    };
    let d = resolvable_decomposition(host, v).ok()?;
    let mut perm: Vec<usize> = (0..host).collect();
    perm.shuffle(rng);
    let mut matchings: Vec<Vec<Placement>> = d
        .factors
        .iter()
        .map(|f| {
            f.iter()
                .map(|b| b.iter().map(|&x| perm[x]).collect::<Vec<_>>())
                .filter(|b: &Vec<usize>| !drop_last || b.iter().all(|&x| x < l))
                .collect()
        })
        .collect();
    matchings.shuffle(rng);
    matchings.truncate(matching_cap(l, pattern));
    Some(matchings)
}

struct Climb<'a> {
    l: usize,
    pattern_edges: Vec<(usize, usize)>,
    v: usize,
    k: usize,
    owner: Vec<u32>,
    placements: Vec<Option<(usize, Placement)>>,
    free_ids: Vec<u32>,
    /// Placement covering each vertex, per matching.
    vertex_owner: Vec<Vec<u32>>,
    sizes: Vec<usize>,
    /// Pattern vertices in breadth-first order, and pattern adjacency.
    order: Vec<usize>,
    pattern_adj: Vec<Vec<usize>>,
    rng: &'a mut ChaCha8Rng,
}

const FREE: u32 = u32::MAX;

impl Climb<'_> {
    fn slot(&self, a: usize, b: usize) -> usize {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        a * (2 * self.l - a - 1) / 2 + (b - a - 1)
    }

    fn insert(&mut self, j: usize, p: Placement) {
        let id = match self.free_ids.pop() {
            Some(id) => id,
            None => {
                self.placements.push(None);
                (self.placements.len() - 1) as u32
            }
        };
        for &(a, b) in &self.pattern_edges {
            let s = self.slot(p[a], p[b]);
            self.owner[s] = id;
        }
        for &x in &p {
            self.vertex_owner[j][x] = id;
        }
        self.sizes[j] += 1;
        self.placements[id as usize] = Some((j, p));
    }

    fn remove(&mut self, id: u32) {
        let (j, p) = self.placements[id as usize].take().expect("live placement");
        for &(a, b) in &self.pattern_edges {
            let s = self.slot(p[a], p[b]);
            self.owner[s] = FREE;
        }
        for &x in &p {
            self.vertex_owner[j][x] = FREE;
        }
        self.sizes[j] -= 1;
        self.free_ids.push(id);
    }

    /// Random placement of `S` for matching `j`, built vertex by vertex.
    /// The first vertex is one that `j` does not cover yet; later vertices
    /// prefer free edges to the placed neighbours, then vertices `j` leaves
    /// uncovered.
    fn propose(&mut self, j: usize) -> Option<Placement> {
        let open: Vec<usize> = (0..self.l)
            .filter(|&x| self.vertex_owner[j][x] == FREE)
            .collect();
        if open.is_empty() {
            return None;
        }
        let mut p = vec![usize::MAX; self.v];
        let mut used = vec![false; self.l];
        let first = open[self.rng.gen_range(0..open.len())];
        p[self.order[0]] = first;
        used[first] = true;
        for &pv in &self.order[1..] {
            let placed: Vec<usize> = self.pattern_adj[pv]
                .iter()
                .filter(|&&w| p[w] != usize::MAX)
                .map(|&w| p[w])
                .collect();
            let mut best: Vec<usize> = Vec::new();
            let mut best_score = 0;
            for x in 0..self.l {
                if used[x] {
                    continue;
                }
                let free = placed.iter().all(|&y| self.owner[self.slot(x, y)] == FREE);
                let score = 1 + 2 * free as usize + (self.vertex_owner[j][x] == FREE) as usize;
                if score > best_score {
                    best_score = score;
                    best.clear();
                }
                if score == best_score {
                    best.push(x);
                }
            }
            if best.is_empty() {
                return None;
            }
            let pool = if self.rng.gen_bool(0.9) {
                best
            } else {
                (0..self.l).filter(|&x| !used[x]).collect()
            };
            let x = pool[self.rng.gen_range(0..pool.len())];
            p[pv] = x;
            used[x] = true;
        }
        Some(p)
    }

    fn run(&mut self, t: usize, max_steps: usize) {
        let target = t * self.k;
        let mut total = 0;
        for _ in 0..max_steps {
            if total == target {
                break;
            }
            let deficient: Vec<usize> = (0..t).filter(|&j| self.sizes[j] < self.k).collect();
            let j = deficient[self.rng.gen_range(0..deficient.len())];
            let Some(p) = self.propose(j) else { continue };
            let mut conflict = FREE;
            let mut many = false;
            let owners = self
                .pattern_edges
                .iter()
                .map(|&(a, b)| self.owner[self.slot(p[a], p[b])])
                .chain(p.iter().map(|&x| self.vertex_owner[j][x]));
            for o in owners {
                if o != FREE && o != conflict {
                    if conflict != FREE {
                        many = true;
                        break;
                    }
                    conflict = o;
                }
            }
            if many {
                continue;
            }
            if conflict == FREE {
                total += 1;
            } else {
                self.remove(conflict);
            }
            self.insert(j, p);
        }
    }

    fn matchings(&self, t: usize) -> Vec<Vec<Placement>> {
        let mut out = vec![Vec::new(); t];
        for (j, p) in self.placements.iter().flatten() {
            out[*j].push(p.clone());
        }
        for m in &mut out {
            m.sort();
        }
        out
    }
}

/// Keeps the subset of matchings (largest first) with the smallest `η`.
fn trim(l: usize, pattern: &Graph, mut matchings: Vec<Vec<Placement>>) -> Vec<Vec<Placement>> {
    matchings.retain(|m| !m.is_empty());
    matchings.sort_by_key(|m| std::cmp::Reverse(m.len()));
    let mut best = matchings.len();
    let mut best_eta = eta_of(l, pattern, &matchings);
    for keep in (1..matchings.len()).rev() {
        let eta = eta_of(l, pattern, &matchings[..keep]);
        if eta < best_eta {
            best = keep;
            best_eta = eta;
        }
    }
    matchings.truncate(best);
    matchings
}

fn bfs_order(g: &Graph) -> Vec<usize> {
    let n = g.vertex_count();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for &w in g.neighbors(x) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    queue.push_back(w as usize);
                }
            }
        }
    }
    order
}

fn climb_once(l: usize, pattern: &Graph, rng: &mut ChaCha8Rng) -> Vec<Vec<Placement>> {
    let v = pattern.vertex_count();
    let t = matching_cap(l, pattern);
    let k = l / v;
    let mut c = Climb {
        l,
        pattern_edges: pattern
            .edges()
            .iter()
            .map(|&(a, b)| (a as usize, b as usize))
            .collect(),
        v,
        k,
        owner: vec![FREE; l * (l - 1) / 2],
        placements: Vec::new(),
        free_ids: Vec::new(),
        vertex_owner: vec![vec![FREE; l]; t],
        sizes: vec![0; t],
        order: bfs_order(pattern),
        pattern_adj: (0..v)
            .map(|x| pattern.neighbors(x).iter().map(|&w| w as usize).collect())
            .collect(),
        rng,
    };
    c.run(t, 40_000 + 1_500 * t * k);
    c.matchings(t)
}

/// Best factorization over `restarts` runs; stops early once `target` is met.
pub fn factorize_best(
    l: usize,
    pattern: &Graph,
    target: Rational,
    seed: u64,
    restarts: usize,
) -> Result<EtaFactorization, DesignError> {
    let v = pattern.vertex_count();
    if v > l || v < 2 {
        return Err(DesignError::PatternTooLarge { pattern: v, l });
    }
    if pattern.edge_count() == 0 {
        return Err(DesignError::PatternTooLarge { pattern: v, l });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if let Some(matchings) = from_design(l, pattern, &mut rng) {
        let matchings = trim(l, pattern, matchings);
        let eta = eta_of(l, pattern, &matchings);
        return Ok(EtaFactorization {
            l,
            pattern: pattern.clone(),
            matchings,
            eta_achieved: eta,
        });
    }
    let mut best: Option<EtaFactorization> = None;
    let good_enough = target.max(eta_floor(l, pattern));
    for _ in 0..restarts.max(1) {
        let matchings = trim(l, pattern, climb_once(l, pattern, &mut rng));
        let eta = eta_of(l, pattern, &matchings);
        if best.as_ref().is_none_or(|b| eta < b.eta_achieved) {
            best = Some(EtaFactorization {
                l,
                pattern: pattern.clone(),
                matchings,
                eta_achieved: eta,
            });
        }
        if eta <= good_enough {
            break;
        }
    }
    Ok(best.expect("at least one restart"))
}

/// An `(S, η)`-factorization of `K_ℓ` with `η ≤ eta_target`, or
/// `EtaNotReached` with the best value found.
pub fn eta_factorize(
    l: usize,
    pattern: &Graph,
    eta_target: Rational,
    seed: u64,
) -> Result<EtaFactorization, DesignError> {
    let f = factorize_best(l, pattern, eta_target, seed, DEFAULT_RESTARTS)?;
    if f.eta_achieved > eta_target {
        return Err(DesignError::EtaNotReached {
            achieved: crate::rational::to_f64(f.eta_achieved),
        });
    }
    Ok(f)
}

/// Re-derives both clauses and the matching-count window from the raw
/// placements, at the given `η`.
pub fn verify_factorization(f: &EtaFactorization, eta: Rational) -> DesignReport {
    let mut issues = Vec::new();
    let l = f.l;
    let v = f.pattern.vertex_count() as i64;
    let e = f.pattern.edge_count() as i64;
    let mut table = EdgeTable::new(l);
    for (j, m) in f.matchings.iter().enumerate() {
        let mut seen = vec![false; l];
        for (pi, p) in m.iter().enumerate() {
            if p.len() as i64 != v {
                issues.push(format!(
                    "matching {j} placement {pi} has {} vertices",
                    p.len()
                ));
                continue;
            }
            for &x in p {
                if x >= l {
                    issues.push(format!(
                        "matching {j} placement {pi}: vertex {x} out of range"
                    ));
                } else if seen[x] {
                    issues.push(format!("matching {j}: vertex {x} used twice"));
                } else {
                    seen[x] = true;
                }
            }
            for &(a, b) in f.pattern.edges() {
                let (x, y) = (p[a as usize], p[b as usize]);
                if x < l && y < l && x != y && !table.insert(x, y) {
                    issues.push(format!("edge {{{x}, {y}}} used twice (matching {j})"));
                }
            }
        }
        // (i): |M| · v ≥ (1 - η) ℓ
        if Rational::from_integer(m.len() as i64 * v) < (Rational::from_integer(1) - eta) * l as i64
        {
            issues.push(format!(
                "clause (i): matching {j} has {} placements, below (1-eta)*{l}/{v}",
                m.len()
            ));
        }
    }
    let slots = (l * (l - 1) / 2) as i64;
    let uncovered = slots - table.len() as i64;
    if Rational::from_integer(uncovered) > eta * slots {
        issues.push(format!(
            "clause (ii): {uncovered} of {slots} edges uncovered"
        ));
    }
    let t = Rational::from_integer(f.matchings.len() as i64);
    let upper = Rational::new((l as i64 - 1) * v, 2 * e);
    if t > upper || t < (Rational::from_integer(1) - eta) * upper {
        issues.push(format!(
            "matching count {t} outside [(1-eta)*{upper}, {upper}]"
        ));
    }
    let measured = eta_of(l, &f.pattern, &f.matchings);
    if measured != f.eta_achieved {
        issues.push(format!(
            "stored eta {} differs from measured {}",
            f.eta_achieved, measured
        ));
    }
    DesignReport {
        passed: issues.is_empty(),
        issues,
    }
}
