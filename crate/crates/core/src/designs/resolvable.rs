//! Resolvable `K_m`-decompositions of `K_N`: round-robin, affine geometry and
//! Kirkman triple systems.

use serde::{Deserialize, Serialize};

use super::field::{prime_power, Field};
use crate::edge_table::EdgeTable;
use crate::error::DesignError;

/// Factors of a resolvable decomposition. Each factor partitions `0..N` into
/// blocks of size `m`; every pair lies in exactly one block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvableDecomposition {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub factors: Vec<Vec<Vec<usize>>>,
}

impl ResolvableDecomposition {
    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    pub fn blocks_per_factor(&self) -> usize {
        self.n / self.m
    }

    /// Relabels points through `perm` (used to randomize designs).
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        let factors = self
            .factors
            .iter()
            .map(|f| {
                f.iter()
                    .map(|b| b.iter().map(|&x| perm[x]).collect())
                    .collect()
            })
            .collect();
        ResolvableDecomposition {
            n: self.n,
            m: self.m,
            factors,
        }
    }
}

/// Which construction, if any, covers `(n, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Trivial,
    RoundRobin,
    Affine { q: usize, dim: u32 },
    KirkmanTripled,
    Kirkman15,
}

pub fn family(n: usize, m: usize) -> Option<Family> {
    if m < 2 || n < m || !n.is_multiple_of(m) {
        return None;
    }
    if n == m {
        return Some(Family::Trivial);
    }
    if m == 2 {
        return Some(Family::RoundRobin);
    }
    if prime_power(m).is_some() {
        let mut dim = 1;
        let mut pow = m;
        while pow < n {
            pow *= m;
            dim += 1;
        }
        if pow == n {
            return Some(Family::Affine { q: m, dim });
        }
    }
    if m == 3 && n == 15 {
        return Some(Family::Kirkman15);
    }
    if m == 3 && KIRKMAN_TRIPLED_ORDERS.contains(&n) {
        return Some(Family::KirkmanTripled);
    }
    None
}

/// Orders for which the tripled-orbit search finds a Kirkman system quickly.
pub const KIRKMAN_TRIPLED_ORDERS: [usize; 6] = [21, 33, 39, 45, 51, 63];

/// Smallest supported order at least `n`, looking up to `8n`.
pub fn nearest_supported(n: usize, m: usize) -> Option<usize> {
    (n.max(m)..=8 * n.max(m)).find(|&k| family(k, m).is_some())
}

pub fn resolvable_decomposition(
    n: usize,
    m: usize,
) -> Result<ResolvableDecomposition, DesignError> {
    let unsupported = || DesignError::UnsupportedParameters {
        n,
        m,
        nearest: nearest_supported(n, m),
    };
    let factors = match family(n, m).ok_or_else(unsupported)? {
        Family::Trivial => vec![vec![(0..n).collect()]],
        Family::RoundRobin => round_robin(n),
        Family::Affine { q, dim } => affine(q, dim),
        Family::KirkmanTripled => kirkman_tripled(n).ok_or_else(unsupported)?,
        Family::Kirkman15 => kirkman_15(),
    };
    let d = ResolvableDecomposition { n, m, factors };
    debug_assert!(verify_decomposition(&d).passed);
    Ok(d)
}

/// Circle method: vertex `n-1` fixed, the rest rotate.
fn round_robin(n: usize) -> Vec<Vec<Vec<usize>>> {
    let r = n - 1;
    (0..r)
        .map(|round| {
            let mut f = vec![vec![round, n - 1]];
            for k in 1..n / 2 {
                let a = (round + k) % r;
                let b = (round + r - k) % r;
                f.push(vec![a.min(b), a.max(b)]);
            }
            f[0].sort_unstable();
            f
        })
        .collect()
}

/// Lines of `AG(dim, q)` grouped by direction.
fn affine(q: usize, dim: u32) -> Vec<Vec<Vec<usize>>> {
    let f = Field::new(q).expect("prime power");
    let d = dim as usize;
    let npoints = q.pow(dim);
    let coords = |x: usize| -> Vec<usize> {
        let mut out = vec![0; d];
        let mut x = x;
        for c in out.iter_mut() {
            *c = x % q;
            x /= q;
        }
        out
    };
    let index = |c: &[usize]| -> usize { c.iter().rev().fold(0, |acc, &v| acc * q + v) };
    let mut factors = Vec::new();
    for dir in 1..npoints {
        let dc = coords(dir);
        // Normalized directions only: the first nonzero coordinate is 1.
        if dc.iter().find(|&&c| c != 0) != Some(&1) {
            continue;
        }
        let mut seen = vec![false; npoints];
        let mut factor = Vec::new();
        for p in 0..npoints {
            if seen[p] {
                continue;
            }
            let pc = coords(p);
            let mut line: Vec<usize> = (0..q)
                .map(|t| {
                    let pt: Vec<usize> = pc
                        .iter()
                        .zip(&dc)
                        .map(|(&a, &b)| f.add(a, f.mul(t, b)))
                        .collect();
                    index(&pt)
                })
                .collect();
            line.sort_unstable();
            for &x in &line {
                seen[x] = true;
            }
            factor.push(line);
        }
        factors.push(factor);
    }
    factors
}

/// Kirkman triple system of order 15: the lines of `PG(3, 2)` grouped into
/// seven pairwise disjoint spreads.
fn kirkman_15() -> Vec<Vec<Vec<usize>>> {
    // Points are the nonzero vectors of GF(2)^4; a line is {a, b, a ^ b}.
    let mut lines: Vec<[usize; 3]> = Vec::new();
    for a in 1..16usize {
        for b in a + 1..16 {
            let c = a ^ b;
            if c > b {
                lines.push([a, b, c]);
            }
        }
    }
    fn spreads(
        lines: &[[usize; 3]],
        covered: u32,
        chosen: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let Some(p) = (1..16).find(|&p| covered >> p & 1 == 0) else {
            out.push(chosen.clone());
            return;
        };
        for (i, l) in lines.iter().enumerate() {
            let mask = l.iter().fold(0u32, |m, &x| m | 1 << x);
            if l.contains(&p) && mask & covered == 0 {
                chosen.push(i);
                spreads(lines, covered | mask, chosen, out);
                chosen.pop();
            }
        }
    }
    let mut all = Vec::new();
    spreads(&lines, 1, &mut Vec::new(), &mut all);
    fn pack(all: &[Vec<usize>], used: &mut [bool], chosen: &mut Vec<usize>) -> bool {
        let Some(first) = used.iter().position(|&u| !u) else {
            return true;
        };
        for (si, sp) in all.iter().enumerate() {
            if sp.contains(&first) && sp.iter().all(|&l| !used[l]) {
                for &l in sp {
                    used[l] = true;
                }
                chosen.push(si);
                if pack(all, used, chosen) {
                    return true;
                }
                chosen.pop();
                for &l in sp {
                    used[l] = false;
                }
            }
        }
        false
    }
    let mut chosen = Vec::new();
    let found = pack(&all, &mut vec![false; lines.len()], &mut chosen);
    assert!(found, "PG(3,2) has a packing");
    chosen
        .iter()
        .map(|&si| {
            all[si]
                .iter()
                .map(|&l| lines[l].iter().map(|&x| x - 1).collect())
                .collect()
        })
        .collect()
}

/// Kirkman triple system on `Z_k × {0, 1, 2}` (`v = 3k`, `k` odd) with
/// `Z_k` acting on the first coordinate.
///
/// `(k - 1)/2` classes are fixed by the group, each the orbit of a transversal
/// triple `{(0,0), (a,1), (b,2)}`. The remaining `k` classes are the
/// translates of one base class. Pure differences (inside an orbit) and mixed
/// differences (between orbits) must each be covered exactly once.
fn kirkman_tripled(v: usize) -> Option<Vec<Vec<Vec<usize>>>> {
    let k = v / 3;
    if !v.is_multiple_of(3) || k.is_multiple_of(2) || k < 3 {
        return None;
    }
    let fixed = (k - 1) / 2;
    let half = (k - 1) / 2;
    let pt = |x: usize, i: usize| i * k + x;
    // Difference slot of a pair of points: pure slots first, then mixed.
    let slot = |p: usize, q: usize| -> usize {
        let (p, q) = if p / k <= q / k { (p, q) } else { (q, p) };
        let (xi, i, xj, j) = (p % k, p / k, q % k, q / k);
        if i == j {
            let d = (xj + k - xi) % k;
            i * half + d.min(k - d) - 1
        } else {
            let pair = i + j - 1; // (0,1) → 0, (0,2) → 1, (1,2) → 2
            3 * half + pair * k + (xj + k - xi) % k
        }
    };
    let slots = 3 * half + 3 * k;

    struct Search<'a> {
        k: usize,
        fixed: usize,
        used: Vec<bool>,
        covered: Vec<bool>,
        fixed_ab: Vec<(usize, usize)>,
        base: Vec<[usize; 3]>,
        nodes: u64,
        slot: &'a dyn Fn(usize, usize) -> usize,
    }
    impl Search<'_> {
        fn fixed_classes(&mut self) -> bool {
            if self.fixed_ab.len() == self.fixed {
                return self.base_class();
            }
            let k = self.k;
            let start = if self.fixed_ab.is_empty() { 0 } else { 1 };
            let pairs: Vec<(usize, usize)> = if start == 0 {
                vec![(0, 0)]
            } else {
                (0..k).flat_map(|a| (0..k).map(move |b| (a, b))).collect()
            };
            for (a, b) in pairs {
                let s = [
                    (self.slot)(0, k + a),
                    (self.slot)(0, 2 * k + b),
                    (self.slot)(k + a, 2 * k + b),
                ];
                if s.iter().any(|&x| self.covered[x]) {
                    continue;
                }
                for &x in &s {
                    self.covered[x] = true;
                }
                self.fixed_ab.push((a, b));
                if self.fixed_classes() {
                    return true;
                }
                self.fixed_ab.pop();
                for &x in &s {
                    self.covered[x] = false;
                }
                if self.nodes > 2_000_000 {
                    return false;
                }
            }
            false
        }

        fn base_class(&mut self) -> bool {
            self.nodes += 1;
            if self.nodes > 2_000_000 {
                return false;
            }
            let Some(p) = self.used.iter().position(|&u| !u) else {
                return true;
            };
            let n = self.used.len();
            self.used[p] = true;
            for q in p + 1..n {
                if self.used[q] {
                    continue;
                }
                let spq = (self.slot)(p, q);
                if self.covered[spq] {
                    continue;
                }
                self.covered[spq] = true;
                self.used[q] = true;
                for r in q + 1..n {
                    if self.used[r] {
                        continue;
                    }
                    let (spr, sqr) = ((self.slot)(p, r), (self.slot)(q, r));
                    if spr == sqr || self.covered[spr] || self.covered[sqr] {
                        continue;
                    }
                    self.covered[spr] = true;
                    self.covered[sqr] = true;
                    self.used[r] = true;
                    self.base.push([p, q, r]);
                    if self.base_class() {
                        return true;
                    }
                    self.base.pop();
                    self.used[r] = false;
                    self.covered[spr] = false;
                    self.covered[sqr] = false;
                }
                self.used[q] = false;
                self.covered[spq] = false;
            }
            self.used[p] = false;
            false
        }
    }

    let mut s = Search {
        k,
        fixed,
        used: vec![false; v],
        covered: vec![false; slots],
        fixed_ab: Vec::new(),
        base: Vec::new(),
        nodes: 0,
        slot: &slot,
    };
    if !s.fixed_classes() {
        return None;
    }
    let shift = |p: usize, t: usize| pt((p % k + t) % k, p / k);
    let mut factors = Vec::new();
    for &(a, b) in &s.fixed_ab {
        factors.push(
            (0..k)
                .map(|x| vec![pt(x, 0), pt((x + a) % k, 1), pt((x + b) % k, 2)])
                .collect::<Vec<_>>(),
        );
    }
    for t in 0..k {
        factors.push(
            s.base
                .iter()
                .map(|tr| {
                    let mut b: Vec<usize> = tr.iter().map(|&p| shift(p, t)).collect();
                    b.sort_unstable();
                    b
                })
                .collect(),
        );
    }
    Some(factors)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignReport {
    pub passed: bool,
    pub issues: Vec<String>,
}

impl DesignReport {
    fn from_issues(issues: Vec<String>) -> Self {
        DesignReport {
            passed: issues.is_empty(),
            issues,
        }
    }
}

/// Recomputes every property of a resolvable decomposition from its blocks.
pub fn verify_decomposition(d: &ResolvableDecomposition) -> DesignReport {
    let mut issues = Vec::new();
    let (n, m) = (d.n, d.m);
    if m < 2 || n % m != 0 {
        issues.push(format!("block order {m} does not divide {n}"));
        return DesignReport::from_issues(issues);
    }
    if (n - 1) % (m - 1) != 0 || d.factors.len() != (n - 1) / (m - 1) {
        issues.push(format!(
            "{} factors, expected (N-1)/(m-1) = {}",
            d.factors.len(),
            (n - 1) as f64 / (m - 1) as f64
        ));
    }
    let mut table = EdgeTable::new(n);
    for (fi, f) in d.factors.iter().enumerate() {
        let mut seen = vec![false; n];
        for (bi, b) in f.iter().enumerate() {
            if b.len() != m {
                issues.push(format!("factor {fi} block {bi} has {} points", b.len()));
            }
            for &x in b {
                if x >= n {
                    issues.push(format!("factor {fi} block {bi}: point {x} out of range"));
                    continue;
                }
                if seen[x] {
                    issues.push(format!("factor {fi}: point {x} repeated"));
                }
                seen[x] = true;
            }
            for (i, &x) in b.iter().enumerate() {
                for &y in &b[i + 1..] {
                    if x < n && y < n && x != y && !table.insert(x, y) {
                        issues.push(format!("pair {{{x}, {y}}} covered twice (factor {fi})"));
                    }
                }
            }
        }
        if let Some(x) = seen.iter().position(|s| !s) {
            issues.push(format!("factor {fi} misses point {x}"));
        }
    }
    let total = n * (n - 1) / 2;
    if table.len() != total {
        issues.push(format!("{} of {total} pairs covered", table.len()));
    }
    DesignReport::from_issues(issues)
}
