//! Balancing the preliminary packing: permute the `K_m`'s inside each
//! `K_m`-factor and the vertices inside each `K_m` until every host vertex
//! has small boundary degree.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::designs::ResolvableDecomposition;
use crate::error::BalanceError;
use crate::rational::{ratio, to_f64, Rational};

pub const DEFAULT_MAX_ATTEMPTS: usize = 64;

/// Image of one component: the `K_m` it sits in and the host and boundary
/// flag of each of its vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentImage {
    pub factor: usize,
    pub block: usize,
    pub hosts: Vec<usize>,
    pub boundary: Vec<bool>,
}

/// Sorted relative boundary degrees of the vertices of one `K_m`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct KmLabel {
    pub degrees: Vec<usize>,
}

impl KmLabel {
    /// `β(A)`.
    pub fn beta(&self) -> Rational {
        ratio(
            self.degrees.iter().sum::<usize>() as i64,
            self.degrees.len() as i64,
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BalanceProfile {
    pub n_host: usize,
    pub m: usize,
    /// `d^∂(v, K_m)` by `[factor][block][position in block]`.
    pub relative: Vec<Vec<Vec<usize>>>,
    pub labels: Vec<KmLabel>,
    /// Label index of each `K_m`, by `[factor][block]`.
    pub label_of: Vec<Vec<usize>>,
    /// `α_j(A)` by `[factor][label]`.
    pub alpha_by_factor: Vec<Vec<usize>>,
    /// `α(A)`.
    pub alpha: Vec<usize>,
    pub common: Vec<bool>,
    pub threshold: f64,
    /// `X^{v,A}` by `[vertex][label]`.
    pub incidence: Vec<Vec<usize>>,
    /// `d^∂(v)`, as the sum of relative degrees.
    pub boundary_degree: Vec<usize>,
    /// `d^∂(v)`, counted directly from boundary preimages.
    pub recount: Vec<usize>,
    /// `Σ_i |∂C_i|`.
    pub total_boundary: usize,
}

impl BalanceProfile {
    pub fn max_degree(&self) -> usize {
        self.boundary_degree.iter().copied().max().unwrap_or(0)
    }

    /// Number of `K_m`'s whose label is rare.
    pub fn rare_blocks(&self) -> usize {
        self.alpha
            .iter()
            .zip(&self.common)
            .filter(|(_, &c)| !c)
            .map(|(a, _)| a)
            .sum()
    }

    pub fn block_count(&self) -> usize {
        self.alpha.iter().sum()
    }

    /// Violated invariants, empty when the profile is consistent.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut issues = Vec::new();
        let per_factor = self.n_host / self.m;
        for (f, counts) in self.alpha_by_factor.iter().enumerate() {
            let sum: usize = counts.iter().sum();
            if sum != per_factor {
                issues.push(format!(
                    "factor {f}: label counts sum to {sum}, not {per_factor}"
                ));
            }
        }
        for (v, (&d, &r)) in self.boundary_degree.iter().zip(&self.recount).enumerate() {
            if d != r {
                issues.push(format!(
                    "vertex {v}: Σ d^∂(v, K_m) = {d} but {r} boundary preimages"
                ));
            }
        }
        let lhs: Rational = self
            .labels
            .iter()
            .zip(&self.alpha)
            .map(|(a, &al)| ratio(self.m as i64, 1) * a.beta() * ratio(al as i64, 1))
            .sum();
        if lhs != ratio(self.total_boundary as i64, 1) {
            issues.push(format!(
                "Σ mβ(A)α(A) = {lhs} but Σ|∂C_i| = {}",
                self.total_boundary
            ));
        }
        let dsum: usize = self.boundary_degree.iter().sum();
        if dsum != self.total_boundary {
            issues.push(format!(
                "Σ d^∂(v) = {dsum} but Σ|∂C_i| = {}",
                self.total_boundary
            ));
        }
        let blocks = self.block_count() as f64;
        if self.m < 63 && self.labels.len() as f64 <= 2f64.powi(self.m as i32) {
            let eta_blocks = self.threshold * 2f64.powi(self.m as i32);
            if self.rare_blocks() as f64 > eta_blocks + 1e-9 * blocks {
                issues.push(format!(
                    "{} K_m's carry rare labels, above η·N(N−1)/(m(m−1))",
                    self.rare_blocks()
                ));
            }
        }
        issues
    }
}

/// Where each host vertex sits in each factor: `(block, position)`.
fn layout(top: &ResolvableDecomposition) -> Vec<Vec<(usize, usize)>> {
    top.factors
        .iter()
        .map(|f| {
            let mut at = vec![(0, 0); top.n];
            for (b, block) in f.iter().enumerate() {
                for (p, &x) in block.iter().enumerate() {
                    at[x] = (b, p);
                }
            }
            at
        })
        .collect()
}

fn relative_degrees(
    images: &[Vec<ComponentImage>],
    top: &ResolvableDecomposition,
) -> Vec<Vec<Vec<usize>>> {
    let at = layout(top);
    let mut rel: Vec<Vec<Vec<usize>>> = top
        .factors
        .iter()
        .map(|f| vec![vec![0; top.m]; f.len()])
        .collect();
    for graph in images {
        for c in graph {
            for (&x, &bd) in c.hosts.iter().zip(&c.boundary) {
                if bd {
                    let (b, p) = at[c.factor][x];
                    debug_assert_eq!(b, c.block);
                    rel[c.factor][b][p] += 1;
                }
            }
        }
    }
    rel
}

/// Builds the profile of a packing of component graphs into the top layer.
/// `eta` sets the common-label threshold `η/2^m · N(N−1)/(m(m−1))`.
pub fn compute_profile(
    images: &[Vec<ComponentImage>],
    top: &ResolvableDecomposition,
    eta: Rational,
) -> BalanceProfile {
    let (n, m) = (top.n, top.m);
    let relative = relative_degrees(images, top);
    let mut index: BTreeMap<KmLabel, usize> = BTreeMap::new();
    let mut labels = Vec::new();
    let mut label_of = Vec::with_capacity(relative.len());
    for f in &relative {
        let mut row = Vec::with_capacity(f.len());
        for block in f {
            let mut degrees = block.clone();
            degrees.sort_unstable();
            let label = KmLabel { degrees };
            let id = *index.entry(label.clone()).or_insert_with(|| {
                labels.push(label);
                labels.len() - 1
            });
            row.push(id);
        }
        label_of.push(row);
    }
    let mut alpha_by_factor = vec![vec![0; labels.len()]; relative.len()];
    let mut alpha = vec![0; labels.len()];
    let mut incidence = vec![vec![0; labels.len()]; n];
    let mut boundary_degree = vec![0; n];
    for (f, row) in label_of.iter().enumerate() {
        for (b, &id) in row.iter().enumerate() {
            alpha_by_factor[f][id] += 1;
            alpha[id] += 1;
            for (p, &x) in top.factors[f][b].iter().enumerate() {
                incidence[x][id] += 1;
                boundary_degree[x] += relative[f][b][p];
            }
        }
    }
    let blocks_total = (n * (n - 1)) as f64 / (m * (m - 1)) as f64;
    let threshold = to_f64(eta) / 2f64.powi(m as i32) * blocks_total;
    let common = alpha.iter().map(|&a| a as f64 >= threshold).collect();
    let total_boundary = images
        .iter()
        .flatten()
        .map(|c| c.boundary.iter().filter(|&&b| b).count())
        .sum();
    let mut recount = vec![0; n];
    for c in images.iter().flatten() {
        for (&x, &bd) in c.hosts.iter().zip(&c.boundary) {
            recount[x] += bd as usize;
        }
    }
    BalanceProfile {
        n_host: n,
        m,
        relative,
        labels,
        label_of,
        alpha_by_factor,
        alpha,
        common,
        threshold,
        incidence,
        boundary_degree,
        recount,
        total_boundary,
    }
}

/// Block permutation per factor and vertex permutation per `K_m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutations {
    pub blocks: Vec<Vec<usize>>,
    pub vertices: Vec<Vec<Vec<usize>>>,
}

impl Permutations {
    pub fn identity(top: &ResolvableDecomposition) -> Self {
        Permutations {
            blocks: top.factors.iter().map(|f| (0..f.len()).collect()).collect(),
            vertices: top
                .factors
                .iter()
                .map(|f| vec![(0..top.m).collect(); f.len()])
                .collect(),
        }
    }

    pub fn sample(top: &ResolvableDecomposition, rng: &mut ChaCha8Rng) -> Self {
        let mut p = Self::identity(top);
        for f in 0..p.blocks.len() {
            p.blocks[f].shuffle(rng);
            for v in &mut p.vertices[f] {
                v.shuffle(rng);
            }
        }
        p
    }

    /// New host of the vertex at `(block, position)` of factor `f`.
    fn image(&self, top: &ResolvableDecomposition, f: usize, b: usize, p: usize) -> usize {
        top.factors[f][self.blocks[f][b]][self.vertices[f][b][p]]
    }

    pub fn apply(
        &self,
        images: &[Vec<ComponentImage>],
        top: &ResolvableDecomposition,
    ) -> Vec<Vec<ComponentImage>> {
        let at = layout(top);
        images
            .iter()
            .map(|g| {
                g.iter()
                    .map(|c| ComponentImage {
                        factor: c.factor,
                        block: self.blocks[c.factor][c.block],
                        hosts: c
                            .hosts
                            .iter()
                            .map(|&x| {
                                let (b, p) = at[c.factor][x];
                                self.image(top, c.factor, b, p)
                            })
                            .collect(),
                        boundary: c.boundary.clone(),
                    })
                    .collect()
            })
            .collect()
    }

    /// `d^∂` after applying the permutations, touching only slots that
    /// host a boundary vertex.
    fn degrees(&self, relative: &[Vec<Vec<usize>>], top: &ResolvableDecomposition) -> Vec<usize> {
        let mut d = vec![0; top.n];
        for (f, blocks) in relative.iter().enumerate() {
            for (b, slots) in blocks.iter().enumerate() {
                for (p, &k) in slots.iter().enumerate() {
                    if k > 0 {
                        d[self.image(top, f, b, p)] += k;
                    }
                }
            }
        }
        d
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Balanced {
    pub images: Vec<Vec<ComponentImage>>,
    pub permutations: Permutations,
    /// Attempts drawn, including the accepted one.
    pub attempts: usize,
    pub max_degree: usize,
    pub reached: bool,
}

/// `d ≤ ξn`, exactly.
fn within(d: usize, xi: Rational, n: usize) -> bool {
    ratio(d as i64, 1) <= xi * ratio(n as i64, 1)
}

/// Samples block and vertex permutations until `max d^∂ ≤ ξn`. Attempt `a`
/// draws from stream `a` of the seeded generator. If no attempt succeeds,
/// `strict` turns that into an error; otherwise the sample with the smallest
/// maximum is kept.
pub fn balance(
    images: &[Vec<ComponentImage>],
    top: &ResolvableDecomposition,
    xi: Rational,
    n: usize,
    seed: u64,
    max_attempts: usize,
    strict: bool,
) -> Result<Balanced, BalanceError> {
    let relative = relative_degrees(images, top);
    let mut best: Option<(usize, Permutations)> = None;
    for a in 0..max_attempts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(a as u64);
        let perms = Permutations::sample(top, &mut rng);
        let max = perms.degrees(&relative, top).into_iter().max().unwrap_or(0);
        if within(max, xi, n) {
            return Ok(Balanced {
                images: perms.apply(images, top),
                permutations: perms,
                attempts: a + 1,
                max_degree: max,
                reached: true,
            });
        }
        if best.as_ref().is_none_or(|(b, _)| max < *b) {
            best = Some((max, perms));
        }
    }
    let (max, perms) = best.expect("at least one attempt");
    if strict {
        return Err(BalanceError::BalancednessNotReached {
            max_found: max,
            bound: to_f64(xi) * n as f64,
            attempts: max_attempts,
        });
    }
    Ok(Balanced {
        images: perms.apply(images, top),
        permutations: perms,
        attempts: max_attempts,
        max_degree: max,
        reached: false,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub max_boundary_degree: usize,
    pub xi_n: f64,
    pub attempts: usize,
    pub rare_label_fraction: f64,
    /// `(1+η)²(1/N)(ξ/2)n²`.
    pub common_term: f64,
    /// `(1+η)²(1/N)Σ|∂C_i|`, the common term with the measured boundary.
    pub measured_common_term: f64,
    /// `2η(N−1)`.
    pub rare_term: f64,
    pub two_term_bound: f64,
    pub passed: bool,
}

/// Certificate for a balanced packing, from the profile of its images.
pub fn balance_certificate(
    h: &Balanced,
    profile: &BalanceProfile,
    xi: Rational,
    eta: Rational,
    n: usize,
) -> Certificate {
    let big_n = profile.n_host as f64;
    let (xi_f, eta_f) = (to_f64(xi), to_f64(eta));
    let growth = (1.0 + eta_f) * (1.0 + eta_f);
    let common_term = growth / big_n * (xi_f / 2.0) * (n * n) as f64;
    let rare_term = 2.0 * eta_f * (big_n - 1.0);
    let max = profile.max_degree();
    Certificate {
        max_boundary_degree: max,
        xi_n: xi_f * n as f64,
        attempts: h.attempts,
        rare_label_fraction: if profile.block_count() == 0 {
            0.0
        } else {
            profile.rare_blocks() as f64 / profile.block_count() as f64
        },
        common_term,
        measured_common_term: growth / big_n * profile.total_boundary as f64,
        rare_term,
        two_term_bound: common_term + rare_term,
        passed: within(max, xi, n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::resolvable_decomposition;

    fn image(
        top: &ResolvableDecomposition,
        f: usize,
        b: usize,
        boundary: &[bool],
    ) -> ComponentImage {
        ComponentImage {
            factor: f,
            block: b,
            hosts: top.factors[f][b][..boundary.len()].to_vec(),
            boundary: boundary.to_vec(),
        }
    }

    #[test]
    fn no_boundaries() {
        let top = resolvable_decomposition(16, 4).unwrap();
        let images = vec![
            vec![image(&top, 0, 0, &[false, false])],
            vec![image(&top, 1, 2, &[false, false, false])],
        ];
        let p = compute_profile(&images, &top, ratio(1, 8));
        assert!(p.boundary_degree.iter().all(|&d| d == 0));
        assert!(p.labels.iter().all(|l| l.degrees.iter().all(|&d| d == 0)));
        assert!(p.check_invariants().is_empty());
        let h = balance(&images, &top, ratio(1, 100), 10, 0, 64, true).unwrap();
        assert_eq!(h.attempts, 1);
        let c = balance_certificate(
            &h,
            &compute_profile(&h.images, &top, ratio(1, 8)),
            ratio(1, 100),
            ratio(1, 8),
            10,
        );
        assert_eq!(c.max_boundary_degree, 0);
        assert!(c.passed);
    }

    #[test]
    fn single_p3_end_boundary() {
        // K_4 as its own single K_4: the trivial decomposition.
        let top = resolvable_decomposition(4, 4).unwrap();
        let images = vec![vec![image(&top, 0, 0, &[true, false, false])]];
        let p = compute_profile(&images, &top, ratio(0, 1));
        assert_eq!(p.boundary_degree.iter().filter(|&&d| d == 1).count(), 1);
        assert_eq!(p.boundary_degree.iter().sum::<usize>(), 1);
        assert!(p.check_invariants().is_empty());
    }

    #[test]
    fn symmetric_instance_closed_form() {
        // One K_4 per factor of K_16 with one boundary vertex each, every
        // factor: each label is {0,0,0,1} on one K_4 and zero elsewhere.
        let top = resolvable_decomposition(16, 4).unwrap();
        let images: Vec<Vec<ComponentImage>> = (0..top.factors.len())
            .map(|f| (0..4).map(|b| image(&top, f, b, &[true, false])).collect())
            .collect();
        let p = compute_profile(&images, &top, ratio(0, 1));
        // β = 1/4 on every K_4, so every vertex has d = β·(N−1)/(m−1) = 5/4
        // on average; the total is exact.
        assert_eq!(p.total_boundary, 20);
        assert!(p.check_invariants().is_empty());
        let (n, xi) = (16, ratio(1, 4));
        let h = balance(&images, &top, xi, n, 3, 64, true).unwrap();
        assert!(h.max_degree <= 4);
    }

    #[test]
    fn permutations_preserve_structure() {
        let top = resolvable_decomposition(25, 5).unwrap();
        let images: Vec<Vec<ComponentImage>> = (0..6)
            .map(|f| {
                vec![
                    image(&top, f, 0, &[true, true, false]),
                    image(&top, f, 3, &[false, true]),
                ]
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let perms = Permutations::sample(&top, &mut rng);
        let moved = perms.apply(&images, &top);
        let at = layout(&top);
        for (g, gm) in images.iter().zip(&moved) {
            let mut hosts: Vec<usize> = gm.iter().flat_map(|c| c.hosts.clone()).collect();
            let len = hosts.len();
            hosts.sort_unstable();
            hosts.dedup();
            assert_eq!(hosts.len(), len);
            for (c, cm) in g.iter().zip(gm) {
                for &x in &cm.hosts {
                    assert_eq!(at[cm.factor][x].0, cm.block);
                }
                assert_eq!(c.boundary, cm.boundary);
            }
        }
        let before = compute_profile(&images, &top, ratio(1, 8));
        let after = compute_profile(&moved, &top, ratio(1, 8));
        let mut a: Vec<KmLabel> = before.labels.clone();
        let mut b: Vec<KmLabel> = after.labels.clone();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        assert_eq!(
            before.alpha.iter().sum::<usize>(),
            after.alpha.iter().sum::<usize>()
        );
    }

    #[test]
    fn all_rare_labels_rare_term() {
        let top = resolvable_decomposition(9, 3).unwrap();
        let images = vec![vec![image(&top, 0, 0, &[true, true])]];
        let eta = ratio(1, 1);
        let p = compute_profile(&images, &top, eta);
        // threshold = 1/8 · 12 = 1.5: the single non-zero label is rare.
        assert!(p
            .common
            .iter()
            .zip(&p.labels)
            .any(|(&c, l)| !c && l.degrees.iter().any(|&d| d > 0)));
        let h = balance(&images, &top, ratio(1, 1), 9, 0, 4, false).unwrap();
        let c = balance_certificate(&h, &p, ratio(1, 1), eta, 9);
        assert_eq!(c.rare_term, 2.0 * 8.0);
    }

    #[test]
    fn concentrated_boundaries_spread_out() {
        let top = resolvable_decomposition(16, 4).unwrap();
        // Every factor puts a boundary vertex on host 0.
        let images: Vec<Vec<ComponentImage>> = (0..top.factors.len())
            .map(|f| {
                let b = top.factors[f]
                    .iter()
                    .position(|blk| blk.contains(&0))
                    .unwrap();
                let mut hosts = top.factors[f][b].clone();
                let i = hosts.iter().position(|&x| x == 0).unwrap();
                hosts.swap(0, i);
                vec![ComponentImage {
                    factor: f,
                    block: b,
                    hosts: hosts[..2].to_vec(),
                    boundary: vec![true, false],
                }]
            })
            .collect();
        let before = compute_profile(&images, &top, ratio(0, 1)).max_degree();
        assert_eq!(before, 5);
        let h = balance(&images, &top, ratio(1, 16), 16, 1, 64, false).unwrap();
        assert!(h.max_degree < before);
    }
}
