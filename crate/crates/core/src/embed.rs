//! Greedy embedding of the separators into the reserve set `Y`.

use serde::{Deserialize, Serialize};

use crate::edge_table::EdgeTable;
use crate::error::EmbedError;
use crate::graph::Graph;
use crate::rational::{ceil_nonneg, ratio, to_f64, Rational};

/// Host split into `X = 0..x` and `Y = x..total`, with usage counters and
/// the edge slots of `K_{X,Y}` and `K_Y`.
#[derive(Clone, Debug)]
pub struct ReservePartition {
    x: usize,
    total: usize,
    usage: Vec<usize>,
    table: EdgeTable,
}

impl ReservePartition {
    pub fn new(x: usize, total: usize) -> Self {
        assert!(x <= total);
        ReservePartition {
            x,
            total,
            usage: vec![0; total - x],
            table: EdgeTable::new(total),
        }
    }

    pub fn x_size(&self) -> usize {
        self.x
    }

    pub fn y_size(&self) -> usize {
        self.total - self.x
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn is_y(&self, v: usize) -> bool {
        v >= self.x && v < self.total
    }

    pub fn ys(&self) -> std::ops::Range<usize> {
        self.x..self.total
    }

    pub fn usage(&self, y: usize) -> usize {
        self.usage[y - self.x]
    }

    pub fn usage_histogram(&self) -> Vec<(usize, usize)> {
        self.ys().map(|y| (y, self.usage(y))).collect()
    }

    pub fn edge_used(&self, a: usize, b: usize) -> bool {
        self.table.contains(a, b)
    }

    /// Marked edges of `K_{X,Y}` and of `K_Y`.
    pub fn marked(&self) -> (usize, usize) {
        let (mut crossing, mut inner) = (0, 0);
        for a in 0..self.total {
            for b in a + 1..self.total {
                if self.table.contains(a, b) {
                    if self.is_y(a) {
                        inner += 1;
                    } else if self.is_y(b) {
                        crossing += 1;
                    }
                }
            }
        }
        (crossing, inner)
    }
}

/// Forbidden images for one separator vertex and the remaining candidates.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedConstraintSet {
    /// Images already taken by the same separator.
    pub injectivity: Vec<usize>,
    /// `y` with `{h(w), y}` used for a component neighbour `w`.
    pub crossing: Vec<usize>,
    /// `y` with `{h(u'), y}` used for an embedded separator neighbour `u'`.
    pub y_edges: Vec<usize>,
    pub candidates: Vec<usize>,
}

impl EmbedConstraintSet {
    fn dominant(&self) -> &'static str {
        let sizes = [
            self.injectivity.len(),
            self.crossing.len(),
            self.y_edges.len(),
        ];
        let names = ["injectivity", "crossing edges", "Y edges"];
        let k = (0..3).max_by_key(|&k| (sizes[k], 3 - k)).unwrap();
        names[k]
    }
}

/// Forbidden sets for vertex `u` of `g`, whose current images are `image`.
pub fn forbidden_sets(
    g: &Graph,
    u: usize,
    in_separator: &[bool],
    image: &[Option<usize>],
    taken: &[bool],
    part: &ReservePartition,
) -> EmbedConstraintSet {
    let mut set = EmbedConstraintSet::default();
    for y in part.ys() {
        let t = taken[y - part.x];
        let mut cross = false;
        let mut inner = false;
        for &w in g.neighbors(u) {
            let w = w as usize;
            let Some(hw) = image[w] else { continue };
            if hw == y {
                continue;
            }
            if !in_separator[w] {
                cross |= part.table.contains(hw, y);
            } else {
                inner |= part.table.contains(hw, y);
            }
        }
        if t {
            set.injectivity.push(y);
        }
        if cross {
            set.crossing.push(y);
        }
        if inner {
            set.y_edges.push(y);
        }
        if !t && !cross && !inner {
            set.candidates.push(y);
        }
    }
    set
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedStats {
    pub steps: usize,
    pub y_size: usize,
    pub min_candidates: usize,
    /// Steps where `|Y_u| ≤ |Y|/2`.
    pub half_violations: usize,
    pub max_injectivity: usize,
    pub max_crossing: usize,
    pub max_y_edges: usize,
    pub max_usage: usize,
    #[serde(with = "crate::rational::serde_rational")]
    pub usage_cap: Rational,
    pub usage_cap_ceil: usize,
    pub cap_violations: usize,
    /// Crossing edges marked; equals the component-neighbour count summed
    /// over separator vertices.
    pub crossing_marked: usize,
    pub y_edges_marked: usize,
    pub crossing_expected: usize,
    /// The three bounds `δn`, `Δ²ξn`, `3Δ²δn²/|Y|`.
    pub bounds: [f64; 3],
}

/// Embedding parameters: `δ`, `ξ`, `Δ` and `n` for the usage cap and the
/// bounds, plus whether violations are fatal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedParams {
    #[serde(with = "crate::rational::serde_rational")]
    pub delta_sep: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub xi: Rational,
    pub max_degree: usize,
    pub n: usize,
    pub strict: bool,
}

/// Embeds every separator vertex into `Y`. `maps[i][v]` must hold the image
/// of every component vertex; separator entries are filled in. Graphs go in
/// input order and separator vertices in ascending id.
pub fn embed_separators(
    graphs: &[Graph],
    separators: &[Vec<usize>],
    maps: &mut [Vec<Option<usize>>],
    part: &mut ReservePartition,
    params: &EmbedParams,
) -> Result<EmbedStats, EmbedError> {
    let y_size = part.y_size();
    let n = params.n as i64;
    let usage_cap = if y_size == 0 {
        ratio(0, 1)
    } else {
        ratio(3, 1) * params.delta_sep * ratio(n * n, y_size as i64)
    };
    let dd = (params.max_degree * params.max_degree) as f64;
    let bounds = [
        to_f64(params.delta_sep) * params.n as f64,
        dd * to_f64(params.xi) * params.n as f64,
        dd * to_f64(usage_cap),
    ];
    let mut stats = EmbedStats {
        steps: 0,
        y_size,
        min_candidates: y_size,
        half_violations: 0,
        max_injectivity: 0,
        max_crossing: 0,
        max_y_edges: 0,
        max_usage: 0,
        usage_cap,
        usage_cap_ceil: ceil_nonneg(usage_cap) as usize,
        cap_violations: 0,
        crossing_marked: 0,
        y_edges_marked: 0,
        crossing_expected: 0,
        bounds,
    };
    for (i, (g, sep)) in graphs.iter().zip(separators).enumerate() {
        if sep.len() > y_size {
            return Err(EmbedError::ReserveTooSmall {
                graph: i,
                size: sep.len(),
                y: y_size,
            });
        }
        let mut in_separator = vec![false; g.vertex_count()];
        for &u in sep {
            in_separator[u] = true;
        }
        let mut sorted = sep.clone();
        sorted.sort_unstable();
        let mut taken = vec![false; y_size];
        for &u in &sorted {
            let set = forbidden_sets(g, u, &in_separator, &maps[i], &taken, part);
            stats.steps += 1;
            stats.min_candidates = stats.min_candidates.min(set.candidates.len());
            if 2 * set.candidates.len() <= y_size {
                stats.half_violations += 1;
            }
            stats.max_injectivity = stats.max_injectivity.max(set.injectivity.len());
            stats.max_crossing = stats.max_crossing.max(set.crossing.len());
            stats.max_y_edges = stats.max_y_edges.max(set.y_edges.len());
            let Some(&y) = set.candidates.iter().min_by_key(|&&y| (part.usage(y), y)) else {
                return Err(EmbedError::NoCandidate {
                    graph: i,
                    vertex: u,
                    dominant: set.dominant().to_string(),
                });
            };
            maps[i][u] = Some(y);
            taken[y - part.x] = true;
            part.usage[y - part.x] += 1;
            let used = part.usage(y);
            stats.max_usage = stats.max_usage.max(used);
            if ratio(used as i64, 1) > usage_cap {
                stats.cap_violations += 1;
                if params.strict {
                    return Err(EmbedError::UsageCapExceeded { host: y });
                }
            }
            for &w in g.neighbors(u) {
                let w = w as usize;
                if !in_separator[w] {
                    stats.crossing_expected += 1;
                }
                let Some(hw) = maps[i][w] else { continue };
                let fresh = part.table.insert(hw, y);
                assert!(fresh, "candidate selection let an edge be reused");
                if in_separator[w] {
                    stats.y_edges_marked += 1;
                } else {
                    stats.crossing_marked += 1;
                }
            }
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize) -> EmbedParams {
        EmbedParams {
            delta_sep: ratio(1, 2),
            xi: ratio(1, 2),
            max_degree: 3,
            n,
            strict: false,
        }
    }

    #[test]
    fn empty_separators_change_nothing() {
        let g = Graph::path(4);
        let mut maps = vec![vec![Some(0), Some(1), Some(2), Some(3)]];
        let before = maps.clone();
        let mut part = ReservePartition::new(4, 6);
        let stats = embed_separators(&[g], &[vec![]], &mut maps, &mut part, &params(4)).unwrap();
        assert_eq!(maps, before);
        assert_eq!(stats.steps, 0);
    }

    #[test]
    fn star_center_goes_to_least_used() {
        // Center 0, leaves 1 and 2 on X = {0, 1}; Y = {2, 3, 4}.
        let g = Graph::star(2);
        let mut part = ReservePartition::new(2, 5);
        part.usage[0] = 1;
        let mut maps = vec![vec![None, Some(0), Some(1)]];
        let stats = embed_separators(&[g], &[vec![0]], &mut maps, &mut part, &params(3)).unwrap();
        assert_eq!(maps[0][0], Some(3));
        assert!(part.edge_used(0, 3) && part.edge_used(1, 3));
        assert_eq!(stats.crossing_marked, 2);
        assert_eq!(part.marked(), (2, 0));
    }

    #[test]
    fn shared_boundary_host_forces_distinct_images() {
        // Two graphs, each an edge w-u with w on host 0 and u separated.
        let g = Graph::path(2);
        let mut part = ReservePartition::new(1, 3);
        let mut maps = vec![vec![Some(0), None], vec![Some(0), None]];
        embed_separators(
            &[g.clone(), g],
            &[vec![1], vec![1]],
            &mut maps,
            &mut part,
            &params(2),
        )
        .unwrap();
        assert_ne!(maps[0][1], maps[1][1]);
    }

    #[test]
    fn forbidden_set_contents() {
        let g = Graph::path(3); // 0 - 1 - 2, separator {1, 2}
        let mut part = ReservePartition::new(2, 6);
        // Nothing embedded yet: everything is a candidate.
        let image = vec![Some(0), None, None];
        let sep = vec![false, true, true];
        let set = forbidden_sets(&g, 1, &sep, &image, &[false; 4], &part);
        assert_eq!(set.candidates, vec![2, 3, 4, 5]);
        part.table.insert(0, 2);
        let set = forbidden_sets(&g, 1, &sep, &image, &[false; 4], &part);
        assert_eq!(set.crossing, vec![2]);
        // Sibling 1 embedded at 3: it is in the injectivity set of 2.
        let image = vec![Some(0), Some(3), None];
        part.table.insert(3, 4);
        let set = forbidden_sets(&g, 2, &sep, &image, &[false, true, false, false], &part);
        assert_eq!(set.injectivity, vec![3]);
        assert_eq!(set.y_edges, vec![4]);
        assert_eq!(set.candidates, vec![2, 5]);
    }

    #[test]
    fn no_candidate_names_the_constraint() {
        let g = Graph::path(2);
        let mut part = ReservePartition::new(1, 2);
        let mut maps = vec![vec![Some(0), None], vec![Some(0), None]];
        let err = embed_separators(
            &[g.clone(), g],
            &[vec![1], vec![1]],
            &mut maps,
            &mut part,
            &params(2),
        )
        .unwrap_err();
        assert_eq!(
            err,
            EmbedError::NoCandidate {
                graph: 1,
                vertex: 1,
                dominant: "crossing edges".into()
            }
        );
    }

    #[test]
    fn separator_edges_marked_on_second_endpoint() {
        let g = Graph::path(3);
        let mut part = ReservePartition::new(1, 5);
        let mut maps = vec![vec![Some(0), None, None]];
        let stats =
            embed_separators(&[g], &[vec![1, 2]], &mut maps, &mut part, &params(3)).unwrap();
        assert_eq!(stats.crossing_marked, 1);
        assert_eq!(stats.y_edges_marked, 1);
        assert_eq!(part.marked(), (1, 1));
        assert_eq!(stats.crossing_marked, stats.crossing_expected);
    }
}
