//! The assignment phase: chunk each component graph by type, route chunks to
//! the `K_m`'s of the current `K_m`-factor, and consume `S`-matchings.

use serde::{Deserialize, Serialize};

use crate::designs::LayeredDesign;
use crate::edge_table::EdgeTable;
use crate::error::{AssignError, DesignError};
use crate::isotype::TypeCensus;
use crate::rational::{floor_nonneg, ratio, to_f64, Rational};

/// Chunks of one type for one component graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeChunks {
    pub ty: usize,
    pub v: usize,
    /// `ν_i(S)`.
    pub count: usize,
    pub capacity: usize,
    /// Chunk sizes; all but possibly the last equal `capacity`.
    pub sizes: Vec<usize>,
}

impl TypeChunks {
    /// `μ_i(S)`.
    pub fn chunk_count(&self) -> usize {
        self.sizes.len()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkPlan {
    /// In density order of the types.
    pub types: Vec<TypeChunks>,
}

impl ChunkPlan {
    pub fn chunk_count(&self) -> usize {
        self.types.iter().map(TypeChunks::chunk_count).sum()
    }
}

/// `⌊(1−η)m/v⌋`, computed exactly.
pub fn chunk_capacity(m: usize, v: usize, eta: Rational) -> usize {
    floor_nonneg((ratio(1, 1) - eta) * ratio(m as i64, v as i64)) as usize
}

/// Groups `count` components into as few chunks of size at most `capacity`
/// as possible.
pub fn split_chunks(count: usize, capacity: usize) -> Vec<usize> {
    assert!(capacity > 0 || count == 0);
    let mut sizes = vec![capacity; count / capacity.max(1)];
    if !count.is_multiple_of(capacity.max(1)) {
        sizes.push(count % capacity);
    }
    sizes
}

/// Chunk plan for `(ty, v, ν)` triples with a per-type capacity.
pub fn plan_chunks_for(
    counts: &[(usize, usize, usize)],
    m: usize,
    eta: Rational,
    capacity: impl Fn(usize, usize) -> usize,
) -> Result<ChunkPlan, AssignError> {
    let mut types = Vec::with_capacity(counts.len());
    for &(ty, v, count) in counts {
        let cap = capacity(ty, v);
        if cap == 0 {
            if count == 0 {
                continue;
            }
            return Err(AssignError::TypeTooLarge {
                v,
                m,
                eta: to_f64(eta),
            });
        }
        types.push(TypeChunks {
            ty,
            v,
            count,
            capacity: cap,
            sizes: split_chunks(count, cap),
        });
    }
    Ok(ChunkPlan { types })
}

/// Chunk plan for a census; `ty` indexes `census.entries`.
pub fn plan_chunks(census: &TypeCensus, m: usize, eta: Rational) -> Result<ChunkPlan, AssignError> {
    let counts: Vec<(usize, usize, usize)> = census
        .entries
        .iter()
        .enumerate()
        .map(|(i, (t, c))| (i, t.v, *c))
        .collect();
    plan_chunks_for(&counts, m, eta, |_, v| chunk_capacity(m, v, eta))
}

/// One component of a component graph: its type and the graph vertex at
/// each canonical position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub ty: usize,
    pub vertices: Vec<usize>,
}

/// Where one component landed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentPlacement {
    pub component: usize,
    pub block: usize,
    /// Host vertex of each canonical position.
    pub hosts: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphAssignment {
    pub factor: Option<usize>,
    pub placements: Vec<ComponentPlacement>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssignConfig {
    #[serde(with = "crate::rational::serde_rational")]
    pub eta: Rational,
    /// `σ` in the fit inequality.
    pub sigma: usize,
    pub delta: usize,
    /// Strict routing: chunks go to the least-used `K_m`'s in order, a `K_m`
    /// that cannot serve a type makes its factor full, and the fit
    /// inequality is enforced. Otherwise chunks skip `K_m`'s that cannot
    /// serve their type and the fit check is `Σμ ≤ N/m`.
    pub strict: bool,
}

/// Per-graph vertex waste.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexWaste {
    /// Vertices of consumed matchings left empty by partial chunks.
    pub v1: usize,
    /// Vertices of used `K_m`'s outside their `S`-matching.
    pub v2: usize,
}

pub struct AssignmentState {
    pub layered: LayeredDesign,
    pub config: AssignConfig,
    pub cursor: usize,
    pub assignments: Vec<GraphAssignment>,
    pub vertex_waste: Vec<VertexWaste>,
    /// Largest max−min used-edge spread seen in a current factor.
    pub max_spread: usize,
    /// Highest factor that received a placement.
    pub last_used_factor: Option<usize>,
    used: EdgeTable,
    /// Used edges per `(factor, block, K_ℓ-factor)`.
    lf_used: Vec<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WasteReport {
    pub v1_max: usize,
    pub v1_total: usize,
    pub v2_max: usize,
    pub v2_total: usize,
    /// Edges of never-used `K_ℓ`-factors in touched `K_m`-factors.
    pub e1: usize,
    /// Unused edges of `K_ℓ`-factors that hosted at least one matching.
    pub e2: usize,
    /// Edges of `K_m`-factors never touched.
    pub untouched: usize,
    pub used_edges: usize,
    /// `e1 + e2 + untouched`, from the per-factor counters.
    pub ledger_unused: usize,
    /// `C(N,2)` minus the edge bit table count.
    pub recount_unused: usize,
    pub v1_bound: usize,
    pub v2_bound: f64,
    /// Edges unused within touched factors, against `2η·C(N,2)`.
    pub touched_unused: usize,
    pub edge_bound: f64,
    /// Whether the parameters satisfy the inequality that guarantees the
    /// edge bound.
    pub bound_applicable: bool,
    pub within_bound: bool,
    pub max_spread: usize,
    pub spread_bound: f64,
}

impl AssignmentState {
    pub fn new(layered: LayeredDesign, config: AssignConfig, graphs: usize) -> Self {
        let mut layered = layered;
        layered.strict_fullness = config.strict;
        let used = EdgeTable::new(layered.host_order());
        let lf_used = (0..layered.factor_count())
            .map(|_| vec![vec![0; layered.middle_factor_count()]; layered.blocks_per_factor()])
            .collect();
        AssignmentState {
            layered,
            config,
            cursor: 0,
            assignments: vec![GraphAssignment::default(); graphs],
            vertex_waste: vec![VertexWaste::default(); graphs],
            max_spread: 0,
            last_used_factor: None,
            used,
            lf_used,
        }
    }

    pub fn host_order(&self) -> usize {
        self.layered.host_order()
    }

    /// Chunk capacity of a type: `⌊(1−η)m/v⌋` in strict mode, otherwise the
    /// size of the smallest `S`-matching of `K_m` that its template offers.
    pub fn capacity(&self, ty: usize, v: usize) -> usize {
        let Some(tpl) = self.layered.template(ty) else {
            return 0;
        };
        if tpl.matchings.is_empty() {
            return 0;
        }
        if self.config.strict {
            let cap = chunk_capacity(self.layered.m(), v, self.config.eta);
            let offered = tpl.min_matching_size() * self.layered.m() / self.layered.l();
            cap.min(offered)
        } else {
            tpl.min_matching_size() * self.layered.m() / self.layered.l()
        }
    }

    /// Chunk plan of one component graph, types in density order.
    pub fn plan(
        &self,
        components: &[ComponentRecord],
        density_rank: impl Fn(usize) -> usize,
    ) -> Result<ChunkPlan, AssignError> {
        let mut counts: Vec<(usize, usize, usize)> = Vec::new();
        for c in components {
            match counts.iter_mut().find(|e| e.0 == c.ty) {
                Some(e) => e.2 += 1,
                None => counts.push((c.ty, c.vertices.len(), 1)),
            }
        }
        counts.sort_by_key(|e| (density_rank(e.0), e.0));
        plan_chunks_for(&counts, self.layered.m(), self.config.eta, |ty, v| {
            self.capacity(ty, v)
        })
    }

    /// Assigns the components of `C_i` (steps (i)–(iv)).
    pub fn assign_component_graph(
        &mut self,
        graph: usize,
        components: &[ComponentRecord],
        plan: &ChunkPlan,
    ) -> Result<(), AssignError> {
        if components.is_empty() {
            return Ok(());
        }
        let n_host = self.host_order();
        let m = self.layered.m();
        let order: usize = components.iter().map(|c| c.vertices.len()).sum();
        if self.config.strict {
            let lhs = ratio(order as i64, 1)
                + ratio((self.config.sigma * m) as i64, 1)
                + self.config.eta * ratio(n_host as i64, 1);
            if lhs > ratio(n_host as i64, 1) {
                return Err(AssignError::FitViolated {
                    graph,
                    lhs: to_f64(lhs),
                    rhs: n_host,
                });
            }
        }
        let blocks = self.layered.blocks_per_factor();
        if plan.chunk_count() > blocks {
            return Err(AssignError::OutOfFactors { graph });
        }
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); plan.types.len()];
        for (idx, c) in components.iter().enumerate() {
            let k = plan
                .types
                .iter()
                .position(|t| t.ty == c.ty)
                .expect("component type is planned");
            members[k].push(idx);
        }
        loop {
            let f = self.cursor;
            if f >= self.layered.factor_count() {
                return Err(AssignError::OutOfFactors { graph });
            }
            if self.layered.is_factor_full(f) {
                self.cursor += 1;
                continue;
            }
            match self.route(f, plan) {
                Some(route) => {
                    self.commit(graph, f, components, plan, &members, &route)?;
                    self.layered.refresh(f);
                    if self.layered.is_factor_full(f) {
                        self.cursor += 1;
                    }
                    return Ok(());
                }
                None => {
                    if !self.config.strict {
                        self.layered.mark_factor_full(f);
                    }
                    self.cursor += 1;
                }
            }
        }
    }

    /// Blocks for the chunks of `plan` in factor `f`, or `None` if the graph
    /// does not fit there.
    fn route(&mut self, f: usize, plan: &ChunkPlan) -> Option<Vec<usize>> {
        let mut order: Vec<usize> = (0..self.layered.blocks_per_factor()).collect();
        let used = self.layered.used_edges(f);
        order.sort_by_key(|&b| (used[b], b));
        let mut taken = vec![false; order.len()];
        let mut route = Vec::with_capacity(plan.chunk_count());
        let mut next = 0;
        for t in &plan.types {
            for _ in 0..t.chunk_count() {
                if self.config.strict {
                    let b = *order.get(next)?;
                    next += 1;
                    if self.layered.peek(f, b, t.ty).is_none() {
                        // The K_m cannot serve S, so it is full.
                        let _ = self.layered.reserve_factor(f, b, t.ty);
                        self.layered.mark_factor_full(f);
                        return None;
                    }
                    route.push(b);
                } else {
                    let k = (0..order.len())
                        .find(|&k| !taken[k] && self.layered.peek(f, order[k], t.ty).is_some())?;
                    taken[k] = true;
                    route.push(order[k]);
                }
            }
        }
        Some(route)
    }

    fn commit(
        &mut self,
        graph: usize,
        f: usize,
        components: &[ComponentRecord],
        plan: &ChunkPlan,
        members: &[Vec<usize>],
        route: &[usize],
    ) -> Result<(), DesignError> {
        let m = self.layered.m();
        let mut r = 0;
        let mut waste = VertexWaste::default();
        for (k, t) in plan.types.iter().enumerate() {
            let e = self
                .layered
                .template(t.ty)
                .map_or(0, |tpl| tpl.pattern.edge_count());
            let mut offset = 0;
            for &size in &t.sizes {
                let b = route[r];
                r += 1;
                let (lf, j) = self.layered.take(f, b, t.ty, size * e)?;
                let placements = self.layered.instantiate(f, b, lf, t.ty, j);
                assert!(placements.len() >= size, "chunk larger than its matching");
                waste.v1 += (placements.len() - size) * t.v;
                waste.v2 += m - placements.len() * t.v;
                for (p, &idx) in placements.iter().zip(&members[k][offset..offset + size]) {
                    let comp = &components[idx];
                    for &(a, c) in self
                        .layered
                        .template(t.ty)
                        .expect("template")
                        .pattern
                        .edges()
                    {
                        let inserted = self.used.insert(p[a as usize], p[c as usize]);
                        assert!(inserted, "host edge reused");
                    }
                    self.lf_used[f][b][lf] += e;
                    self.assignments[graph].placements.push(ComponentPlacement {
                        component: idx,
                        block: b,
                        hosts: p.clone(),
                    });
                    debug_assert_eq!(comp.vertices.len(), p.len());
                }
                offset += size;
            }
        }
        self.assignments[graph].factor = Some(f);
        self.vertex_waste[graph] = waste;
        self.last_used_factor = Some(self.last_used_factor.map_or(f, |x| x.max(f)));
        let used = self.layered.used_edges(f);
        let spread = used.iter().max().unwrap_or(&0) - used.iter().min().unwrap_or(&0);
        self.max_spread = self.max_spread.max(spread);
        Ok(())
    }

    /// Preliminary map `f_i` as `(vertex, host)` pairs.
    pub fn map_of(&self, graph: usize, components: &[ComponentRecord]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for p in &self.assignments[graph].placements {
            for (pos, &h) in p.hosts.iter().enumerate() {
                out.push((components[p.component].vertices[pos], h));
            }
        }
        out
    }

    pub fn used_table(&self) -> &EdgeTable {
        &self.used
    }

    pub fn waste_report(&self) -> WasteReport {
        let n = self.host_order();
        let l = self.layered.l();
        let m = self.layered.m();
        let lf_edges = l * (l - 1) / 2 * (m / l);
        let factor_edges = self.layered.blocks_per_factor() * m * (m - 1) / 2;
        let touched = self.last_used_factor.map_or(0, |f| f + 1);
        let (mut e1, mut e2) = (0, 0);
        for f in 0..touched {
            for b in 0..self.layered.blocks_per_factor() {
                for &u in &self.lf_used[f][b] {
                    if u == 0 {
                        e1 += lf_edges;
                    } else {
                        e2 += lf_edges - u;
                    }
                }
            }
        }
        let untouched = (self.layered.factor_count() - touched) * factor_edges;
        let total = n * (n - 1) / 2;
        let eta = to_f64(self.config.eta);
        let edge_bound = 2.0 * eta * total as f64;
        let sigma = self.config.sigma as f64;
        let lhs = sigma * (l as f64 - 1.0) / (m as f64 - 1.0)
            + eta
            + self.config.delta as f64 / (m as f64 - 1.0);
        let bound_applicable = lhs < 2.0 * eta;
        let touched_unused = e1 + e2;
        WasteReport {
            v1_max: self.vertex_waste.iter().map(|w| w.v1).max().unwrap_or(0),
            v1_total: self.vertex_waste.iter().map(|w| w.v1).sum(),
            v2_max: self.vertex_waste.iter().map(|w| w.v2).max().unwrap_or(0),
            v2_total: self.vertex_waste.iter().map(|w| w.v2).sum(),
            e1,
            e2,
            untouched,
            used_edges: self.used.len(),
            ledger_unused: e1 + e2 + untouched,
            recount_unused: total - self.used.len(),
            v1_bound: self.config.sigma * m,
            v2_bound: eta * n as f64,
            touched_unused,
            edge_bound,
            bound_applicable,
            within_bound: (touched_unused as f64) <= edge_bound,
            max_spread: self.max_spread,
            spread_bound: (m * self.config.delta) as f64 / 2.0,
        }
    }

    /// JSON dump of counters and maps.
    pub fn checkpoint(&self) -> serde_json::Value {
        let used: Vec<Vec<usize>> = (0..self.layered.factor_count())
            .map(|f| self.layered.used_edges(f))
            .collect();
        serde_json::json!({
            "cursor": self.cursor,
            "config": self.config,
            "used_edges": used,
            "vertex_waste": self.vertex_waste,
            "max_spread": self.max_spread,
            "assignments": self.assignments,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::{eta_factorize, resolvable_decomposition};
    use crate::graph::Graph;
    use crate::isotype::census;

    #[test]
    fn chunk_examples() {
        let k2 = (Graph::complete(2), vec![]);
        let c = census(&vec![k2; 7]);
        let plan = plan_chunks(&c, 10, ratio(0, 1)).unwrap();
        assert_eq!(plan.types[0].capacity, 5);
        assert_eq!(plan.types[0].sizes, vec![5, 2]);

        let plan = plan_chunks(&TypeCensus { entries: vec![] }, 10, ratio(0, 1)).unwrap();
        assert_eq!(plan.chunk_count(), 0);

        let k3 = (Graph::complete(3), vec![]);
        let c = census(&vec![k3; 5]);
        let plan = plan_chunks(&c, 12, ratio(1, 4)).unwrap();
        assert_eq!(plan.types[0].capacity, 3);
        assert_eq!(plan.types[0].sizes, vec![3, 2]);
    }

    #[test]
    fn too_large_type() {
        let c = census(&[(Graph::path(5), vec![])]);
        assert!(matches!(
            plan_chunks(&c, 4, ratio(0, 1)),
            Err(AssignError::TypeTooLarge { v: 5, .. })
        ));
    }

    #[test]
    fn split_is_minimal() {
        for cap in 1..8 {
            for count in 0..40 {
                let sizes = split_chunks(count, cap);
                assert_eq!(sizes.iter().sum::<usize>(), count);
                assert!(sizes.iter().all(|&s| s <= cap && s > 0));
                assert_eq!(sizes.len(), count.div_ceil(cap));
            }
        }
    }

    fn state(n: usize, m: usize, l: usize, strict: bool, graphs: usize) -> AssignmentState {
        let top = resolvable_decomposition(n, m).unwrap();
        let middle = resolvable_decomposition(m, l).unwrap();
        let mut ld = LayeredDesign::new(top, middle);
        let tpl = eta_factorize(l, &Graph::complete(2), ratio(0, 1), 3).unwrap();
        ld.set_template(0, tpl);
        let config = AssignConfig {
            eta: ratio(0, 1),
            sigma: 1,
            delta: 1,
            strict,
        };
        AssignmentState::new(ld, config, graphs)
    }

    fn edges(k: usize) -> Vec<ComponentRecord> {
        (0..k)
            .map(|i| ComponentRecord {
                ty: 0,
                vertices: vec![2 * i, 2 * i + 1],
            })
            .collect()
    }

    fn assign(
        st: &mut AssignmentState,
        graph: usize,
        comps: &[ComponentRecord],
    ) -> Result<(), AssignError> {
        let plan = st.plan(comps, |_| 0)?;
        st.assign_component_graph(graph, comps, &plan)
    }

    fn disjoint_images(st: &AssignmentState, graph: usize, comps: &[ComponentRecord]) -> bool {
        let map = st.map_of(graph, comps);
        let mut hosts: Vec<usize> = map.iter().map(|p| p.1).collect();
        hosts.sort_unstable();
        let before = hosts.len();
        hosts.dedup();
        before == hosts.len()
    }

    #[test]
    fn three_edges_need_two_blocks() {
        let mut st = state(16, 4, 4, false, 1);
        let comps = edges(3);
        let plan = st.plan(&comps, |_| 0).unwrap();
        assert_eq!(plan.types[0].capacity, 2);
        assert_eq!(plan.types[0].sizes, vec![2, 1]);
        st.assign_component_graph(0, &comps, &plan).unwrap();
        let blocks: Vec<usize> = st.assignments[0]
            .placements
            .iter()
            .map(|p| p.block)
            .collect();
        assert_eq!(blocks[0], blocks[1]);
        assert_ne!(blocks[0], blocks[2]);
        assert!(disjoint_images(&st, 0, &comps));
        assert_eq!(st.map_of(0, &comps).len(), 6);
    }

    #[test]
    fn empty_component_graph_is_a_no_op() {
        let mut st = state(16, 4, 2, false, 1);
        assign(&mut st, 0, &[]).unwrap();
        assert_eq!(st.cursor, 0);
        assert_eq!(st.used_table().len(), 0);
        assert_eq!(st.assignments[0].factor, None);
    }

    #[test]
    fn second_graph_wraps_onto_touched_blocks() {
        let mut st = state(16, 4, 2, false, 2);
        let comps = edges(6);
        assign(&mut st, 0, &comps).unwrap();
        assign(&mut st, 1, &comps).unwrap();
        assert_eq!(st.assignments[0].factor, st.assignments[1].factor);
        let b0: Vec<usize> = st.assignments[0]
            .placements
            .iter()
            .map(|p| p.block)
            .collect();
        let b1: Vec<usize> = st.assignments[1]
            .placements
            .iter()
            .map(|p| p.block)
            .collect();
        assert!(b1.iter().any(|b| b0.contains(b)));
        assert_eq!(st.used_table().len(), 12);
        for g in 0..2 {
            assert!(disjoint_images(&st, g, &comps));
        }
        // The least-used block comes first for the second graph.
        assert!(!b0.contains(&b1[0]));
    }

    #[test]
    fn perfect_instance_wastes_nothing() {
        // K_4 into K_2's, three graphs 2K_2 fill the three 1-factors.
        let mut st = state(4, 2, 2, false, 3);
        for g in 0..3 {
            assign(&mut st, g, &edges(2)).unwrap();
        }
        let w = st.waste_report();
        assert_eq!(
            (w.v1_total, w.v2_total, w.e1, w.e2, w.untouched),
            (0, 0, 0, 0, 0)
        );
        assert_eq!(w.recount_unused, 0);
        assert!(assign(&mut st, 0, &edges(1)).is_err());
    }

    #[test]
    fn ledger_matches_recount() {
        let mut st = state(16, 4, 2, false, 5);
        for (g, k) in [3, 1, 5, 2, 7].into_iter().enumerate() {
            assign(&mut st, g, &edges(k)).unwrap();
        }
        let w = st.waste_report();
        assert_eq!(w.ledger_unused, w.recount_unused);
        assert_eq!(w.used_edges, 18);
        assert!(w.max_spread as f64 <= 4.0 * 2.0);
    }

    #[test]
    fn single_tiny_graph_vertex_waste() {
        let mut st = state(16, 4, 4, false, 1);
        assign(&mut st, 0, &edges(1)).unwrap();
        // One edge in a K_4 matching of two edges: two empty vertices.
        assert_eq!(st.vertex_waste[0], VertexWaste { v1: 2, v2: 0 });
        assert!(st.waste_report().v1_max <= st.config.sigma * 4);
    }

    #[test]
    fn strict_mode_enforces_fit() {
        let mut st = state(16, 4, 2, true, 1);
        // 14 + 1·4 + 0 > 16.
        assert!(matches!(
            assign(&mut st, 0, &edges(7)),
            Err(AssignError::FitViolated { .. })
        ));
        assign(&mut st, 0, &edges(6)).unwrap();
    }

    #[test]
    fn full_factors_never_receive_placements() {
        let mut st = state(16, 4, 2, true, 40);
        let mut full_at = vec![None; st.layered.factor_count()];
        for g in 0..40 {
            if assign(&mut st, g, &edges(2)).is_err() {
                break;
            }
            let f = st.assignments[g].factor.unwrap();
            assert!(full_at[f].is_none(), "placement into a full factor");
            for (x, slot) in full_at.iter_mut().enumerate() {
                if slot.is_none() && st.layered.is_factor_full(x) {
                    *slot = Some(g);
                }
            }
        }
        assert_eq!(
            st.waste_report().ledger_unused,
            st.waste_report().recount_unused
        );
    }
}
