//! End-to-end run: separate, classify, assign, balance, embed, verify.

use crate::clock::Instant;

use serde::{Deserialize, Serialize};

use crate::assignment::{AssignConfig, AssignmentState, ComponentRecord, WasteReport};
use crate::balancing::{
    balance, balance_certificate, compute_profile, Certificate, ComponentImage,
    DEFAULT_MAX_ATTEMPTS,
};
use crate::designs::factorize::{factorize_best, DEFAULT_RESTARTS};
use crate::designs::{resolvable_decomposition, LayeredDesign};
use crate::embed::{embed_separators, EmbedParams, EmbedStats, ReservePartition};
use crate::error::{AssignError, PipelineError, PlanError};
use crate::graph::{
    validate_sequence, verify_packing, Graph, GraphSequence, PackingMap, VerifyReport,
};
use crate::isotype::TypeRegistry;
use crate::planner::{candidate_plans, host_order, strict_plan, Mode, Plan, PlanOverrides};
use crate::rational::{ratio, Rational};
use crate::separation::{separate, SeparatorConfig, SeparatorStrategy};

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub epsilon: Rational,
    pub overrides: PlanOverrides,
    pub seed: u64,
    pub strategy: SeparatorStrategy,
    pub mode: Mode,
    pub restarts: usize,
    pub max_attempts: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            epsilon: ratio(4, 5),
            overrides: PlanOverrides::default(),
            seed: 0,
            strategy: SeparatorStrategy::TreeOptimal,
            mode: Mode::BestEffort,
            restarts: DEFAULT_RESTARTS,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }
}

/// Wall time per stage in milliseconds. Kept out of the result JSON, which
/// is deterministic.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RunTimings {
    pub stages: Vec<(String, f64)>,
    pub total_ms: f64,
}

impl RunTimings {
    fn add(&mut self, stage: &str, since: Instant) {
        let ms = since.elapsed().as_secs_f64() * 1e3;
        match self.stages.iter_mut().find(|(s, _)| s == stage) {
            Some(entry) => entry.1 += ms,
            None => self.stages.push((stage.to_string(), ms)),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlanFailure {
    pub plan: Plan,
    pub stage: String,
    pub message: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunResult {
    pub verified: bool,
    #[serde(rename = "N")]
    pub host_order: usize,
    pub plan: Option<Plan>,
    pub failed_plans: Vec<PlanFailure>,
    pub types: usize,
    pub separator_total: usize,
    pub boundary_total: usize,
    pub waste: Option<WasteReport>,
    pub certificate: Option<Certificate>,
    /// Violated balance-profile invariants; empty on a consistent run.
    pub balance_issues: Vec<String>,
    pub embedding: Option<EmbedStats>,
    /// Peak number of used host edges in the component-graph clique.
    pub peak_x_edges: usize,
    /// `(y, edges of K_{X,Y} ∪ K_Y at y)` for every reserve vertex.
    pub y_usage: Vec<(usize, usize)>,
    pub verify: VerifyReport,
    pub packing: PackingMap,
    #[serde(skip)]
    pub timings: RunTimings,
}

/// Separated, classified input shared by every plan with the same `s`.
struct Prepared {
    stripped: Vec<Graph>,
    kept: Vec<Vec<usize>>,
    separators: Vec<Vec<usize>>,
    components: Vec<Vec<ComponentRecord>>,
    registry: TypeRegistry,
    boundary_total: usize,
}

fn prepare(
    seq: &GraphSequence,
    plan: &Plan,
    cfg: &RunConfig,
    timings: &mut RunTimings,
) -> Result<Prepared, PipelineError> {
    let t = Instant::now();
    let sep_cfg = SeparatorConfig {
        c_family: 1.0,
        strategy: cfg.strategy.clone(),
    };
    let mut stripped = Vec::with_capacity(seq.graphs.len());
    let mut kept = Vec::with_capacity(seq.graphs.len());
    let mut separations = Vec::with_capacity(seq.graphs.len());
    for (i, g) in seq.graphs.iter().enumerate() {
        let (h, k) = g.strip_isolated();
        let sep = if h.vertex_count() == 0 {
            crate::separation::Separation {
                separator: vec![],
                components: vec![],
            }
        } else {
            separate(&h, plan.delta, plan.s, &sep_cfg)
                .map_err(|source| PipelineError::Separation { graph: i, source })?
        };
        stripped.push(h);
        kept.push(k);
        separations.push(sep);
    }
    timings.add("separate", t);
    let t = Instant::now();
    let mut registry = TypeRegistry::new();
    let mut components = Vec::with_capacity(stripped.len());
    let mut boundary_total = 0;
    for (h, sep) in stripped.iter().zip(&separations) {
        let mut in_sep = vec![false; h.vertex_count()];
        for &u in &sep.separator {
            in_sep[u] = true;
        }
        let mut records = Vec::with_capacity(sep.components.len());
        for comp in &sep.components {
            let sub = h.induced(comp);
            let boundary: Vec<usize> = (0..comp.len())
                .filter(|&k| h.neighbors(comp[k]).iter().any(|&w| in_sep[w as usize]))
                .collect();
            boundary_total += boundary.len();
            let (ty, position) = registry.classify(&sub, &boundary);
            let mut vertices = vec![0; comp.len()];
            for (k, &p) in position.iter().enumerate() {
                vertices[p] = comp[k];
            }
            records.push(ComponentRecord { ty, vertices });
        }
        components.push(records);
    }
    timings.add("census", t);
    Ok(Prepared {
        stripped,
        kept,
        separators: separations.into_iter().map(|s| s.separator).collect(),
        components,
        registry,
        boundary_total,
    })
}

struct Outcome {
    packing: PackingMap,
    waste: WasteReport,
    certificate: Certificate,
    balance_issues: Vec<String>,
    embedding: EmbedStats,
    peak_x_edges: usize,
    y_usage: Vec<(usize, usize)>,
}

/// Receives `(graphs assigned so far, assignment state dump)`.
pub type CheckpointSink<'a> = &'a mut dyn FnMut(usize, serde_json::Value);

fn execute(
    seq: &GraphSequence,
    plan: &Plan,
    prep: &Prepared,
    cfg: &RunConfig,
    timings: &mut RunTimings,
    checkpoints: &mut Option<(usize, CheckpointSink<'_>)>,
) -> Result<Outcome, PipelineError> {
    let strict = cfg.mode == Mode::StrictRegime;
    let t = Instant::now();
    let top = resolvable_decomposition(plan.n_x, plan.m)?;
    let middle = resolvable_decomposition(plan.m, plan.l)?;
    let mut layered = LayeredDesign::new(top, middle);
    let mut eta = if strict { plan.eta } else { ratio(0, 1) };
    for (ty, iso) in prep.registry.types().iter().enumerate() {
        if iso.v > plan.l {
            return Err(AssignError::TypeTooLarge {
                v: iso.v,
                m: plan.m,
                eta: crate::rational::to_f64(plan.eta),
            }
            .into());
        }
        let seed = cfg
            .seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(ty as u64);
        let tpl = factorize_best(plan.l, &iso.graph(), plan.eta, seed, cfg.restarts)?;
        if strict && tpl.eta_achieved > plan.eta {
            return Err(crate::error::DesignError::EtaNotReached {
                achieved: crate::rational::to_f64(tpl.eta_achieved),
            }
            .into());
        }
        eta = eta.max(tpl.eta_achieved);
        layered.set_template(ty, tpl);
    }
    timings.add("designs", t);
    let t = Instant::now();
    let config = AssignConfig {
        eta,
        sigma: prep.registry.len(),
        delta: plan.max_degree,
        strict,
    };
    let mut st = AssignmentState::new(layered, config, seq.graphs.len());
    let density = prep.registry.density_order();
    let mut rank = vec![0; density.len()];
    for (r, &ty) in density.iter().enumerate() {
        rank[ty] = r;
    }
    for (i, comps) in prep.components.iter().enumerate() {
        let chunk_plan = st.plan(comps, |ty| rank[ty])?;
        st.assign_component_graph(i, comps, &chunk_plan)?;
        if let Some((every, sink)) = checkpoints.as_mut() {
            if *every > 0 && (i + 1) % *every == 0 {
                sink(i + 1, st.checkpoint());
            }
        }
    }
    let waste = st.waste_report();
    let peak_x_edges = st.used_table().len();
    timings.add("assign", t);

    let t = Instant::now();
    let images: Vec<Vec<ComponentImage>> = (0..seq.graphs.len())
        .map(|i| {
            let a = &st.assignments[i];
            a.placements
                .iter()
                .map(|p| {
                    let iso = prep.registry.get(prep.components[i][p.component].ty);
                    ComponentImage {
                        factor: a.factor.expect("placed graphs have a factor"),
                        block: p.block,
                        hosts: p.hosts.clone(),
                        boundary: (0..iso.v).map(|k| iso.is_boundary(k)).collect(),
                    }
                })
                .collect()
        })
        .collect();
    let top = &st.layered.top;
    let balanced = balance(
        &images,
        top,
        plan.xi,
        plan.n,
        cfg.seed,
        cfg.max_attempts,
        strict,
    )?;
    let profile = compute_profile(&balanced.images, top, eta);
    let certificate = balance_certificate(&balanced, &profile, plan.xi, eta, plan.n);
    let balance_issues = profile.check_invariants();
    timings.add("balance", t);

    let t = Instant::now();
    let mut maps: Vec<Vec<Option<usize>>> = prep
        .stripped
        .iter()
        .map(|h| vec![None; h.vertex_count()])
        .collect();
    for (i, graph_images) in balanced.images.iter().enumerate() {
        for (img, p) in graph_images.iter().zip(&st.assignments[i].placements) {
            let comp = &prep.components[i][p.component];
            for (k, &host) in img.hosts.iter().enumerate() {
                maps[i][comp.vertices[k]] = Some(host);
            }
        }
    }
    let mut part = ReservePartition::new(plan.n_x, plan.n_total);
    let max_sep = prep.separators.iter().map(Vec::len).max().unwrap_or(0);
    let delta_sep = if strict {
        plan.delta
    } else {
        ratio(max_sep as i64, plan.n.max(1) as i64)
    };
    let params = EmbedParams {
        delta_sep,
        xi: plan.xi,
        max_degree: plan.max_degree,
        n: plan.n,
        strict,
    };
    let embedding = embed_separators(
        &prep.stripped,
        &prep.separators,
        &mut maps,
        &mut part,
        &params,
    )?;
    timings.add("embed", t);

    let mut packing = PackingMap::new(plan.n_total, seq);
    for (i, g) in seq.graphs.iter().enumerate() {
        let mut used = vec![false; plan.n_total];
        for (local, &orig) in prep.kept[i].iter().enumerate() {
            let host = maps[i][local].expect("every non-isolated vertex is placed");
            packing.set(i, orig, host);
            used[host] = true;
        }
        let mut free = (0..plan.n_total).filter(|&h| !used[h]);
        for v in 0..g.vertex_count() {
            if packing.get(i, v).is_none() {
                let h = free.next().ok_or_else(|| {
                    PipelineError::Validation(format!("graph {i} has more vertices than the host"))
                })?;
                packing.set(i, v, h);
            }
        }
    }
    Ok(Outcome {
        packing,
        waste,
        certificate,
        balance_issues,
        embedding,
        peak_x_edges,
        y_usage: part.usage_histogram(),
    })
}

fn plans_for(seq: &GraphSequence, cfg: &RunConfig) -> Result<Vec<Plan>, PlanError> {
    match cfg.mode {
        Mode::StrictRegime => {
            let s = cfg.overrides.s.unwrap_or(2);
            Ok(vec![strict_plan(
                seq.n,
                seq.delta,
                cfg.epsilon,
                s,
                &cfg.overrides,
            )?])
        }
        Mode::BestEffort => {
            let plans = candidate_plans(seq.n, seq.delta, cfg.epsilon, &cfg.overrides);
            if plans.is_empty() {
                return Err(PlanError::Infeasible(format!(
                    "no supported design order between n = {} and N = {}",
                    seq.n,
                    host_order(seq.n, cfg.epsilon)
                )));
            }
            Ok(plans)
        }
    }
}

/// Runs the pipeline. In best-effort mode the candidate plans are tried in
/// order until one yields a packing; the verifier's verdict on that packing
/// is the run's verdict.
pub fn run_pipeline(cfg: &RunConfig, seq: &GraphSequence) -> Result<RunResult, PipelineError> {
    run_pipeline_with_checkpoints(cfg, seq, None)
}

/// As [`run_pipeline`], dumping the assignment state every `every` graphs.
pub fn run_pipeline_with_checkpoints(
    cfg: &RunConfig,
    seq: &GraphSequence,
    mut checkpoints: Option<(usize, CheckpointSink<'_>)>,
) -> Result<RunResult, PipelineError> {
    let start = Instant::now();
    let report = validate_sequence(seq);
    if !report.passed {
        return Err(PipelineError::Validation(format!(
            "{:?}",
            report.violations
        )));
    }
    let mut timings = RunTimings::default();
    let n_total = host_order(seq.n, cfg.epsilon);
    if seq.graphs.iter().all(|g| g.edge_count() == 0) {
        let mut packing = PackingMap::new(n_total, seq);
        for (i, g) in seq.graphs.iter().enumerate() {
            if g.vertex_count() > n_total {
                return Err(PipelineError::Validation(format!(
                    "graph {i} has more vertices than the host"
                )));
            }
            for v in 0..g.vertex_count() {
                packing.set(i, v, v);
            }
        }
        let verify = verify_packing(seq, &packing, n_total);
        timings.total_ms = start.elapsed().as_secs_f64() * 1e3;
        return Ok(RunResult {
            verified: verify.passed,
            host_order: n_total,
            plan: None,
            failed_plans: vec![],
            types: 0,
            separator_total: 0,
            boundary_total: 0,
            waste: None,
            certificate: None,
            balance_issues: vec![],
            embedding: None,
            peak_x_edges: 0,
            y_usage: vec![],
            verify,
            packing,
            timings,
        });
    }
    let t = Instant::now();
    let plans = plans_for(seq, cfg)?;
    timings.add("plan", t);
    let mut failed = Vec::new();
    let mut prepared: Option<(usize, Prepared)> = None;
    let mut last_err = None;
    for plan in plans {
        if prepared.as_ref().is_none_or(|(s, _)| *s != plan.s) {
            match prepare(seq, &plan, cfg, &mut timings) {
                Ok(p) => prepared = Some((plan.s, p)),
                Err(e) => {
                    failed.push(PlanFailure {
                        plan,
                        stage: e.stage().into(),
                        message: e.to_string(),
                    });
                    last_err = Some(e);
                    prepared = None;
                    continue;
                }
            }
        }
        let prep = &prepared.as_ref().expect("prepared above").1;
        match execute(seq, &plan, prep, cfg, &mut timings, &mut checkpoints) {
            Ok(out) => {
                let t = Instant::now();
                let verify = verify_packing(seq, &out.packing, plan.n_total);
                timings.add("verify", t);
                timings.total_ms = start.elapsed().as_secs_f64() * 1e3;
                return Ok(RunResult {
                    verified: verify.passed,
                    host_order: plan.n_total,
                    types: prep.registry.len(),
                    separator_total: prep.separators.iter().map(Vec::len).sum(),
                    boundary_total: prep.boundary_total,
                    plan: Some(plan),
                    failed_plans: failed,
                    waste: Some(out.waste),
                    certificate: Some(out.certificate),
                    balance_issues: out.balance_issues,
                    embedding: Some(out.embedding),
                    peak_x_edges: out.peak_x_edges,
                    y_usage: out.y_usage,
                    verify,
                    packing: out.packing,
                    timings,
                });
            }
            Err(e) => {
                failed.push(PlanFailure {
                    plan,
                    stage: e.stage().into(),
                    message: e.to_string(),
                });
                last_err = Some(e);
            }
        }
    }
    if failed.len() == 1 {
        return Err(last_err.expect("one failure recorded"));
    }
    Err(PipelineError::PlansExhausted(
        failed
            .iter()
            .map(|f| {
                format!(
                    "m={} l={} s={} |X|={}: [{}] {}",
                    f.plan.m, f.plan.l, f.plan.s, f.plan.n_x, f.stage, f.message
                )
            })
            .collect(),
    ))
}
