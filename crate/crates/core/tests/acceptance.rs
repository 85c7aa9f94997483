//! Acceptance checks. Each test writes one `PASS`/`FAIL` line to stderr
//! (bypassing output capture) and then asserts the same verdict.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::{Duration, Instant};

use gpack_core::assignment::{chunk_capacity, plan_chunks_for};
use gpack_core::balancing::{balance, compute_profile, ComponentImage, DEFAULT_MAX_ATTEMPTS};
use gpack_core::designs::factorize::{factorize_best, EtaFactorization, DEFAULT_RESTARTS};
use gpack_core::designs::resolvable::{resolvable_decomposition, ResolvableDecomposition};
use gpack_core::embed::{embed_separators, EmbedParams, ReservePartition};
use gpack_core::generate::{generate_instance, random_tree, InstanceKind};
use gpack_core::graph::{verify_packing, Graph};
use gpack_core::oracle::{
    brute_force_pack, free_trees, tree_sequences, verify_design, BacktrackBudget, DesignRef,
    Outcome,
};
use gpack_core::pipeline::{run_pipeline, RunConfig};
use gpack_core::planner::{candidate_plans, PlanOverrides};
use gpack_core::rational::{ceil_nonneg, ratio, Rational};
use gpack_core::separation::{
    halving_rounds, iterated_separator_bound, separate, SeparatorConfig, SeparatorStrategy,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(name: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "\nacceptance | {name}: {verdict} | {detail}"
    );
    assert!(pass, "{name}: {detail}");
}

#[test]
fn end_to_end_soundness() {
    let (n, runs) = (60, 100);
    let bound = n * 9 / 5;
    let mut successes = 0;
    let mut verified = 0;
    let mut within = 0;
    let mut sparse = 0;
    let mut slowest = Duration::ZERO;
    let mut failures = Vec::new();
    let mut balance_issues = 0;
    for seed in 0..runs {
        let seq = generate_instance(InstanceKind::RandomTrees, n, 3, seed, 0.9).unwrap();
        if (seq.total_edges() as f64) < 0.85 * seq.edge_capacity() as f64 {
            sparse += 1;
        }
        let t = Instant::now();
        let result = run_pipeline(
            &RunConfig {
                seed,
                ..Default::default()
            },
            &seq,
        );
        slowest = slowest.max(t.elapsed());
        match result {
            Ok(r) => {
                successes += 1;
                let independent = verify_packing(&seq, &r.packing, bound);
                if r.verified && independent.passed {
                    verified += 1;
                }
                if r.host_order <= bound {
                    within += 1;
                }
                balance_issues += r.balance_issues.len();
            }
            Err(e) => failures.push(format!("seed {seed}: [{}]", e.stage())),
        }
    }
    let pass = sparse == 0
        && verified == successes
        && within * 100 >= 90 * runs as usize
        && slowest <= Duration::from_secs(60)
        && balance_issues == 0;
    report(
        "end-to-end soundness",
        pass,
        format!(
            "{successes}/{runs} packed, {verified} verified, {within} with N <= {bound}, slowest {:.2}s, \
             {sparse} instances below 0.85 fill, {balance_issues} profile issues{}",
            slowest.as_secs_f64(),
            if failures.is_empty() { String::new() } else { format!(", failed: {}", failures.join(" ")) }
        ),
    );
}

/// Every pair covered exactly once, every factor a partition into `m`-sets.
fn recount(d: &ResolvableDecomposition) -> Result<(), String> {
    let mut cover = vec![0u32; d.n * d.n];
    for (fi, f) in d.factors.iter().enumerate() {
        let mut seen = vec![false; d.n];
        for b in f {
            if b.len() != d.m {
                return Err(format!("factor {fi}: block of size {}", b.len()));
            }
            for &x in b {
                if x >= d.n || std::mem::replace(&mut seen[x], true) {
                    return Err(format!("factor {fi}: point {x} repeated or out of range"));
                }
            }
            for &x in b {
                for &y in b {
                    if x < y {
                        cover[x * d.n + y] += 1;
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(format!("factor {fi} misses a point"));
        }
    }
    for x in 0..d.n {
        for y in x + 1..d.n {
            if cover[x * d.n + y] != 1 {
                return Err(format!(
                    "pair {{{x}, {y}}} covered {} times",
                    cover[x * d.n + y]
                ));
            }
        }
    }
    Ok(())
}

#[test]
fn design_correctness() {
    let mut problems = Vec::new();
    for n in (4..=20).step_by(2) {
        match resolvable_decomposition(n, 2) {
            Ok(d) => {
                if d.factors.len() != n - 1 {
                    problems.push(format!("({n},2): {} factors", d.factors.len()));
                }
                if let Err(e) = recount(&d) {
                    problems.push(format!("({n},2): {e}"));
                }
                if !verify_design(DesignRef::Resolvable(&d)).passed {
                    problems.push(format!("({n},2): verifier rejects"));
                }
            }
            Err(e) => problems.push(format!("({n},2): {e}")),
        }
    }
    for (n, m) in [(9, 3), (25, 5)] {
        match resolvable_decomposition(n, m) {
            Ok(d) => {
                let r = verify_design(DesignRef::Resolvable(&d));
                if !r.passed || recount(&d).is_err() || d.factors.len() != (n - 1) / (m - 1) {
                    problems.push(format!("({n},{m}): {:?}", r.issues));
                }
            }
            Err(e) => problems.push(format!("({n},{m}): {e}")),
        }
    }
    report(
        "design correctness",
        problems.is_empty(),
        format!(
            "K_2 factors for N = 4..20, (9,3), (25,5); {} problems {:?}",
            problems.len(),
            problems
        ),
    );
}

/// Both clauses at `η`, from the raw placements only.
fn clauses_hold(f: &EtaFactorization, eta: Rational) -> bool {
    let (l, v) = (f.l, f.pattern.vertex_count());
    let mut covered = BTreeSet::new();
    for m in &f.matchings {
        let mut seen = BTreeSet::new();
        for p in m {
            if p.len() != v || p.iter().any(|&x| x >= l || !seen.insert(x)) {
                return false;
            }
            for &(a, b) in f.pattern.edges() {
                let (x, y) = (p[a as usize], p[b as usize]);
                if !covered.insert((x.min(y), x.max(y))) {
                    return false;
                }
            }
        }
        if ratio((m.len() * v) as i64, 1) < (ratio(1, 1) - eta) * ratio(l as i64, 1) {
            return false;
        }
    }
    let slots = (l * (l - 1) / 2) as i64;
    ratio(slots - covered.len() as i64, 1) <= eta * ratio(slots, 1)
}

#[test]
fn eta_certification() {
    let target = ratio(1, 10);
    let mut cells = Vec::new();
    let mut pass = true;
    for (name, s) in [
        ("K2", Graph::complete(2)),
        ("P3", Graph::path(3)),
        ("K3", Graph::complete(3)),
    ] {
        for l in [12, 15, 21] {
            let mut good = 0;
            let mut best = ratio(1, 1);
            for seed in 0..100 {
                let f = factorize_best(l, &s, target, seed, DEFAULT_RESTARTS).unwrap();
                best = best.min(f.eta_achieved);
                if f.eta_achieved <= target
                    && clauses_hold(&f, target)
                    && verify_design(DesignRef::Factorization(&f, target)).passed
                {
                    good += 1;
                }
            }
            pass &= good >= 95;
            cells.push(format!("{name}/{l}: {good}/100 (best {best})"));
        }
    }
    report(
        "eta certification",
        pass,
        format!("target 1/10; {}", cells.join(", ")),
    );
}

/// Fewest chunks of admissible sizes summing to `nu`; a size `k` is
/// admissible when `k·v <= (1−η)m`.
fn min_chunks(nu: usize, v: usize, m: usize, eta: Rational) -> Option<usize> {
    let sizes: Vec<usize> = (1..=nu)
        .take_while(|&k| ratio((k * v) as i64, 1) <= (ratio(1, 1) - eta) * ratio(m as i64, 1))
        .collect();
    if sizes.is_empty() {
        return None;
    }
    let mut best = vec![usize::MAX; nu + 1];
    best[0] = 0;
    for x in 1..=nu {
        for &k in &sizes {
            if k <= x && best[x - k] != usize::MAX {
                best[x] = best[x].min(best[x - k] + 1);
            }
        }
    }
    Some(best[nu])
}

#[test]
fn chunk_formula() {
    let (mut cells, mut plan_mismatch, mut formula_mismatch, mut skipped) = (0, 0, 0, 0);
    let mut example = None;
    for eta in [ratio(0, 1), ratio(1, 8), ratio(1, 4)] {
        for v in 1..=6usize {
            for m in 1..=60usize {
                for nu in 1..=50usize {
                    let plan =
                        plan_chunks_for(&[(0, v, nu)], m, eta, |_, v| chunk_capacity(m, v, eta));
                    let Some(enumerated) = min_chunks(nu, v, m, eta) else {
                        skipped += 1;
                        if plan.is_ok() {
                            plan_mismatch += 1;
                        }
                        continue;
                    };
                    cells += 1;
                    let planned = plan.map(|p| p.chunk_count()).unwrap_or(usize::MAX);
                    if planned != enumerated {
                        plan_mismatch += 1;
                    }
                    let formula = ceil_nonneg(
                        ratio((nu * v) as i64, 1) / ((ratio(1, 1) - eta) * ratio(m as i64, 1)),
                    ) as usize;
                    if formula != enumerated {
                        formula_mismatch += 1;
                        example.get_or_insert((nu, v, m, eta, formula, enumerated));
                    }
                }
            }
        }
    }
    let detail = format!(
        "{cells} admissible cells, {skipped} without an admissible chunk size; plan vs enumerator: {plan_mismatch} mismatches; \
         closed form vs enumerator: {formula_mismatch} mismatches{}",
        example
            .map(|(nu, v, m, eta, f, e)| format!(", e.g. nu={nu} v={v} m={m} eta={eta}: formula {f}, minimum {e}"))
            .unwrap_or_default()
    );
    report(
        "chunk formula",
        plan_mismatch == 0 && formula_mismatch == 0,
        detail,
    );
}

/// Random component images on the planner's top design: each graph sits in
/// one factor with vertex-disjoint pairs, and `budget` boundary marks are
/// spread over all component vertices.
fn synthetic_images(
    top: &ResolvableDecomposition,
    graphs: usize,
    budget: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<ComponentImage>> {
    let mut images: Vec<Vec<ComponentImage>> = Vec::new();
    for g in 0..graphs {
        let f = g % top.factors.len();
        let mut comps = Vec::new();
        for (b, block) in top.factors[f].iter().enumerate() {
            let mut pts = block.clone();
            pts.shuffle(rng);
            for pair in pts.chunks_exact(2) {
                if rng.gen_bool(0.9) {
                    comps.push(ComponentImage {
                        factor: f,
                        block: b,
                        hosts: pair.to_vec(),
                        boundary: vec![false; 2],
                    });
                }
            }
        }
        images.push(comps);
    }
    let mut slots: Vec<(usize, usize, usize)> = images
        .iter()
        .enumerate()
        .flat_map(|(g, cs)| {
            cs.iter()
                .enumerate()
                .flat_map(move |(c, ci)| (0..ci.hosts.len()).map(move |k| (g, c, k)))
        })
        .collect();
    slots.shuffle(rng);
    for &(g, c, k) in slots.iter().take(budget) {
        images[g][c].boundary[k] = true;
    }
    images
}

#[test]
fn balancing() {
    let n = 60;
    let plan = candidate_plans(n, 3, ratio(4, 5), &PlanOverrides::default()).remove(0);
    let top = resolvable_decomposition(plan.n_x, plan.m).unwrap();
    let budget = (plan.xi * ratio((n * n) as i64, 2)).to_integer() as usize;
    let xi_n = plan.xi * ratio(n as i64, 1);
    let (mut reached, mut identity_failures, mut max_attempts) = (0, 0, 0);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let images = synthetic_images(&top, 52, budget, &mut rng);
        let total: usize = images
            .iter()
            .flatten()
            .map(|c| c.boundary.iter().filter(|&&b| b).count())
            .sum();
        let h = balance(&images, &top, plan.xi, n, seed, DEFAULT_MAX_ATTEMPTS, false).unwrap();
        if h.reached && ratio(h.max_degree as i64, 1) <= xi_n && h.attempts <= DEFAULT_MAX_ATTEMPTS
        {
            reached += 1;
            max_attempts = max_attempts.max(h.attempts);
        }
        for imgs in [&images, &h.images] {
            let p = compute_profile(imgs, &top, plan.eta);
            let lhs: Rational = p
                .labels
                .iter()
                .zip(&p.alpha)
                .map(|(a, &al)| ratio(p.m as i64, 1) * a.beta() * ratio(al as i64, 1))
                .sum();
            if lhs != ratio(total as i64, 1)
                || p.total_boundary != total
                || !p.check_invariants().is_empty()
            {
                identity_failures += 1;
            }
        }
    }
    report(
        "balancing",
        reached >= 95 && identity_failures == 0,
        format!(
            "K_{} into K_{}-factors, xi = {}, sum of boundaries {budget} = xi n^2/2; max degree <= xi n = {xi_n} \
             on {reached}/100 seeds (most attempts used {max_attempts}); conservation identity failed on {identity_failures} profiles",
            plan.n_x, plan.m, plan.xi
        ),
    );
}

#[test]
fn separator_embedding_regime() {
    // Δ = 2, ε = 1: δ = ε²/(72Δ²) = 1/288, ξ = ε/(12Δ²) = 1/48.
    let (n, delta) = (576usize, ratio(1, 288));
    let xi = ratio(1, 48);
    let n_x = 588;
    let n_total = 2 * n;
    let y_size = n_total - n_x;
    let cap = ceil_nonneg(ratio(3, 1) * delta * ratio((n * n) as i64, y_size as i64)) as usize;
    let (mut half, mut over, mut no_candidate, mut max_usage, mut min_cand) =
        (0, 0, 0, 0, usize::MAX);
    let seeds = 10;
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut graphs = Vec::new();
        let mut separators = Vec::new();
        let mut maps = Vec::new();
        for _ in 0..512 {
            // two P_5's with separator at their centres, the rest a matching
            let mut edges = Vec::new();
            for base in [0, 5] {
                edges.extend((0..4).map(|k| (base + k, base + k + 1)));
            }
            edges.extend((0..283).map(|k| (10 + 2 * k, 11 + 2 * k)));
            let g = Graph::new(n, edges).unwrap();
            let sep = vec![2, 7];
            let mut xs: Vec<usize> = (0..n_x).collect();
            xs.shuffle(&mut rng);
            let mut map: Vec<Option<usize>> = xs[..n].iter().map(|&x| Some(x)).collect();
            for &u in &sep {
                map[u] = None;
            }
            graphs.push(g);
            separators.push(sep);
            maps.push(map);
        }
        let mut part = ReservePartition::new(n_x, n_total);
        let params = EmbedParams {
            delta_sep: delta,
            xi,
            max_degree: 2,
            n,
            strict: false,
        };
        match embed_separators(&graphs, &separators, &mut maps, &mut part, &params) {
            Ok(stats) => {
                half += stats.half_violations;
                min_cand = min_cand.min(stats.min_candidates);
                // independent recount of per-y usage from the final maps
                let mut usage = vec![0usize; n_total];
                for ((g, sep), map) in graphs.iter().zip(&separators).zip(&maps) {
                    let in_sep: BTreeSet<usize> = sep.iter().copied().collect();
                    for &u in sep {
                        let y = map[u].unwrap();
                        assert!(part.is_y(y));
                        for &w in g.neighbors(u) {
                            let w = w as usize;
                            if !in_sep.contains(&w) {
                                usage[y] += 1;
                            } else if w < u {
                                usage[y] += 1;
                                usage[map[w].unwrap()] += 1;
                            }
                        }
                    }
                }
                let m = usage.iter().copied().max().unwrap_or(0);
                max_usage = max_usage.max(m);
                if m > cap {
                    over += 1;
                }
            }
            Err(_) => no_candidate += 1,
        }
    }
    report(
        "separator embedding regime",
        half == 0 && over == 0 && no_candidate == 0 && min_cand * 2 > y_size,
        format!(
            "{seeds} instances of 512 graphs, n = {n}, |Y| = {y_size}; min |Y_u| = {min_cand} (> {}), \
             steps at or below |Y|/2: {half}; max usage {max_usage} <= cap {cap} ({over} over); NoCandidate: {no_candidate}",
            y_size / 2
        ),
    );
}

#[test]
fn oracle_suite() {
    let t = Instant::now();
    let mut counts = Vec::new();
    let mut bad = Vec::new();
    for n in 1..=6 {
        let seqs = tree_sequences(n);
        let expected: usize = (1..=n).map(|k| free_trees(k).len()).product();
        counts.push(format!("n={n}: {}", seqs.len()));
        if seqs.len() != expected {
            bad.push(format!(
                "n={n}: {} sequences, expected {expected}",
                seqs.len()
            ));
        }
        for (i, seq) in seqs.iter().enumerate() {
            let r = brute_force_pack(
                seq,
                n,
                BacktrackBudget {
                    time_limit: Duration::from_secs(600),
                    ..Default::default()
                },
            );
            match r.outcome {
                Outcome::Sat(pm) if verify_packing(seq, &pm, n).passed => {}
                other => bad.push(format!("n={n} #{i}: {}", other.label())),
            }
        }
    }
    let elapsed = t.elapsed();
    report(
        "oracle suite",
        bad.is_empty() && elapsed <= Duration::from_secs(600),
        format!(
            "sequences {}; all Sat: {}; {:.2}s {:?}",
            counts.join(", "),
            bad.is_empty(),
            elapsed.as_secs_f64(),
            bad
        ),
    );
}

/// Components of `g − U` by flood fill.
fn flood_components(g: &Graph, sep: &[usize]) -> BTreeSet<Vec<usize>> {
    let mut seen = vec![false; g.vertex_count()];
    for &u in sep {
        seen[u] = true;
    }
    let mut out = BTreeSet::new();
    for r in 0..g.vertex_count() {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        let mut stack = vec![r];
        let mut comp = vec![];
        while let Some(x) = stack.pop() {
            comp.push(x);
            for &w in g.neighbors(x) {
                if !std::mem::replace(&mut seen[w as usize], true) {
                    stack.push(w as usize);
                }
            }
        }
        comp.sort();
        out.insert(comp);
    }
    out
}

#[test]
fn separation_bounds() {
    let s = 16;
    let cfg = SeparatorConfig {
        c_family: 1.0,
        strategy: SeparatorStrategy::TreeCentroid,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut good = 0;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let order = rng.gen_range(2..=200);
        let t = random_tree(order, 4, &mut rng);
        let Ok(sep) = separate(&t, ratio(999, 1000), s, &cfg) else {
            continue;
        };
        let bound = iterated_separator_bound(order, 1.0, halving_rounds(order, s));
        worst = worst.max(sep.separator.len() as f64 / bound);
        let stored: BTreeSet<Vec<usize>> = sep
            .components
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.sort();
                c
            })
            .collect();
        let sizes_ok = sep.components.iter().all(|c| (2..=s).contains(&c.len()));
        if sep.separator.len() as f64 <= bound
            && sizes_ok
            && stored == flood_components(&t, &sep.separator)
        {
            good += 1;
        }
    }
    report(
        "separation bounds",
        good == 100,
        format!("{good}/100 trees (order <= 200, max degree <= 4, s = {s}); largest |U| / bound = {worst:.3}"),
    );
}
