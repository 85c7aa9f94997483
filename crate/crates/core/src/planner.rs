//! Parameter planning: choose `(ξ, δ, η, s, ℓ, m, N)` for a run.

use serde::{Deserialize, Serialize};

use crate::designs::resolvable::family;
use crate::error::PlanError;
use crate::rational::{floor_nonneg, ratio, to_f64, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    StrictRegime,
    BestEffort,
}

/// Parameters of one pipeline run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub n: usize,
    pub max_degree: usize,
    #[serde(with = "crate::rational::serde_rational")]
    pub epsilon: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub xi: Rational,
    /// Separator budget `δ` as a fraction of the graph order.
    #[serde(with = "crate::rational::serde_rational")]
    pub delta: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub eta: Rational,
    pub s: usize,
    pub l: usize,
    pub m: usize,
    /// `|X|`, the order of the clique that hosts the component graphs.
    pub n_x: usize,
    /// `⌊(1+ε)n⌋`, the full host order.
    pub n_total: usize,
}

impl Plan {
    pub fn y_size(&self) -> usize {
        self.n_total - self.n_x
    }
}

/// User overrides of planner choices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanOverrides {
    pub xi: Option<Rational>,
    pub delta: Option<Rational>,
    pub eta: Option<Rational>,
    pub s: Option<usize>,
    pub l: Option<usize>,
    pub m: Option<usize>,
}

/// `⌊(1+ε)n⌋`.
pub fn host_order(n: usize, epsilon: Rational) -> usize {
    floor_nonneg((ratio(1, 1) + epsilon) * ratio(n as i64, 1)) as usize
}

/// Plan with the asymptotic constants: `ξ = ε/(12Δ²)`, `δ = ε²/(72Δ²)`,
/// `η = ξ/8`, `ℓ > s²`, `m > 16σℓ/ξ` with `σ = 2^{s²}` and
/// `n ≥ n₀ > max{4m²/ξ, 2^{2m}}`. Every violated inequality is reported.
pub fn strict_plan(
    n: usize,
    max_degree: usize,
    epsilon: Rational,
    s: usize,
    o: &PlanOverrides,
) -> Result<Plan, PlanError> {
    let mut failures = Vec::new();
    if epsilon <= ratio(0, 1) {
        return Err(PlanError::Infeasible("ε must be positive".into()));
    }
    let dd = (max_degree.max(1) * max_degree.max(1)) as i64;
    let xi = o.xi.unwrap_or(epsilon / ratio(12 * dd, 1));
    let delta = o.delta.unwrap_or(epsilon * epsilon / ratio(72 * dd, 1));
    let eta = o.eta.unwrap_or(xi / ratio(8, 1));
    let s = o.s.unwrap_or(s);
    let l = o.l.unwrap_or(s * s + 1);
    if xi <= ratio(0, 1) || xi >= epsilon {
        failures.push(format!("0 < ξ < ε fails for ξ = {xi}"));
    }
    if l <= s * s {
        failures.push(format!("ℓ > s² fails: ℓ = {l}, s² = {}", s * s));
    }
    let sigma = if s * s < 60 {
        2f64.powi((s * s) as i32)
    } else {
        f64::INFINITY
    };
    let m_min = 16.0 * sigma * l as f64 / to_f64(xi);
    let m = match o.m {
        Some(m) => {
            if (m as f64) <= m_min {
                failures.push(format!("m > 16σℓ/ξ fails: m = {m}, 16σℓ/ξ = {m_min:.3e}"));
            }
            m
        }
        None => {
            if m_min > 1e6 {
                failures.push(format!("m > 16σℓ/ξ needs m > {m_min:.3e}"));
                0
            } else {
                m_min.floor() as usize + 1
            }
        }
    };
    if m > 0 {
        let n0 = (4.0 * (m * m) as f64 / to_f64(xi)).max(2f64.powi((2 * m).min(1000) as i32));
        if (n as f64) <= n0 {
            failures.push(format!(
                "n > n₀ = max{{4m²/ξ, 2^{{2m}}}} fails: n = {n}, n₀ = {n0:.3e}"
            ));
        }
        if family(m, l).is_none() {
            failures.push(format!(
                "no supported resolvable K_{l}-decomposition of K_{m}"
            ));
        }
    }
    let n_total = host_order(n, epsilon);
    let n_x = if m > 0 {
        largest_supported(host_order(n, xi), m, n)
    } else {
        None
    };
    if m > 0 && n_x.is_none() {
        failures.push(format!(
            "no supported K_{m}-decomposable order in [n, (1+ξ)n] for n = {n}"
        ));
    }
    if !failures.is_empty() {
        return Err(PlanError::Infeasible(failures.join("; ")));
    }
    Ok(Plan {
        n,
        max_degree,
        epsilon,
        xi,
        delta,
        eta,
        s,
        l,
        m,
        n_x: n_x.unwrap(),
        n_total,
    })
}

/// Largest order in `[low, high]` with a supported `K_m`-decomposition.
pub fn largest_supported(high: usize, m: usize, low: usize) -> Option<usize> {
    (low.max(m)..=high).rev().find(|&x| family(x, m).is_some())
}

/// Shapes `(m, ℓ, s)` tried in best-effort mode, in order.
pub const SHAPES: [(usize, usize, usize); 8] = [
    (8, 2, 2),
    (4, 2, 2),
    (9, 3, 3),
    (3, 3, 3),
    (2, 2, 2),
    (4, 4, 3),
    (4, 4, 4),
    (5, 5, 5),
];

/// Candidate plans for best-effort mode, most promising first. For every
/// shape the `|X|` values tried are the supported orders between `n` and
/// the host, largest reserve first.
pub fn candidate_plans(
    n: usize,
    max_degree: usize,
    epsilon: Rational,
    o: &PlanOverrides,
) -> Vec<Plan> {
    let n_total = host_order(n, epsilon);
    let mut out = Vec::new();
    for &(m, l, s) in &SHAPES {
        let m = o.m.unwrap_or(m);
        let l = o.l.unwrap_or(l);
        let s = o.s.unwrap_or(s).min(l);
        if l > m || family(m, l).is_none() || s < 2 {
            continue;
        }
        let low = n.max(2);
        let orders: Vec<usize> = (low..n_total)
            .filter(|&x| x >= m && family(x, m).is_some())
            .collect();
        for &n_x in orders.iter().take(3) {
            let xi =
                o.xi.unwrap_or(ratio(n_x as i64 - n as i64, n as i64).max(ratio(1, n as i64 * 8)));
            let plan = Plan {
                n,
                max_degree,
                epsilon,
                xi,
                delta: o.delta.unwrap_or(ratio(999, 1000)),
                eta: o.eta.unwrap_or(xi / ratio(8, 1)),
                s,
                l,
                m,
                n_x,
                n_total,
            };
            if !out.contains(&plan) {
                out.push(plan);
            }
        }
        if o.m.is_some() && o.l.is_some() {
            break;
        }
    }
    out
}
