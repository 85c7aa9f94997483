use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use gpack_core::designs::factorize::{factorize_best, verify_factorization, DEFAULT_RESTARTS};
use gpack_core::designs::resolvable::{resolvable_decomposition, verify_decomposition};
use gpack_core::generate::{generate_instance, InstanceKind, DEFAULT_FILL};
use gpack_core::graph::{validate_sequence, verify_packing, Graph, GraphSequence, PackingMap};
use gpack_core::oracle::{brute_force_pack, tree_sequences, BacktrackBudget, Outcome};
use gpack_core::pipeline::{run_pipeline_with_checkpoints, RunConfig};
use gpack_core::planner::{candidate_plans, strict_plan, Mode, PlanOverrides};
use gpack_core::rational::{parse_rational, Rational};
use gpack_core::separation::SeparatorStrategy;
use serde_json::json;

const EXIT_VALIDATION: u8 = 2;
const EXIT_STAGE: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser)]
#[command(
    name = "gpack",
    version,
    about = "Pack graph sequences edge-disjointly into complete graphs"
)]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the command's JSON output here instead of stdout.
    #[arg(long, global = true)]
    json_out: Option<PathBuf>,
    /// Write tabular output (usage histogram, oracle rows) as CSV.
    #[arg(long, global = true)]
    csv_out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random instance.
    Gen {
        #[arg(long, default_value = "random-trees")]
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        delta: usize,
        #[arg(long, default_value_t = DEFAULT_FILL)]
        fill: f64,
    },
    /// Show the parameters a run would use.
    Plan {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        delta: usize,
        #[command(flatten)]
        params: Params,
    },
    /// Run the full pipeline on a sequence file.
    Pack {
        sequence: PathBuf,
        #[command(flatten)]
        params: Params,
        /// Where to write the packing map.
        #[arg(long)]
        packing_out: Option<PathBuf>,
        #[arg(long, default_value = "tree-optimal")]
        strategy: String,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        /// Dump the assignment state every K graphs into `<json-out>.ckpt-K.json`.
        #[arg(long)]
        checkpoint_every: Option<usize>,
        /// Include per-stage wall times in the JSON output.
        #[arg(long)]
        timings: bool,
    },
    /// Check a packing map against a sequence.
    Verify {
        sequence: PathBuf,
        packing: PathBuf,
        /// Largest host order accepted; defaults to the map's own order.
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Exact backtracking search on small instances.
    Oracle {
        /// Sequence file to pack; omit with --trees.
        sequence: Option<PathBuf>,
        /// Host order; defaults to the sequence's n.
        #[arg(long)]
        host: Option<usize>,
        /// Run every tree sequence (T_1, ..., T_k) into K_k instead.
        #[arg(long)]
        trees: Option<usize>,
        #[arg(long, default_value_t = 50_000_000)]
        node_limit: u64,
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        #[arg(long)]
        no_symmetry: bool,
    },
    /// Build and verify designs.
    Designs {
        #[command(subcommand)]
        kind: DesignCmd,
    },
}

#[derive(Subcommand)]
enum DesignCmd {
    /// Resolvable K_m-decomposition of K_N.
    Resolvable { n: usize, m: usize },
    /// (S, eta)-factorization of K_l with S one of k2, p3, k3, pK, cK, kK, sK.
    Factorize {
        l: usize,
        pattern: String,
        #[arg(long, default_value = "1/10")]
        eta: String,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
    },
}

#[derive(Args)]
struct Params {
    #[arg(long, default_value = "4/5")]
    epsilon: String,
    #[arg(long, default_value = "best-effort")]
    mode: String,
    #[arg(long)]
    xi: Option<String>,
    /// Separator budget as a fraction of the graph order.
    #[arg(long)]
    delta_sep: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
}

impl Params {
    fn epsilon(&self) -> Result<Rational> {
        rational(&self.epsilon)
    }

    fn mode(&self) -> Result<Mode> {
        match self.mode.as_str() {
            "best-effort" => Ok(Mode::BestEffort),
            "strict-regime" => Ok(Mode::StrictRegime),
            other => Err(anyhow!("unknown mode {other}")),
        }
    }

    fn overrides(&self) -> Result<PlanOverrides> {
        let opt = |x: &Option<String>| x.as_deref().map(rational).transpose();
        Ok(PlanOverrides {
            xi: opt(&self.xi)?,
            delta: opt(&self.delta_sep)?,
            eta: opt(&self.eta)?,
            s: self.s,
            l: self.l,
            m: self.m,
        })
    }
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn fail(code: u8) -> impl FnOnce(anyhow::Error) -> Failure {
    move |error| Failure { code, error }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure {
            code: EXIT_VALIDATION,
            error,
        }
    }
}

fn rational(text: &str) -> Result<Rational> {
    parse_rational(text).ok_or_else(|| anyhow!("not a rational number: {text}"))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(cli: &Cli, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match &cli.json_out {
        Some(p) => write_text(p, &text),
        None => {
            let _ = writeln!(std::io::stdout(), "{text}");
            Ok(())
        }
    }
}

fn emit_csv(cli: &Cli, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let Some(path) = &cli.csv_out else {
        return Ok(());
    };
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn pattern(name: &str) -> Result<Graph> {
    let bad = || anyhow!("unknown pattern {name}");
    let (kind, k) = name.split_at_checked(1).ok_or_else(bad)?;
    let k: usize = k.parse().map_err(|_| bad())?;
    Ok(match kind {
        "k" => Graph::complete(k),
        "p" => Graph::path(k),
        "c" => Graph::cycle(k),
        "s" => Graph::star(k),
        _ => return Err(bad()),
    })
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.cmd {
        Cmd::Gen {
            kind,
            n,
            delta,
            fill,
        } => {
            let k = InstanceKind::parse(kind).ok_or_else(|| anyhow!("unknown kind {kind}"))?;
            let seq = generate_instance(k, *n, *delta, cli.seed, *fill).map_err(|e| anyhow!(e))?;
            emit(
                cli,
                &serde_json::to_value(&seq).map_err(anyhow::Error::from)?,
            )?;
        }
        Cmd::Plan { n, delta, params } => {
            let eps = params.epsilon()?;
            let o = params.overrides()?;
            let value = match params.mode()? {
                Mode::StrictRegime => {
                    let plan = strict_plan(*n, *delta, eps, o.s.unwrap_or(2), &o)
                        .map_err(|e| fail(EXIT_STAGE)(e.into()))?;
                    json!([plan])
                }
                Mode::BestEffort => json!(candidate_plans(*n, *delta, eps, &o)),
            };
            emit(cli, &value)?;
        }
        Cmd::Pack {
            sequence,
            params,
            packing_out,
            strategy,
            restarts,
            checkpoint_every,
            timings,
        } => {
            let seq: GraphSequence = read_json(sequence)?;
            let report = validate_sequence(&seq);
            if !report.passed {
                return Err(fail(EXIT_VALIDATION)(anyhow!(
                    "invalid sequence: {:?}",
                    report.violations
                )));
            }
            let cfg = RunConfig {
                epsilon: params.epsilon()?,
                overrides: params.overrides()?,
                seed: cli.seed,
                strategy: SeparatorStrategy::parse(strategy)
                    .ok_or_else(|| anyhow!("unknown strategy {strategy}"))?,
                mode: params.mode()?,
                restarts: *restarts,
                ..Default::default()
            };
            let stem = cli
                .json_out
                .clone()
                .unwrap_or_else(|| PathBuf::from("gpack-run.json"));
            let mut ckpt_err = None;
            let mut sink = |k: usize, v: serde_json::Value| {
                let path = PathBuf::from(format!("{}.ckpt-{k}.json", stem.display()));
                if let Err(e) = write_text(&path, &v.to_string()) {
                    ckpt_err.get_or_insert(e);
                }
            };
            let checkpoints = checkpoint_every
                .map(|k| (k, &mut sink as &mut dyn FnMut(usize, serde_json::Value)));
            let result = run_pipeline_with_checkpoints(&cfg, &seq, checkpoints).map_err(|e| {
                let code = if e.stage() == "validate" {
                    EXIT_VALIDATION
                } else {
                    EXIT_STAGE
                };
                Failure {
                    code,
                    error: anyhow!("[{}] {e}", e.stage()),
                }
            })?;
            if let Some(e) = ckpt_err {
                return Err(e.into());
            }
            if let Some(p) = packing_out {
                write_text(
                    p,
                    &serde_json::to_string(&result.packing).map_err(anyhow::Error::from)?,
                )?;
            }
            let mut value = serde_json::to_value(&result).map_err(anyhow::Error::from)?;
            if *timings {
                value["timings"] =
                    serde_json::to_value(&result.timings).map_err(anyhow::Error::from)?;
            }
            emit(cli, &value)?;
            let rows: Vec<Vec<String>> = result
                .y_usage
                .iter()
                .map(|(y, u)| vec![y.to_string(), u.to_string()])
                .collect();
            emit_csv(cli, &["y", "usage"], &rows)?;
            if !result.verified {
                return Err(fail(EXIT_VERIFY)(anyhow!(
                    "packing failed verification: {:?}",
                    result.verify.issues
                )));
            }
            eprintln!("verified packing into K_{}", result.host_order);
        }
        Cmd::Verify {
            sequence,
            packing,
            bound,
        } => {
            let seq: GraphSequence = read_json(sequence)?;
            let pm: PackingMap = read_json(packing)?;
            let report = verify_packing(&seq, &pm, bound.unwrap_or(pm.host_order));
            emit(
                cli,
                &serde_json::to_value(&report).map_err(anyhow::Error::from)?,
            )?;
            if !report.passed {
                return Err(fail(EXIT_VERIFY)(anyhow!("{} issues", report.issues.len())));
            }
        }
        Cmd::Oracle {
            sequence,
            host,
            trees,
            node_limit,
            time_limit,
            no_symmetry,
        } => {
            let budget = BacktrackBudget {
                node_limit: *node_limit,
                time_limit: Duration::from_secs_f64(*time_limit),
                symmetry_breaking: !no_symmetry,
            };
            let seqs: Vec<GraphSequence> = match (sequence, trees) {
                (Some(p), None) => vec![read_json(p)?],
                (None, Some(k)) => tree_sequences(*k),
                _ => return Err(anyhow!("give either a sequence file or --trees").into()),
            };
            let mut rows = Vec::new();
            let mut out = Vec::new();
            let mut worst = 0;
            for (id, seq) in seqs.iter().enumerate() {
                let host = host.unwrap_or(seq.n);
                let t = Instant::now();
                let r = brute_force_pack(seq, host, budget);
                let ms = t.elapsed().as_millis();
                rows.push(vec![
                    id.to_string(),
                    r.outcome.label().to_string(),
                    r.nodes.to_string(),
                    ms.to_string(),
                ]);
                let packing = match &r.outcome {
                    Outcome::Sat(pm) => serde_json::to_value(pm).map_err(anyhow::Error::from)?,
                    _ => {
                        worst = worst.max(if r.outcome == Outcome::Unsat {
                            EXIT_VERIFY
                        } else {
                            EXIT_STAGE
                        });
                        serde_json::Value::Null
                    }
                };
                out.push(json!({"sequence": id, "result": r.outcome.label(), "nodes": r.nodes, "early_cut": r.early_cut, "packing": packing}));
            }
            emit(cli, &json!(out))?;
            emit_csv(cli, &["sequence", "result", "nodes", "millis"], &rows)?;
            if worst > 0 {
                return Err(fail(worst)(anyhow!("not every sequence was packed")));
            }
        }
        Cmd::Designs { kind } => match kind {
            DesignCmd::Resolvable { n, m } => {
                let d = resolvable_decomposition(*n, *m).map_err(|e| fail(EXIT_STAGE)(e.into()))?;
                let report = verify_decomposition(&d);
                let mut value = serde_json::to_value(&d).map_err(anyhow::Error::from)?;
                value["report"] = serde_json::to_value(&report).map_err(anyhow::Error::from)?;
                emit(cli, &value)?;
                if !report.passed {
                    return Err(fail(EXIT_VERIFY)(anyhow!("{:?}", report.issues)));
                }
            }
            DesignCmd::Factorize {
                l,
                pattern: p,
                eta,
                restarts,
            } => {
                let eta = rational(eta)?;
                let f = factorize_best(*l, &pattern(p)?, eta, cli.seed, *restarts)
                    .map_err(|e| fail(EXIT_STAGE)(e.into()))?;
                let report = verify_factorization(&f, eta);
                let mut value = serde_json::to_value(&f).map_err(anyhow::Error::from)?;
                value["report"] = serde_json::to_value(&report).map_err(anyhow::Error::from)?;
                emit(cli, &value)?;
                if !report.passed {
                    return Err(fail(EXIT_VERIFY)(anyhow!("{:?}", report.issues)));
                }
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let _ = writeln!(std::io::stderr(), "gpack: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
