use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dspan_core::euclid::{build_euclidean, normalize_points, stretch_report, EuclidConfig, GeometricGraph, SpannerMode};
use dspan_core::experiments::{run_experiment, Experiment, ExperimentConfig};
use dspan_core::io::{read_edge_list, read_points, write_edge_list, write_sidecar};
use dspan_core::lso::{build_lso_family, family_size_bound, locality_witness};
use dspan_core::reach::{deficiency, khop_deficiency, monte_carlo_deficiency_with, CountMode};
use dspan_core::spanner1d::{
    dependable_interval_spanner, four_hop_spanner, interval_radius, khop_spanner, DerivedParams, DEFAULT_C6, DEFAULT_C7,
};
use dspan_core::{complete_graph, Error, RandomStream};

#[derive(Parser)]
#[command(name = "dspan", version, about = "Dependable spanners under random edge failure")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the complete graph K_n.
    GenClique {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a construction and write it as an edge list.
    Build {
        #[arg(value_enum)]
        kind: BuildKind,
        #[command(flatten)]
        args: BuildArgs,
    },
    /// Keep each edge of a graph with probability psi.
    Filter {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        psi: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Stream index under the seed; trial t of the experiments uses t.
        #[arg(long, default_value_t = 0)]
        trial: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Deficiency of a graph, or its Monte Carlo mean under filtering when
    /// --psi is given.
    Deficiency {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        psi: Option<f64>,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        hops: Option<u32>,
        #[arg(long)]
        sources: Option<u32>,
    },
    /// Count pairs without a (1+eps)-path of at most --hops edges.
    VerifyStretch {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 4)]
        hops: u32,
        #[arg(long)]
        check: bool,
    },
    /// Check that sampled point pairs have an eps-local ordering.
    LsoCheck {
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 10_000)]
        pairs: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        check: bool,
    },
    /// Run a named experiment and emit CSV.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BuildKind {
    Interval,
    Fourhop,
    Khop,
    Euclid,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    psi: f64,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_C6)]
    c6: f64,
    #[arg(long, default_value_t = DEFAULT_C7)]
    c7: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// four-hop or log-hop (euclid only).
    #[arg(long, default_value = "four-hop")]
    mode: String,
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    name: String,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    psi: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    d: Option<Vec<u32>>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sources: Option<u32>,
    #[arg(long)]
    hops: Option<u32>,
    #[arg(long)]
    pairs: Option<u64>,
    #[arg(long)]
    c6: Option<f64>,
    #[arg(long)]
    c7: Option<f64>,
    /// CSV destination; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    check: bool,
}

enum Failure {
    Core(Error),
    Usage(String),
    Threshold(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::Csv(_) | Error::Json(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
        Err(Failure::Threshold(v)) => {
            for line in v {
                eprintln!("threshold violated: {line}");
            }
            ExitCode::from(3)
        }
    }
}

fn run(cmd: Command) -> CliResult {
    match cmd {
        Command::GenClique { n, out } => {
            let g = complete_graph(n)?;
            save_graph(&out, &g, json!({ "command": "gen-clique", "n": n }))
        }
        Command::Build { kind, args } => build(kind, args),
        Command::Filter { graph, psi, seed, trial, out } => {
            let g = read_edge_list(&graph)?;
            let h = g.filter_edges(psi, &mut RandomStream::derive(seed, trial))?;
            let meta = json!({
                "command": "filter",
                "source": graph,
                "psi": psi,
                "seed": seed,
                "trial": trial,
                "edges_before": g.edge_count(),
            });
            save_graph(&out, &h, meta)
        }
        Command::Deficiency { graph, psi, trials, seed, hops, sources } => {
            let g = read_edge_list(&graph)?;
            let value = match psi {
                None => {
                    if sources.is_some() {
                        return Err(Failure::Usage("--sources needs --psi".into()));
                    }
                    let count = match hops {
                        None => deficiency(&g),
                        Some(k) => khop_deficiency(&g, k)?,
                    };
                    json!({ "n": g.n(), "edges": g.edge_count(), "hop_bound": hops, "failed_pairs": count })
                }
                Some(psi) => {
                    let mode = sources.map_or(CountMode::Exact, CountMode::SampledSources);
                    let r = monte_carlo_deficiency_with(&g, psi, trials, hops, seed, mode)?;
                    json!({
                        "n": r.n,
                        "edges": g.edge_count(),
                        "psi": r.psi,
                        "hop_bound": r.hop_bound,
                        "trials": r.trials,
                        "seed": r.seed,
                        "sources": sources,
                        "mean_failed_pairs": r.mean_failed_pairs,
                        "stderr": r.stderr,
                    })
                }
            };
            print_json(&value)
        }
        Command::VerifyStretch { graph, points, eps, hops, check } => {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Failure::Usage(format!("--eps {eps} must be positive")));
            }
            let ps = normalize_points(read_points(&points)?)?;
            let h = GeometricGraph::on_points(&ps, &read_edge_list(&graph)?)?;
            let r = stretch_report(&h, &ps, eps, hops, true)?;
            print_json(&json!({
                "n": ps.len(),
                "edges": h.edge_count(),
                "eps": eps,
                "hops": hops,
                "pairs": r.pairs,
                "failures": r.failures,
                "unsound": r.unsound,
            }))?;
            if check && (r.failures > 0 || r.unsound > 0) {
                return Err(Failure::Threshold(vec![format!(
                    "{} failed and {} unsound pairs of {}",
                    r.failures, r.unsound, r.pairs
                )]));
            }
            Ok(())
        }
        Command::LsoCheck { points, eps, pairs, seed, check } => {
            let ps = normalize_points(read_points(&points)?)?;
            let n = ps.len() as u64;
            if n < 2 {
                return Err(Failure::Usage("need at least two points".into()));
            }
            let family = build_lso_family(eps, ps.dimension())?;
            let mut s = RandomStream::derive(seed, 0);
            let mut passed = 0u64;
            let mut first_failure = None;
            for _ in 0..pairs {
                let u = s.below(n);
                let v = (u + 1 + s.below(n - 1)) % n;
                if locality_witness(&family, ps.points(), u as usize, v as usize)?.is_some() {
                    passed += 1;
                } else if first_failure.is_none() {
                    first_failure = Some((u, v));
                }
            }
            let bound = family_size_bound(eps, ps.dimension());
            print_json(&json!({
                "n": n,
                "d": ps.dimension(),
                "eps": eps,
                "family_size": family.len(),
                "size_bound": bound,
                "pairs": pairs,
                "passed": passed,
                "seed": seed,
            }))?;
            if check && (passed < pairs || family.len() as f64 > bound) {
                return Err(Failure::Threshold(vec![format!(
                    "{passed} of {pairs} pairs local, first failure {first_failure:?}"
                )]));
            }
            Ok(())
        }
        Command::Experiment(args) => experiment(args),
    }
}

fn build(kind: BuildKind, a: BuildArgs) -> CliResult {
    let need_n = || a.n.ok_or_else(|| Failure::Usage("--n is required".into()));
    match kind {
        BuildKind::Interval => {
            let n = need_n()?;
            let g = dependable_interval_spanner(n, a.psi, a.c6)?;
            let meta = json!({
                "command": "build interval",
                "n": n,
                "psi": a.psi,
                "c6": a.c6,
                "radius": interval_radius(n, a.psi, a.c6)?,
            });
            save_graph(&a.out, &g, meta)
        }
        BuildKind::Fourhop | BuildKind::Khop => {
            let n = need_n()?;
            let (g, derived, name) = if let BuildKind::Fourhop = kind {
                (four_hop_spanner(n, a.psi, a.c7, a.seed)?, DerivedParams::four_hop(n, a.psi, a.c7)?, "build fourhop")
            } else {
                let k = a.k.ok_or_else(|| Failure::Usage("--k is required".into()))?;
                (khop_spanner(n, a.psi, k, a.c7, a.seed)?, DerivedParams::k_hop(n, a.psi, k, a.c7)?, "build khop")
            };
            let meta = json!({
                "command": name,
                "n": n,
                "psi": a.psi,
                "c7": a.c7,
                "seed": a.seed,
                "derived": derived,
            });
            save_graph(&a.out, &g, meta)
        }
        BuildKind::Euclid => {
            let path = a.points.as_ref().ok_or_else(|| Failure::Usage("--points is required".into()))?;
            let eps = a.eps.ok_or_else(|| Failure::Usage("--eps is required".into()))?;
            let mode: SpannerMode = a.mode.parse()?;
            let ps = normalize_points(read_points(path)?)?;
            if a.n.is_some_and(|n| n as usize != ps.len()) {
                return Err(Failure::Usage(format!("--n disagrees with the {} points in {}", ps.len(), path.display())));
            }
            let cfg = EuclidConfig { c7: a.c7, ..EuclidConfig::new(eps, a.psi, mode, a.seed) };
            let built = build_euclidean(&ps, &cfg)?;
            let meta = json!({
                "command": "build euclid",
                "points": path,
                "scale": ps.scale(),
                "info": built.info,
            });
            save_graph(&a.out, built.graph.graph(), meta)
        }
    }
}

fn experiment(a: ExperimentArgs) -> CliResult {
    let exp: Experiment = a.name.parse()?;
    let mut cfg = ExperimentConfig::new(exp);
    if let Some(v) = a.n {
        cfg.n = v;
    }
    if let Some(v) = a.psi {
        cfg.psi = v;
    }
    if let Some(v) = a.k {
        cfg.k = v;
    }
    if let Some(v) = a.eps {
        cfg.eps = v;
    }
    if let Some(v) = a.d {
        cfg.d = v;
    }
    if let Some(v) = a.trials {
        cfg.trials = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.pairs {
        cfg.pairs = v;
    }
    if let Some(v) = a.c6 {
        cfg.c6 = v;
    }
    if let Some(v) = a.c7 {
        cfg.c7 = v;
    }
    cfg.sources = a.sources;
    cfg.hops = a.hops;

    let outcome = run_experiment(&cfg)?;
    match &a.out {
        Some(path) => {
            fs::write(path, &outcome.csv).map_err(Error::from)?;
            write_sidecar(path, &json!({ "config": cfg, "violations": outcome.violations }))?;
        }
        None => {
            std::io::stdout().write_all(outcome.csv.as_bytes()).map_err(Error::from)?;
        }
    }
    if a.check && !outcome.violations.is_empty() {
        return Err(Failure::Threshold(outcome.violations));
    }
    Ok(())
}

fn save_graph(out: &Path, g: &dspan_core::RankGraph, mut meta: serde_json::Value) -> CliResult {
    write_edge_list(out, g)?;
    meta["n"] = json!(g.n());
    meta["edges"] = json!(g.edge_count());
    meta["weighted"] = json!(g.is_weighted());
    write_sidecar(out, &meta)?;
    Ok(())
}

fn print_json(v: &serde_json::Value) -> CliResult {
    let text = serde_json::to_string_pretty(v).map_err(Error::from)?;
    println!("{text}");
    Ok(())
}
