//! `egospectral`: eigenvalue bounds for networks from egonet moments.
//!
//! Machine-readable results go to stdout as JSON; diagnostics go to stderr.
//! Exit status is 2 for usage errors and unreadable or malformed input, 1
//! for computational failures (including sandwich violations), 0 otherwise.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use egospectral::harness::{run_experiment_on, summarize, write_scatter, ExperimentConfig, ScatterFormat};
use egospectral::linalg::DEFAULT_DENSE_CAP;
use egospectral::moments::spectral_moments_from_egonets_with;
use egospectral::{
    analyze_moments, chung_lu_estimate, moments_exact_trace, parse_edge_list, BoundOptions, Graph, MomentOptions,
    MomentSequence, ParseOptions,
};
use serde::Serialize;
use serde_json::json;

const PSD_TOL_VAR: &str = "EGOSPECTRAL_PSD_TOL";

#[derive(Parser)]
#[command(name = "egospectral", version, about = "Certified bounds on the largest adjacency eigenvalue from egonet moments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an edge list and print a summary.
    Ingest {
        edgelist: PathBuf,
        #[command(flatten)]
        parse: ParseArgs,
    },
    /// Spectral moments m_0..m_{2r+1} from radius-r egonets.
    Moments {
        edgelist: PathBuf,
        #[arg(long, short, default_value_t = 2)]
        radius: usize,
        /// Compare against the trace route (small graphs only); report on stderr.
        #[arg(long)]
        verify: bool,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        parse: ParseArgs,
    },
    /// Bounds from a moment sequence; no graph needed.
    Bounds {
        /// JSON file from `moments`, inline JSON, or a comma-separated list.
        #[arg(long)]
        moments: String,
        /// Node count of the source graph (overrides the one in the JSON).
        #[arg(long)]
        n: Option<usize>,
        /// Bound order; defaults to the highest the moments support.
        #[arg(long)]
        r: Option<usize>,
        /// Epidemic threshold to classify against.
        #[arg(long)]
        tau: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Chung-Lu estimate from node strengths.
    Estimate {
        edgelist: PathBuf,
        #[command(flatten)]
        parse: ParseArgs,
    },
    /// Run a sampling experiment described by a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (overrides the config).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check the built-in published moment fixtures.
    Fixtures,
}

#[derive(Args)]
struct ParseArgs {
    /// Reject repeated edges even when their weights agree.
    #[arg(long)]
    reject_duplicates: bool,
}

#[derive(Args)]
struct SolverArgs {
    /// Compute the upper bound even when the moments come from negative weights.
    #[arg(long)]
    allow_negative_weights: bool,
    #[arg(long)]
    scan_steps: Option<usize>,
    /// PSD tolerance, relative to the largest matrix entry.
    #[arg(long)]
    psd_tol: Option<f64>,
    #[arg(long)]
    bisection_tol: Option<f64>,
    /// Skip the moment prescaling step.
    #[arg(long)]
    no_prescale: bool,
}

enum Failure {
    Usage(String),
    Compute(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Compute(_) => 1,
        }
    }
}

impl From<egospectral::Error> for Failure {
    fn from(e: egospectral::Error) -> Self {
        use egospectral::Error as E;
        match e {
            E::Io(_) | E::Parse { .. } | E::Json(_) | E::InvalidMoments(_) | E::InvalidArgument(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Compute(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn print_json<T: Serialize>(value: &T) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Compute(e.to_string()))?;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|()| out.flush()) {
        // a closed pipe (e.g. `| head`) is not our failure
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Compute(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn load_graph(path: &Path, parse: &ParseArgs) -> Result<(Graph, egospectral::graph::ParseStats), Failure> {
    let text = read_input(path)?;
    let opts = ParseOptions {
        reject_duplicates: parse.reject_duplicates,
    };
    let (g, stats) =
        parse_edge_list(&text, &opts).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if stats.duplicate_edges > 0 {
        eprintln!("warning: {} duplicate edge line(s) ignored", stats.duplicate_edges);
    }
    Ok((g, stats))
}

/// Shared PSD tolerance from the environment, if set.
fn env_psd_tol() -> Result<Option<f64>, Failure> {
    match std::env::var(PSD_TOL_VAR) {
        Ok(v) => match v.trim().parse::<f64>() {
            Ok(t) if t >= 0.0 && t.is_finite() => Ok(Some(t)),
            _ => Err(usage(format!("{PSD_TOL_VAR} must be a nonnegative number, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn bound_options(base: BoundOptions, args: Option<&SolverArgs>) -> Result<BoundOptions, Failure> {
    let mut opts = base;
    if let Some(t) = env_psd_tol()? {
        opts.psd_tol = t;
    }
    if let Some(a) = args {
        opts.allow_negative_weights |= a.allow_negative_weights;
        if let Some(s) = a.scan_steps {
            if s == 0 {
                return Err(usage("--scan-steps must be positive"));
            }
            opts.scan_steps = s;
        }
        if let Some(t) = a.psd_tol {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(usage("--psd-tol must be a nonnegative number"));
            }
            opts.psd_tol = t;
        }
        if let Some(t) = a.bisection_tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(usage("--bisection-tol must be positive"));
            }
            opts.bisection_tol = t;
        }
        if a.no_prescale {
            opts.prescale = false;
        }
    }
    Ok(opts)
}

/// `--moments` accepts a file path, inline JSON (object or array), or `1,0,2,2`.
fn parse_moments_arg(arg: &str) -> Result<MomentSequence, Failure> {
    let trimmed = arg.trim();
    let path = Path::new(trimmed);
    let text = if !trimmed.starts_with(['{', '[']) && path.is_file() {
        read_input(path)?
    } else {
        trimmed.to_owned()
    };
    let text = text.trim();
    if text.starts_with('{') {
        return serde_json::from_str(text).map_err(|e| usage(format!("bad moments JSON: {e}")));
    }
    let values: Vec<f64> = if text.starts_with('[') {
        serde_json::from_str(text).map_err(|e| usage(format!("bad moments array: {e}")))?
    } else {
        if !text.contains(',') && !text.chars().next().is_some_and(|c| c.is_ascii_digit() || c == '-' || c == '+') {
            return Err(usage(format!("--moments: no such file and not a moment list: {arg}")));
        }
        text.split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| usage(format!("bad moment list {arg:?}: {e}")))?
    };
    MomentSequence::external(values, None).map_err(|e| usage(e.to_string()))
}

fn cmd_ingest(path: &Path, parse: &ParseArgs) -> Outcome {
    let (g, stats) = load_graph(path, parse)?;
    let mut out = serde_json::to_value(g.summary()).map_err(|e| Failure::Compute(e.to_string()))?;
    out["duplicate_edges"] = json!(stats.duplicate_edges);
    out["comment_lines"] = json!(stats.comment_lines);
    print_json(&out)
}

fn cmd_moments(path: &Path, radius: usize, verify: bool, workers: Option<usize>, parse: &ParseArgs) -> Outcome {
    if radius == 0 {
        return Err(usage("--radius must be at least 1"));
    }
    if workers == Some(0) {
        return Err(usage("--workers must be at least 1"));
    }
    let (g, _) = load_graph(path, parse)?;
    let m = spectral_moments_from_egonets_with(&g, radius, &MomentOptions { workers })?;
    print_json(&m)?;
    if verify {
        if g.node_count() > DEFAULT_DENSE_CAP {
            eprintln!(
                "verify: skipped, n = {} exceeds the trace-route cap of {DEFAULT_DENSE_CAP}",
                g.node_count()
            );
            return Ok(());
        }
        let trace = moments_exact_trace(&g, m.max_order())?;
        let abs = moments_exact_trace(&g.map_weights(|_, _, w| w.abs())?, m.max_order())?;
        let worst = (0..=m.max_order())
            .map(|k| (m.get(k) - trace.get(k)).abs() / abs.get(k).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        let agree = worst <= 1e-9;
        eprintln!(
            "{}",
            json!({ "verify": { "trace_moments": trace.values(), "max_relative_gap": worst, "agree": agree } })
        );
        if !agree {
            return Err(Failure::Compute("egonet and trace moments disagree".into()));
        }
    }
    Ok(())
}

fn cmd_bounds(moments: &str, n: Option<usize>, r: Option<usize>, tau: Option<f64>, solver: &SolverArgs) -> Outcome {
    let mut m = parse_moments_arg(moments)?;
    if let Some(n) = n {
        if n == 0 {
            return Err(usage("--n must be positive"));
        }
        m.n = Some(n);
    }
    let opts = bound_options(BoundOptions::default(), Some(solver))?;
    let report = analyze_moments(&m, r, tau, &opts)?;
    if let Some(why) = &report.delta_unavailable {
        eprintln!("note: no upper bound: {why}");
    }
    print_json(&report)
}

fn cmd_estimate(path: &Path, parse: &ParseArgs) -> Outcome {
    let (g, _) = load_graph(path, parse)?;
    let strengths: Vec<f64> = (0..g.node_count()).map(|i| g.strength(i)).collect();
    let est = chung_lu_estimate(&strengths).map_err(|e| Failure::Compute(e.to_string()))?;
    if !est.asymptotic_condition {
        eprintln!("note: outside the regime where the Chung-Lu estimate is asymptotically exact");
    }
    print_json(&est)
}

fn cmd_experiment(config: &Path, workers: Option<usize>) -> Outcome {
    let text = read_input(config)?;
    let mut cfg: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", config.display())))?;
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    if let Some(w) = workers {
        if w == 0 {
            return Err(usage("--workers must be at least 1"));
        }
        cfg.workers = Some(w);
    }
    cfg.bounds = bound_options(cfg.bounds, None)?;
    let base = config.parent().unwrap_or(Path::new("."));
    cfg.resolve_paths(base);

    let g = cfg.load_graph().map_err(|e| match e {
        egospectral::Error::Io(io) => usage(format!("cannot read graph: {io}")),
        other => Failure::from(other),
    })?;
    let rows = run_experiment_on(&g, &cfg)?;
    if let Some(p) = &cfg.output_csv {
        write_scatter(&rows, ScatterFormat::Csv, p)?;
    }
    if let Some(p) = &cfg.output_json {
        write_scatter(&rows, ScatterFormat::Json, p)?;
    }
    let summary = summarize(&rows);
    print_json(&summary)?;
    for row in rows.iter().filter(|r| !r.passed()) {
        eprintln!("seed {}: {}", row.seed, row.error.as_deref().unwrap_or(""));
    }
    if summary.failed > 0 {
        return Err(Failure::Compute(format!("{} of {} samples failed", summary.failed, summary.samples)));
    }
    Ok(())
}

struct Fixture {
    name: &'static str,
    n: usize,
    moments: [f64; 6],
    beta: f64,
    delta: f64,
}

const FIXTURES: [Fixture; 2] = [
    Fixture {
        name: "enron",
        n: 3215,
        moments: [1.0, 0.0, 22.47, 394.7, 33491.0, 2603200.0],
        beta: 78.53,
        delta: 98.74,
    },
    Fixture {
        name: "as-skitter",
        n: 2248,
        moments: [1.0, 0.0, 18.37, 341.1, 40001.0, 2777018.0],
        beta: 74.72,
        delta: 93.94,
    },
];

fn cmd_fixtures() -> Outcome {
    let opts = bound_options(BoundOptions::default(), None)?;
    let mut all = true;
    let mut out = Vec::new();
    for f in &FIXTURES {
        let m = MomentSequence::external(f.moments.to_vec(), Some(f.n))?;
        let report = analyze_moments(&m, Some(2), None, &opts)?;
        let delta = report.delta.unwrap_or(f64::NAN);
        let close = |x: f64, t: f64| ((x - t) / t).abs() <= 0.01;
        let pass = close(report.beta, f.beta) && close(delta, f.delta);
        all &= pass;
        eprintln!(
            "{} {}: beta = {:.4} (published {}), delta = {:.4} (published {})",
            if pass { "PASS" } else { "FAIL" },
            f.name,
            report.beta,
            f.beta,
            delta,
            f.delta
        );
        out.push(json!({
            "name": f.name,
            "n": f.n,
            "moments": f.moments,
            "beta": report.beta,
            "delta": report.delta,
            "published_beta": f.beta,
            "published_delta": f.delta,
            "pass": pass,
        }));
    }
    print_json(&out)?;
    if all {
        Ok(())
    } else {
        Err(Failure::Compute("fixture bounds outside 1% of the published values".into()))
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Ingest { edgelist, parse } => cmd_ingest(&edgelist, &parse),
        Command::Moments {
            edgelist,
            radius,
            verify,
            workers,
            parse,
        } => cmd_moments(&edgelist, radius, verify, workers, &parse),
        Command::Bounds {
            moments,
            n,
            r,
            tau,
            solver,
        } => cmd_bounds(&moments, n, r, tau, &solver),
        Command::Estimate { edgelist, parse } => cmd_estimate(&edgelist, &parse),
        Command::Experiment { config, workers } => cmd_experiment(&config, workers),
        Command::Fixtures => cmd_fixtures(),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors by itself
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Usage(msg) | Failure::Compute(msg)) = &f;
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}
