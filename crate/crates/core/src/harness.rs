//! Experiment harness: sample BFS subgraphs, bound each one, and check the
//! bounds against its exact largest eigenvalue.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{analyze_moments, beta1_closed_form, chung_lu_estimate, BoundOptions};
use crate::error::{Error, Result};
use crate::format::{round_sig10, sig10};
use crate::graph::{bfs_subgraph_sample, parse_edge_list, Graph, ParseOptions};
use crate::linalg::{lambda1_exact, Lambda1Options};
use crate::moments::{count_triangles, spectral_moments_from_egonets_with, MomentOptions};

/// Synthetic stand-ins for real networks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyntheticSpec {
    /// `G(n, p)`: each pair joined independently with probability `p`.
    ErdosRenyi { n: usize, p: f64 },
    /// Barabási–Albert growth from a clique on `edges_per_node + 1` nodes.
    PreferentialAttachment { n: usize, edges_per_node: usize },
}

/// Deterministic synthetic graph for a given seed.
pub fn generate_synthetic(spec: &SyntheticSpec, rng_seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    match *spec {
        SyntheticSpec::ErdosRenyi { n, p } => {
            if n < 2 {
                return Err(Error::InvalidArgument("erdos_renyi needs n >= 2".into()));
            }
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "erdos_renyi needs 0 < p <= 1, got {p}"
                )));
            }
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen::<f64>() < p {
                        edges.push((i, j, 1.0));
                    }
                }
            }
            Graph::from_edges(n, edges)
        }
        SyntheticSpec::PreferentialAttachment { n, edges_per_node: m } => {
            if n < 2 || m == 0 || m >= n {
                return Err(Error::InvalidArgument(format!(
                    "preferential_attachment needs n >= 2 and 1 <= edges_per_node < n, got n = {n}, edges_per_node = {m}"
                )));
            }
            let mut edges = Vec::with_capacity(n * m);
            // every endpoint once per incident edge: uniform draws are degree-proportional
            let mut endpoints: Vec<usize> = Vec::with_capacity(2 * n * m);
            for i in 0..=m {
                for j in i + 1..=m {
                    edges.push((i, j, 1.0));
                    endpoints.extend([i, j]);
                }
            }
            let mut chosen = Vec::with_capacity(m);
            for v in m + 1..n {
                chosen.clear();
                while chosen.len() < m {
                    let t = endpoints[rng.gen_range(0..endpoints.len())];
                    if !chosen.contains(&t) {
                        chosen.push(t);
                    }
                }
                for &t in &chosen {
                    edges.push((t, v, 1.0));
                    endpoints.extend([t, v]);
                }
            }
            Graph::from_edges(n, edges)
        }
    }
}

/// Where the experiment's graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    /// Edge-list file.
    Path(PathBuf),
    Synthetic(SyntheticSpec),
}

fn default_samples() -> usize {
    100
}

fn default_two() -> usize {
    2
}

/// Experiment configuration, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub source: GraphSource,
    #[serde(default = "default_samples")]
    pub num_samples: usize,
    #[serde(default = "default_two")]
    pub bfs_depth: usize,
    /// Egonet radius used for the moments.
    #[serde(default = "default_two")]
    pub r: usize,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub output_csv: Option<PathBuf>,
    #[serde(default)]
    pub output_json: Option<PathBuf>,
    /// Fill the `ms_*` columns. Off by default because wall-clock times
    /// make reruns differ.
    #[serde(default)]
    pub record_timings: bool,
    /// Worker threads for processing samples; `None` uses every core.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub bounds: BoundOptions,
}

impl ExperimentConfig {
    pub fn new(source: GraphSource) -> Self {
        Self {
            source,
            num_samples: default_samples(),
            bfs_depth: 2,
            r: 2,
            rng_seed: 0,
            tau: None,
            output_csv: None,
            output_json: None,
            record_timings: false,
            workers: None,
            bounds: BoundOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_samples == 0 {
            return Err(Error::InvalidArgument("num_samples must be at least 1".into()));
        }
        if self.bfs_depth == 0 {
            return Err(Error::InvalidArgument("bfs_depth must be at least 1".into()));
        }
        if self.r == 0 {
            return Err(Error::InvalidArgument("r must be at least 1".into()));
        }
        Ok(())
    }

    /// Resolves relative paths against `base` (normally the config file's directory).
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let GraphSource::Path(p) = &mut self.source {
            fix(p);
        }
        if let Some(p) = &mut self.output_csv {
            fix(p);
        }
        if let Some(p) = &mut self.output_json {
            fix(p);
        }
    }

    pub fn load_graph(&self) -> Result<Graph> {
        match &self.source {
            GraphSource::Path(path) => {
                let text = std::fs::read_to_string(path)?;
                parse_edge_list(&text, &ParseOptions::default()).map(|(g, _)| g)
            }
            GraphSource::Synthetic(spec) => generate_synthetic(spec, self.rng_seed),
        }
    }
}

/// One sampled subgraph: its exact `lambda_1` against the bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    /// Label of the BFS seed node in the input graph.
    pub seed: String,
    pub n: usize,
    pub e: usize,
    pub lambda1: Option<f64>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub beta_closed_form: Option<f64>,
    pub chung_lu: Option<f64>,
    pub ms_moments: Option<f64>,
    pub ms_bounds: Option<f64>,
    pub error: Option<String>,
}

impl ScatterRow {
    /// Row completed without error or sandwich violation.
    pub fn passed(&self) -> bool {
        self.error.is_none()
    }

    pub fn relative_width(&self) -> Option<f64> {
        match (self.lambda1, self.beta, self.delta) {
            (Some(l), Some(b), Some(d)) if l > 0.0 => Some((d - b) / l),
            _ => None,
        }
    }
}

/// Draws `count` distinct seeds among nodes of degree at least 1.
pub fn select_seeds(g: &Graph, count: usize, rng_seed: u64) -> Result<Vec<usize>> {
    let eligible: Vec<usize> = (0..g.node_count()).filter(|&i| g.degree(i) > 0).collect();
    if count > eligible.len() {
        return Err(Error::InvalidArgument(format!(
            "num_samples = {count} exceeds the {} nodes with at least one edge",
            eligible.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(1);
    Ok(index::sample(&mut rng, eligible.len(), count)
        .into_iter()
        .map(|k| eligible[k])
        .collect())
}

/// Slack allowed on top of the solver brackets when checking
/// `beta <= lambda_1 <= delta`; covers the eigenvalue residual tolerance.
fn sandwich_slack(lambda1: f64) -> f64 {
    1e-8 * lambda1.abs().max(1.0)
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Runs the full pipeline on the depth-`cfg.bfs_depth` BFS subgraph around `seed`.
pub fn run_sample(g: &Graph, seed: usize, cfg: &ExperimentConfig) -> ScatterRow {
    let mut row = ScatterRow {
        seed: g.label(seed).to_owned(),
        n: 0,
        e: 0,
        lambda1: None,
        beta: None,
        delta: None,
        beta_closed_form: None,
        chung_lu: None,
        ms_moments: None,
        ms_bounds: None,
        error: None,
    };
    let sub = match bfs_subgraph_sample(g, seed, cfg.bfs_depth) {
        Ok(s) => s,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.n = sub.node_count();
    row.e = sub.edge_count();

    let strengths: Vec<f64> = (0..sub.node_count()).map(|i| sub.strength(i)).collect();
    row.chung_lu = chung_lu_estimate(&strengths).ok().map(|c| c.value);
    if sub.is_unweighted() && sub.edge_count() > 0 {
        row.beta_closed_form = beta1_closed_form(sub.node_count(), sub.edge_count(), count_triangles(&sub)).ok();
    }

    let result = (|| -> Result<()> {
        let t = Instant::now();
        let m = spectral_moments_from_egonets_with(&sub, cfg.r, &MomentOptions { workers: Some(1) })?;
        let ms_moments = millis(t);
        let t = Instant::now();
        let report = analyze_moments(&m, Some(cfg.r), cfg.tau, &cfg.bounds)?;
        let ms_bounds = millis(t);
        if cfg.record_timings {
            row.ms_moments = Some(ms_moments);
            row.ms_bounds = Some(ms_bounds);
        }
        row.beta = Some(report.beta);
        row.delta = report.delta;
        let lambda1 = lambda1_exact(&sub, &Lambda1Options::default())?;
        row.lambda1 = Some(lambda1);
        if !report.encloses(lambda1, sandwich_slack(lambda1)) {
            return Err(Error::InvalidArgument(format!(
                "sandwich violated: beta = {}, lambda1 = {}, delta = {:?}",
                report.beta, lambda1, report.delta
            )));
        }
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
    }
    row
}

/// Samples seeds and runs every sample; rows come back in draw order.
///
/// Loading and seed selection errors abort; per-sample failures are kept in
/// the row's `error` field.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ScatterRow>> {
    cfg.validate()?;
    let g = cfg.load_graph()?;
    run_experiment_on(&g, cfg)
}

/// As [`run_experiment`] on an already loaded graph.
pub fn run_experiment_on(g: &Graph, cfg: &ExperimentConfig) -> Result<Vec<ScatterRow>> {
    cfg.validate()?;
    let seeds = select_seeds(g, cfg.num_samples, cfg.rng_seed)?;
    let work = || -> Vec<ScatterRow> { seeds.par_iter().map(|&s| run_sample(g, s, cfg)).collect() };
    match cfg.workers {
        Some(1) => Ok(seeds.iter().map(|&s| run_sample(g, s, cfg)).collect()),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
            .map(|pool| pool.install(work)),
        None => Ok(work()),
    }
}

/// Aggregate view of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub samples: usize,
    pub passed: usize,
    pub failed: usize,
    pub median_relative_width: Option<f64>,
}

pub fn summarize(rows: &[ScatterRow]) -> ExperimentSummary {
    let passed = rows.iter().filter(|r| r.passed()).count();
    let mut widths: Vec<f64> = rows.iter().filter_map(ScatterRow::relative_width).collect();
    widths.sort_by(f64::total_cmp);
    let median_relative_width = match widths.len() {
        0 => None,
        k if k % 2 == 1 => Some(widths[k / 2]),
        k => Some(0.5 * (widths[k / 2 - 1] + widths[k / 2])),
    };
    ExperimentSummary {
        samples: rows.len(),
        passed,
        failed: rows.len() - passed,
        median_relative_width,
    }
}

/// Scatter file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScatterFormat {
    Csv,
    Json,
}

pub const CSV_HEADER: [&str; 11] = [
    "seed",
    "n",
    "e",
    "lambda1",
    "beta",
    "delta",
    "beta_closed_form",
    "chung_lu",
    "ms_moments",
    "ms_bounds",
    "error",
];

fn opt_num(x: Option<f64>) -> String {
    x.map(sig10).unwrap_or_default()
}

fn rounded(row: &ScatterRow) -> ScatterRow {
    let r = |x: Option<f64>| x.map(round_sig10);
    ScatterRow {
        lambda1: r(row.lambda1),
        beta: r(row.beta),
        delta: r(row.delta),
        beta_closed_form: r(row.beta_closed_form),
        chung_lu: r(row.chung_lu),
        ms_moments: r(row.ms_moments),
        ms_bounds: r(row.ms_bounds),
        ..row.clone()
    }
}

/// Writes rows as CSV (header [`CSV_HEADER`]) or a JSON array; numbers carry
/// 10 significant digits.
pub fn emit_scatter<W: Write>(rows: &[ScatterRow], format: ScatterFormat, out: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::NothingToEmit);
    }
    match format {
        ScatterFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
            w.write_record(CSV_HEADER).map_err(io)?;
            for row in rows {
                w.write_record([
                    row.seed.clone(),
                    row.n.to_string(),
                    row.e.to_string(),
                    opt_num(row.lambda1),
                    opt_num(row.beta),
                    opt_num(row.delta),
                    opt_num(row.beta_closed_form),
                    opt_num(row.chung_lu),
                    opt_num(row.ms_moments),
                    opt_num(row.ms_bounds),
                    row.error.clone().unwrap_or_default(),
                ])
                .map_err(io)?;
            }
            w.flush()?;
        }
        ScatterFormat::Json => {
            let rounded: Vec<ScatterRow> = rows.iter().map(rounded).collect();
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, &rounded)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn write_scatter(rows: &[ScatterRow], format: ScatterFormat, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    emit_scatter(rows, format, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

/// Reads a JSON scatter file written by [`emit_scatter`].
pub fn read_scatter_json(text: &str) -> Result<Vec<ScatterRow>> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    #[test]
    fn erdos_renyi_extremes() {
        let g = generate_synthetic(&SyntheticSpec::ErdosRenyi { n: 10, p: 1.0 }, 7).unwrap();
        assert_eq!(g.edge_count(), 45);
        assert!(generate_synthetic(&SyntheticSpec::ErdosRenyi { n: 10, p: 0.0 }, 7).is_err());
        assert!(generate_synthetic(&SyntheticSpec::ErdosRenyi { n: 1, p: 0.5 }, 7).is_err());
    }

    #[test]
    fn preferential_attachment_is_deterministic() {
        let spec = SyntheticSpec::PreferentialAttachment { n: 100, edges_per_node: 2 };
        let a = generate_synthetic(&spec, 11).unwrap();
        let b = generate_synthetic(&spec, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.edge_count(), 3 + 2 * 97);
        let c = generate_synthetic(&spec, 12).unwrap();
        assert_ne!(a, c);
        assert!(generate_synthetic(&SyntheticSpec::PreferentialAttachment { n: 3, edges_per_node: 3 }, 0).is_err());
    }

    #[test]
    fn triangle_experiment_is_exact() {
        let mut cfg = ExperimentConfig::new(GraphSource::Synthetic(SyntheticSpec::ErdosRenyi { n: 3, p: 1.0 }));
        cfg.num_samples = 1;
        cfg.r = 1;
        let rows = run_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        let row = &rows[0];
        assert!(row.passed(), "{:?}", row.error);
        assert_eq!((row.n, row.e), (3, 3));
        for v in [row.lambda1, row.beta, row.delta, row.beta_closed_form, row.chung_lu] {
            assert!((v.unwrap() - 2.0).abs() < 1e-6, "{row:?}");
        }
        let mut csv = Vec::new();
        emit_scatter(&rows, ScatterFormat::Csv, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), 11);
        assert_eq!(&fields[1..3], &["3", "3"]);
        // beta sits inside the PSD tolerance band, so compare values rather than digits
        for f in &fields[3..8] {
            assert_eq!(f.len(), "2.000000000".len(), "{f}");
            assert!((f.parse::<f64>().unwrap() - 2.0).abs() < 1e-6, "{f}");
        }
        assert_eq!(fields[3], "2.000000000");
        assert_eq!(&fields[8..], &["", "", ""]);
    }

    #[test]
    fn too_many_samples() {
        let mut cfg = ExperimentConfig::new(GraphSource::Synthetic(SyntheticSpec::ErdosRenyi { n: 3, p: 1.0 }));
        cfg.num_samples = 4;
        assert!(run_experiment(&cfg).is_err());
    }

    #[test]
    fn seeds_skip_isolated_nodes() {
        let g = Graph::from_edges(5, [(1, 3, 1.0)]).unwrap();
        let mut seeds = select_seeds(&g, 2, 9).unwrap();
        seeds.sort();
        assert_eq!(seeds, vec![1, 3]);
        assert!(select_seeds(&g, 3, 9).is_err());
    }

    #[test]
    fn emit_requires_rows() {
        assert!(matches!(emit_scatter(&[], ScatterFormat::Csv, Vec::new()), Err(Error::NothingToEmit)));
    }

    #[test]
    fn json_round_trip() {
        let g = triangle();
        let cfg = ExperimentConfig {
            num_samples: 3,
            r: 1,
            ..ExperimentConfig::new(GraphSource::Synthetic(SyntheticSpec::ErdosRenyi { n: 3, p: 1.0 }))
        };
        let rows = run_experiment_on(&g, &cfg).unwrap();
        let mut first = Vec::new();
        emit_scatter(&rows, ScatterFormat::Json, &mut first).unwrap();
        let back = read_scatter_json(std::str::from_utf8(&first).unwrap()).unwrap();
        let mut second = Vec::new();
        emit_scatter(&back, ScatterFormat::Json, &mut second).unwrap();
        assert_eq!(first, second);
        assert_eq!(back.len(), 3);
    }

    #[test]
    fn config_from_json() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"source": {"synthetic": {"kind": "preferential_attachment", "n": 50, "edges_per_node": 2}},
                "num_samples": 5, "rng_seed": 3}"#,
        )
        .unwrap();
        assert_eq!(cfg.bfs_depth, 2);
        assert_eq!(cfg.r, 2);
        assert_eq!(cfg.bounds, BoundOptions::default());
        let bad = serde_json::from_str::<ExperimentConfig>(r#"{"source": {"path": "x"}, "bogus": 1}"#);
        assert!(bad.is_err());
        let zero = ExperimentConfig {
            num_samples: 0,
            ..cfg
        };
        assert!(zero.validate().is_err());
    }
}
