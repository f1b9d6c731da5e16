//! Weighted undirected graphs, edge-list ingestion, and egonet extraction.
//!
//! A [`Graph`] is stored in compressed sparse row form with every neighbor
//! list sorted by node index, so every downstream reduction over a
//! neighborhood happens in one fixed order.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

/// Immutable weighted undirected simple graph.
///
/// Invariants: symmetric adjacency, no self-loops, no zero (or non-finite)
/// weights, neighbor lists sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    labels: Vec<String>,
    label_index: HashMap<String, usize>,
    has_negative_weights: bool,
    is_unweighted: bool,
}

impl Graph {
    /// Builds a graph on nodes `0..n` labelled by their index.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let labels = (0..n).map(|i| i.to_string()).collect();
        Self::from_labelled_edges(labels, edges)
    }

    /// Builds a graph with explicit node labels. Identical duplicate edges are
    /// merged; conflicting duplicates, self-loops and zero weights are errors.
    pub fn from_labelled_edges<I>(labels: Vec<String>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut builder = EdgeAccumulator::default();
        let n = labels.len();
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::NodeOutOfRange { index: u.max(v), n });
            }
            builder
                .insert(u, v, w)
                .map_err(|e| Error::InvalidArgument(e.describe(u, v)))?;
        }
        Ok(builder.finish(labels))
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn neighbor_weights(&self, i: usize) -> &[f64] {
        &self.weights[self.offsets[i]..self.offsets[i + 1]]
    }

    /// `(neighbor, weight)` pairs of node `i` in ascending neighbor order.
    pub fn adjacent(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.neighbors(i)
            .iter()
            .copied()
            .zip(self.neighbor_weights(i).iter().copied())
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Weighted degree: sum of incident edge weights.
    pub fn strength(&self, i: usize) -> f64 {
        self.neighbor_weights(i).iter().sum()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.label_index.get(label).copied()
    }

    pub fn has_negative_weights(&self) -> bool {
        self.has_negative_weights
    }

    /// True when every weight is exactly 1.
    pub fn is_unweighted(&self) -> bool {
        self.is_unweighted
    }

    /// Each undirected edge once, as `(i, j, w)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.node_count()).flat_map(move |i| {
            self.adjacent(i)
                .filter(move |&(j, _)| j > i)
                .map(move |(j, w)| (i, j, w))
        })
    }

    pub fn check_node(&self, i: usize) -> Result<()> {
        if i < self.node_count() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                index: i,
                n: self.node_count(),
            })
        }
    }

    /// `y = A x` using the sparse adjacency.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, out) in y.iter_mut().enumerate() {
            *out = self.adjacent(i).map(|(j, w)| w * x[j]).sum();
        }
    }

    /// Dense adjacency matrix. Intended for small graphs and oracles.
    pub fn dense_adjacency(&self) -> SymMatrix {
        let n = self.node_count();
        let mut m = SymMatrix::zeros(n.max(1));
        for (i, j, w) in self.edges() {
            m.set(i, j, w);
        }
        m
    }

    /// Returns a copy with every weight replaced by `f(i, j, w)`.
    pub fn map_weights<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, f64) -> f64,
    {
        let edges: Vec<_> = self.edges().map(|(i, j, w)| (i, j, f(i, j, w))).collect();
        Self::from_labelled_edges(self.labels.clone(), edges)
    }

    pub fn summary(&self) -> GraphSummary {
        let (min_weight, max_weight) = self
            .weights
            .iter()
            .fold(None, |acc: Option<(f64, f64)>, &w| match acc {
                None => Some((w, w)),
                Some((lo, hi)) => Some((lo.min(w), hi.max(w))),
            })
            .map_or((None, None), |(lo, hi)| (Some(lo), Some(hi)));
        GraphSummary {
            n: self.node_count(),
            edges: self.edge_count(),
            weighted: !self.is_unweighted,
            negative_weights: self.has_negative_weights,
            min_weight,
            max_weight,
        }
    }
}

/// JSON summary printed by `ingest`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub n: usize,
    pub edges: usize,
    pub weighted: bool,
    pub negative_weights: bool,
    pub min_weight: Option<f64>,
    pub max_weight: Option<f64>,
}

enum EdgeIssue {
    SelfLoop,
    ZeroWeight,
    NonFinite,
    Conflict(f64, f64),
}

impl EdgeIssue {
    fn describe(&self, u: usize, v: usize) -> String {
        match self {
            EdgeIssue::SelfLoop => format!("self-loop on node {u}"),
            EdgeIssue::ZeroWeight => format!("zero weight on edge ({u}, {v})"),
            EdgeIssue::NonFinite => format!("non-finite weight on edge ({u}, {v})"),
            EdgeIssue::Conflict(a, b) => {
                format!("duplicate edge ({u}, {v}) with conflicting weights {a} and {b}")
            }
        }
    }
}

#[derive(Default)]
struct EdgeAccumulator {
    seen: HashMap<(usize, usize), f64>,
    order: Vec<(usize, usize)>,
    duplicates: usize,
}

impl EdgeAccumulator {
    fn insert(&mut self, u: usize, v: usize, w: f64) -> std::result::Result<(), EdgeIssue> {
        if u == v {
            return Err(EdgeIssue::SelfLoop);
        }
        if !w.is_finite() {
            return Err(EdgeIssue::NonFinite);
        }
        if w == 0.0 {
            return Err(EdgeIssue::ZeroWeight);
        }
        let key = (u.min(v), u.max(v));
        match self.seen.get(&key) {
            Some(&prev) if prev == w => {
                self.duplicates += 1;
                Ok(())
            }
            Some(&prev) => Err(EdgeIssue::Conflict(prev, w)),
            None => {
                self.seen.insert(key, w);
                self.order.push(key);
                Ok(())
            }
        }
    }

    fn finish(self, labels: Vec<String>) -> Graph {
        let n = labels.len();
        let mut lists: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for key in &self.order {
            let w = self.seen[key];
            lists[key.0].push((key.1, w));
            lists[key.1].push((key.0, w));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(2 * self.order.len());
        let mut weights = Vec::with_capacity(2 * self.order.len());
        offsets.push(0);
        for list in &mut lists {
            list.sort_unstable_by_key(|&(j, _)| j);
            for &(j, w) in list.iter() {
                targets.push(j);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        let has_negative_weights = weights.iter().any(|&w| w < 0.0);
        let is_unweighted = weights.iter().all(|&w| w == 1.0);
        let label_index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        Graph {
            offsets,
            targets,
            weights,
            labels,
            label_index,
            has_negative_weights,
            is_unweighted,
        }
    }
}

/// Options for [`parse_edge_list`].
#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// Treat identical duplicate edges as errors instead of warnings.
    pub reject_duplicates: bool,
}

/// Non-fatal findings from parsing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseStats {
    /// Lines repeating an already-seen edge with the same weight.
    pub duplicate_edges: usize,
    pub comment_lines: usize,
}

/// Parses a whitespace-separated edge list.
///
/// Each data line is `u v` or `u v w` (missing weight means 1). A line with a
/// single token declares a node without edges. Lines starting with `#` or
/// `%` are comments. Labels are arbitrary tokens mapped to dense indices in
/// order of first appearance.
pub fn parse_edge_list(text: &str, options: &ParseOptions) -> Result<(Graph, ParseStats)> {
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut acc = EdgeAccumulator::default();
    let mut stats = ParseStats::default();

    let mut intern = |tok: &str, labels: &mut Vec<String>| -> usize {
        *index.entry(tok.to_owned()).or_insert_with(|| {
            labels.push(tok.to_owned());
            labels.len() - 1
        })
    };

    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') || trimmed.starts_with('%') {
            stats.comment_lines += 1;
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let parse_err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let weight = match tokens.len() {
            1 => {
                intern(tokens[0], &mut labels);
                continue;
            }
            2 => 1.0,
            3 => tokens[2]
                .parse::<f64>()
                .map_err(|_| parse_err(format!("malformed weight token '{}'", tokens[2])))?,
            k => return Err(parse_err(format!("expected 'u v' or 'u v w', found {k} tokens"))),
        };
        if tokens[0] == tokens[1] {
            return Err(parse_err(format!("self-loop on node '{}'", tokens[0])));
        }
        let u = intern(tokens[0], &mut labels);
        let v = intern(tokens[1], &mut labels);
        let before = acc.duplicates;
        acc.insert(u, v, weight).map_err(|issue| {
            parse_err(match issue {
                EdgeIssue::Conflict(a, b) => format!(
                    "duplicate edge ('{}', '{}') with conflicting weights {a} and {b}",
                    tokens[0], tokens[1]
                ),
                EdgeIssue::ZeroWeight => "explicit zero weight".to_owned(),
                EdgeIssue::NonFinite => format!("malformed weight token '{}'", tokens[2]),
                other => other.describe(u, v),
            })
        })?;
        if acc.duplicates > before {
            if options.reject_duplicates {
                return Err(parse_err(format!(
                    "duplicate edge ('{}', '{}')",
                    tokens[0], tokens[1]
                )));
            }
            stats.duplicate_edges += 1;
        }
    }

    Ok((acc.finish(labels), stats))
}

/// Serializes a graph so that [`parse_edge_list`] reproduces it exactly:
/// node declarations in index order first, then every edge once.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    for label in g.labels() {
        let _ = writeln!(out, "{label}");
    }
    for (i, j, w) in g.edges() {
        if w == 1.0 {
            let _ = writeln!(out, "{} {}", g.label(i), g.label(j));
        } else {
            // `{:?}` prints the shortest representation that round-trips.
            let _ = writeln!(out, "{} {} {:?}", g.label(i), g.label(j), w);
        }
    }
    out
}

const UNSEEN: usize = usize::MAX;
const PENDING: usize = usize::MAX - 1;

/// Reusable per-worker buffers for BFS and egonet extraction.
pub(crate) struct Scratch {
    local: Vec<usize>,
    frontier: Vec<usize>,
    next: Vec<usize>,
}

impl Scratch {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            local: vec![UNSEEN; n],
            frontier: Vec::new(),
            next: Vec::new(),
        }
    }

    /// Fills `nodes` with the radius-`r` neighborhood of `ego` and leaves
    /// `self.local[v]` holding each member's position. Call [`Scratch::reset`]
    /// afterwards.
    fn neighborhood(&mut self, g: &Graph, ego: usize, r: usize, nodes: &mut Vec<usize>) {
        nodes.clear();
        nodes.push(ego);
        self.local[ego] = 0;
        self.frontier.clear();
        self.frontier.push(ego);
        for _ in 0..r {
            self.next.clear();
            for &u in &self.frontier {
                for &v in g.neighbors(u) {
                    if self.local[v] == UNSEEN {
                        self.local[v] = PENDING;
                        self.next.push(v);
                    }
                }
            }
            if self.next.is_empty() {
                break;
            }
            self.next.sort_unstable();
            for &v in &self.next {
                self.local[v] = nodes.len();
                nodes.push(v);
            }
            std::mem::swap(&mut self.frontier, &mut self.next);
        }
    }

    fn reset(&mut self, nodes: &[usize]) {
        for &v in nodes {
            self.local[v] = UNSEEN;
        }
    }

    pub(crate) fn egonet(&mut self, g: &Graph, ego: usize, radius: usize) -> Egonet {
        let mut nodes = Vec::new();
        self.neighborhood(g, ego, radius, &mut nodes);
        let mut offsets = Vec::with_capacity(nodes.len() + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for &u in &nodes {
            for (v, w) in g.adjacent(u) {
                let lv = self.local[v];
                if lv < PENDING {
                    targets.push(lv);
                    weights.push(w);
                }
            }
            offsets.push(targets.len());
        }
        self.reset(&nodes);
        Egonet {
            ego,
            radius,
            nodes,
            offsets,
            targets,
            weights,
        }
    }
}

/// Nodes within hop distance `r` of `i`: the ego first, the rest ordered by
/// (distance, index). Weights are ignored.
pub fn bfs_neighborhood(g: &Graph, i: usize, r: usize) -> Result<Vec<usize>> {
    g.check_node(i)?;
    let mut scratch = Scratch::new(g.node_count());
    let mut nodes = Vec::new();
    scratch.neighborhood(g, i, r, &mut nodes);
    Ok(nodes)
}

/// The local view of a graph around one ego: the weighted adjacency induced
/// on its radius-`r` neighborhood, with the ego at local index 0.
///
/// The adjacency is kept sparse; [`Egonet::matrix`] materializes the dense
/// principal submatrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Egonet {
    ego: usize,
    radius: usize,
    nodes: Vec<usize>,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
}

impl Egonet {
    pub fn ego(&self) -> usize {
        self.ego
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Member nodes (parent indices), ego first.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// Number of undirected edges inside the egonet.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// `y = A_ego x` in local coordinates.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (a, out) in y.iter_mut().enumerate() {
            let span = self.offsets[a]..self.offsets[a + 1];
            *out = self.targets[span.clone()]
                .iter()
                .zip(&self.weights[span])
                .map(|(&b, &w)| w * x[b])
                .sum();
        }
    }

    /// Dense symmetric adjacency of the egonet (zero diagonal).
    pub fn matrix(&self) -> SymMatrix {
        let k = self.size();
        let mut m = SymMatrix::zeros(k);
        for a in 0..k {
            for p in self.offsets[a]..self.offsets[a + 1] {
                m.set(a, self.targets[p], self.weights[p]);
            }
        }
        m
    }
}

/// Extracts the radius-`r` egonet around node `i`.
pub fn extract_egonet(g: &Graph, i: usize, r: usize) -> Result<Egonet> {
    g.check_node(i)?;
    Ok(Scratch::new(g.node_count()).egonet(g, i, r))
}

/// Induced subgraph on `nodes`, relabelled densely in the given order.
/// Node labels are inherited from the parent.
pub fn induced_subgraph(g: &Graph, nodes: &[usize]) -> Result<Graph> {
    let mut local = HashMap::with_capacity(nodes.len());
    for (a, &v) in nodes.iter().enumerate() {
        g.check_node(v)?;
        if local.insert(v, a).is_some() {
            return Err(Error::InvalidArgument(format!("node {v} listed twice")));
        }
    }
    let mut edges = Vec::new();
    for (a, &u) in nodes.iter().enumerate() {
        for (v, w) in g.adjacent(u) {
            if let Some(&b) = local.get(&v) {
                if a < b {
                    edges.push((a, b, w));
                }
            }
        }
    }
    let labels = nodes.iter().map(|&v| g.label(v).to_owned()).collect();
    Graph::from_labelled_edges(labels, edges)
}

/// The subgraph induced by a depth-`depth` BFS from `seed`, as a standalone graph.
pub fn bfs_subgraph_sample(g: &Graph, seed: usize, depth: usize) -> Result<Graph> {
    let nodes = bfs_neighborhood(g, seed, depth)?;
    induced_subgraph(g, &nodes)
}
