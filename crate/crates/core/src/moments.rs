//! Spectral moments `m_k = (1/n) tr(A^k)` of a weighted graph.
//!
//! The production route sums, over every node, the ego entry of powers of that
//! node's egonet adjacency: for `k <= 2r+1` a closed walk of length `k` from
//! the ego never leaves the radius-`r` egonet, so
//! `[A_{i,r}^k]_00 = [A^k]_ii`. The trace route and the walk enumerator are
//! independent oracles for it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Egonet, Graph, Scratch};
use crate::linalg::DEFAULT_DENSE_CAP;

/// Where a moment sequence came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentSource {
    Egonet,
    Trace,
    Counts,
    External,
}

impl MomentSource {
    pub fn as_str(self) -> &'static str {
        match self {
            MomentSource::Egonet => "egonet",
            MomentSource::Trace => "trace",
            MomentSource::Counts => "counts",
            MomentSource::External => "external",
        }
    }
}

/// A truncated spectral moment sequence `(m_0, ..., m_K)` with `m_0 = 1`.
///
/// `n` is the node count of the source graph, needed only by the upper bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMoments")]
pub struct MomentSequence {
    pub n: Option<usize>,
    /// Egonet radius the sequence was computed with.
    pub r: Option<usize>,
    #[serde(rename = "moments")]
    values: Vec<f64>,
    pub source: MomentSource,
    /// Set when the source graph carries negative weights.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub negative_weights: bool,
}

#[derive(Deserialize)]
struct RawMoments {
    n: Option<usize>,
    #[serde(default)]
    r: Option<usize>,
    moments: Vec<f64>,
    #[serde(default = "default_source")]
    source: MomentSource,
    #[serde(default)]
    negative_weights: bool,
}

fn default_source() -> MomentSource {
    MomentSource::External
}

impl TryFrom<RawMoments> for MomentSequence {
    type Error = Error;

    fn try_from(raw: RawMoments) -> Result<Self> {
        let mut m = MomentSequence::new(raw.moments, raw.n, raw.source)?;
        m.r = raw.r;
        m.negative_weights = raw.negative_weights;
        Ok(m)
    }
}

impl MomentSequence {
    /// Validates `m_0 == 1` and finiteness. Feasibility is not checked here.
    pub fn new(values: Vec<f64>, n: Option<usize>, source: MomentSource) -> Result<Self> {
        if values.first() != Some(&1.0) {
            return Err(Error::InvalidMoments("m_0 must equal 1".into()));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMoments(format!("m_{bad} is not finite")));
        }
        if n == Some(0) {
            return Err(Error::InvalidMoments("node count must be positive".into()));
        }
        Ok(Self {
            n,
            r: None,
            values,
            source,
            negative_weights: false,
        })
    }

    /// User-supplied moments with no graph behind them.
    pub fn external(values: Vec<f64>, n: Option<usize>) -> Result<Self> {
        Self::new(values, n, MomentSource::External)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Highest moment order `K`.
    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// The largest `r` with `2r+1 <= K`, if any.
    pub fn max_bound_order(&self) -> Option<usize> {
        (self.values.len() >= 2).then(|| (self.values.len() - 2) / 2)
    }

    /// Moments of `c*A` from moments of `A`: `m_k -> c^k m_k`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        let mut p = 1.0;
        for v in &mut out.values {
            *v *= p;
            p *= c;
        }
        out
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// `[A_e^k]_00` for `k = 1..=max_order`.
///
/// Uses `v_j = A^j e_0`: even orders are `v_j . v_j`, odd orders are
/// `v_j . v_{j+1}`, so only `ceil(max_order / 2)` sparse products are needed.
fn ego_walk_sums(e: &Egonet, max_order: usize) -> Vec<f64> {
    let size = e.size();
    let half = max_order.div_ceil(2);
    let mut powers: Vec<Vec<f64>> = Vec::with_capacity(half + 1);
    let mut unit = vec![0.0; size];
    unit[0] = 1.0;
    powers.push(unit);
    for j in 1..=half {
        let mut next = vec![0.0; size];
        e.matvec(&powers[j - 1], &mut next);
        powers.push(next);
    }
    (1..=max_order)
        .map(|k| {
            let (a, b) = (k / 2, k - k / 2);
            dot(&powers[a], &powers[b])
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Weighted closed walks of length `k` from the ego, `[A_{i,r}^k]_00`.
///
/// Errors unless `1 <= k <= 2r+1`; beyond that the egonet no longer contains
/// every closed walk of the parent graph.
pub fn egonet_walk_sum(e: &Egonet, k: usize) -> Result<f64> {
    let max = 2 * e.radius() + 1;
    if k == 0 || k > max {
        return Err(Error::RadiusInsufficient {
            order: k,
            radius: e.radius(),
            max,
        });
    }
    Ok(ego_walk_sums(e, k)[k - 1])
}

/// Options for [`spectral_moments_from_egonets_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct MomentOptions {
    /// Worker threads; `None` uses the global rayon pool, `Some(1)` runs serially.
    pub workers: Option<usize>,
}

/// `(m_0, ..., m_{2r+1})` from the radius-`r` egonets of every node.
pub fn spectral_moments_from_egonets(g: &Graph, r: usize) -> Result<MomentSequence> {
    spectral_moments_from_egonets_with(g, r, &MomentOptions::default())
}

pub fn spectral_moments_from_egonets_with(
    g: &Graph,
    r: usize,
    opts: &MomentOptions,
) -> Result<MomentSequence> {
    if r == 0 {
        return Err(Error::InvalidArgument("egonet radius must be at least 1".into()));
    }
    let n = g.node_count();
    if n == 0 {
        return Err(Error::InvalidArgument("graph has no nodes".into()));
    }
    let max_order = 2 * r + 1;
    let per_node = |scratch: &mut Scratch, i: usize| {
        let e = scratch.egonet(g, i, r);
        ego_walk_sums(&e, max_order)
    };

    let rows: Vec<Vec<f64>> = match opts.workers {
        Some(1) => {
            let mut scratch = Scratch::new(n);
            (0..n).map(|i| per_node(&mut scratch, i)).collect()
        }
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            pool.install(|| {
                (0..n)
                    .into_par_iter()
                    .map_init(|| Scratch::new(n), per_node)
                    .collect()
            })
        }
        None => (0..n)
            .into_par_iter()
            .map_init(|| Scratch::new(n), per_node)
            .collect(),
    };

    // fixed node order regardless of how the rows were produced
    let mut sums = vec![CompensatedSum::default(); max_order];
    for row in &rows {
        for (s, &x) in sums.iter_mut().zip(row) {
            s.add(x);
        }
    }
    let mut values = Vec::with_capacity(max_order + 1);
    values.push(1.0);
    values.extend(sums.iter().map(|s| s.value() / n as f64));
    let mut m = MomentSequence::new(values, Some(n), MomentSource::Egonet)?;
    m.r = Some(r);
    m.negative_weights = g.has_negative_weights();
    Ok(m)
}

/// `(m_0, ..., m_K)` as `(1/n) tr(A^k)`, applying the sparse adjacency to
/// each basis vector in turn. Oracle for the egonet route.
pub fn moments_exact_trace(g: &Graph, max_order: usize) -> Result<MomentSequence> {
    moments_exact_trace_capped(g, max_order, DEFAULT_DENSE_CAP)
}

pub fn moments_exact_trace_capped(g: &Graph, max_order: usize, cap: usize) -> Result<MomentSequence> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::InvalidArgument("graph has no nodes".into()));
    }
    if n > cap {
        return Err(Error::CapExceeded {
            what: "trace moments",
            size: n,
            cap,
            advice: "use the egonet route",
        });
    }
    let mut sums = vec![CompensatedSum::default(); max_order];
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    for i in 0..n {
        x.fill(0.0);
        x[i] = 1.0;
        for s in sums.iter_mut() {
            g.matvec(&x, &mut y);
            std::mem::swap(&mut x, &mut y);
            s.add(x[i]);
        }
    }
    let mut values = vec![1.0];
    values.extend(sums.iter().map(|s| s.value() / n as f64));
    let mut m = MomentSequence::new(values, Some(n), MomentSource::Trace)?;
    m.negative_weights = g.has_negative_weights();
    Ok(m)
}

/// Sum of weights of all closed walks of length `k` from `i`, by explicit
/// depth-first enumeration. Exponential; only for tiny graphs (`n <= 30`, `k <= 8`).
pub fn closed_walk_oracle(g: &Graph, i: usize, k: usize) -> Result<f64> {
    const MAX_LEN: usize = 8;
    const MAX_NODES: usize = 30;
    if k > MAX_LEN || g.node_count() > MAX_NODES {
        return Err(Error::CapExceeded {
            what: "closed walk enumeration",
            size: k.max(g.node_count()),
            cap: if k > MAX_LEN { MAX_LEN } else { MAX_NODES },
            advice: "use moments_exact_trace",
        });
    }
    g.check_node(i)?;

    fn extend(g: &Graph, start: usize, at: usize, left: usize, weight: f64, total: &mut f64) {
        if left == 0 {
            if at == start {
                *total += weight;
            }
            return;
        }
        for (next, w) in g.adjacent(at) {
            extend(g, start, next, left - 1, weight * w, total);
        }
    }

    let mut total = 0.0;
    extend(g, i, i, k, 1.0, &mut total);
    Ok(total)
}

/// Edge count, triangle count, and the moments they determine.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeTriangleCounts {
    pub edges: usize,
    pub triangles: usize,
    pub moments: MomentSequence,
}

/// For an unweighted simple graph: `m_1 = 0`, `m_2 = 2e/n`, `m_3 = 6 Delta / n`.
pub fn edge_triangle_moments(g: &Graph) -> Result<EdgeTriangleCounts> {
    if !g.is_unweighted() {
        return Err(Error::WeightedGraph);
    }
    let n = g.node_count();
    if n == 0 {
        return Err(Error::InvalidArgument("graph has no nodes".into()));
    }
    let edges = g.edge_count();
    let triangles = count_triangles(g);
    let nf = n as f64;
    let values = vec![1.0, 0.0, 2.0 * edges as f64 / nf, 6.0 * triangles as f64 / nf];
    Ok(EdgeTriangleCounts {
        edges,
        triangles,
        moments: MomentSequence::new(values, Some(n), MomentSource::Counts)?,
    })
}

/// Triangles `i < j < k`, by merging sorted neighbor lists along each edge.
pub fn count_triangles(g: &Graph) -> usize {
    let mut count = 0;
    for (i, j, _) in g.edges() {
        let a = g.neighbors(i);
        let b = g.neighbors(j);
        // only third vertices above j
        let (mut p, mut q) = (a.partition_point(|&x| x <= j), b.partition_point(|&x| x <= j));
        while p < a.len() && q < b.len() {
            match a[p].cmp(&b[q]) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    p += 1;
                    q += 1;
                }
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::extract_egonet;

    fn complete(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, 1.0)))).unwrap()
    }

    fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|j| (0, j, 1.0))).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n, 1.0))).unwrap()
    }

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    fn assert_seq(m: &MomentSequence, expected: &[f64], tol: f64) {
        assert_eq!(m.values().len(), expected.len(), "{:?}", m.values());
        for (k, (a, b)) in m.values().iter().zip(expected).enumerate() {
            assert!((a - b).abs() <= tol * b.abs().max(1.0), "m_{k}: {a} vs {b}");
        }
    }

    #[test]
    fn walk_sum_examples() {
        let e = extract_egonet(&complete(3), 0, 1).unwrap();
        assert_eq!(egonet_walk_sum(&e, 3).unwrap(), 2.0);
        let e = extract_egonet(&cycle(4), 0, 1).unwrap();
        assert_eq!(egonet_walk_sum(&e, 3).unwrap(), 0.0);
        let w = Graph::from_edges(2, [(0, 1, 3.0)]).unwrap();
        let e = extract_egonet(&w, 0, 1).unwrap();
        assert_eq!(egonet_walk_sum(&e, 2).unwrap(), 9.0);
    }

    #[test]
    fn walk_sum_enforces_locality() {
        let e = extract_egonet(&complete(3), 0, 1).unwrap();
        assert!(matches!(
            egonet_walk_sum(&e, 4),
            Err(Error::RadiusInsufficient { order: 4, radius: 1, max: 3 })
        ));
        assert!(egonet_walk_sum(&e, 0).is_err());
    }

    #[test]
    fn egonet_moment_examples() {
        assert_seq(&spectral_moments_from_egonets(&complete(3), 1).unwrap(), &[1.0, 0.0, 2.0, 2.0], 1e-15);
        assert_seq(&spectral_moments_from_egonets(&cycle(4), 1).unwrap(), &[1.0, 0.0, 2.0, 0.0], 1e-15);
        assert_seq(&spectral_moments_from_egonets(&star(3), 1).unwrap(), &[1.0, 0.0, 1.5, 0.0], 1e-15);
        assert!(spectral_moments_from_egonets(&star(3), 0).is_err());
        let m = spectral_moments_from_egonets(&star(3), 2).unwrap();
        assert_eq!(m.r, Some(2));
        assert_eq!(m.n, Some(4));
        assert_eq!(m.max_order(), 5);
    }

    #[test]
    fn trace_examples() {
        assert_seq(&moments_exact_trace(&complete(3), 5).unwrap(), &[1.0, 0.0, 2.0, 2.0, 6.0, 10.0], 1e-15);
        assert_seq(
            &moments_exact_trace(&path3(), 5).unwrap(),
            &[1.0, 0.0, 4.0 / 3.0, 0.0, 8.0 / 3.0, 0.0],
            1e-15,
        );
        let w = Graph::from_edges(2, [(0, 1, 3.0)]).unwrap();
        assert_seq(&moments_exact_trace(&w, 2).unwrap(), &[1.0, 0.0, 9.0], 1e-15);
        assert!(matches!(
            moments_exact_trace_capped(&complete(3), 2, 2),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn walk_oracle_examples() {
        assert_eq!(closed_walk_oracle(&complete(3), 1, 2).unwrap(), 2.0);
        assert_eq!(closed_walk_oracle(&path3(), 0, 2).unwrap(), 1.0);
        assert_eq!(closed_walk_oracle(&path3(), 1, 2).unwrap(), 2.0);
        let w = Graph::from_edges(2, [(0, 1, 3.0)]).unwrap();
        assert_eq!(closed_walk_oracle(&w, 0, 4).unwrap(), 81.0);
        assert!(closed_walk_oracle(&w, 0, 9).is_err());
        assert!(closed_walk_oracle(&complete(31), 0, 2).is_err());
    }

    #[test]
    fn edge_triangle_examples() {
        let c = edge_triangle_moments(&complete(3)).unwrap();
        assert_eq!((c.edges, c.triangles), (3, 1));
        assert_seq(&c.moments, &[1.0, 0.0, 2.0, 2.0], 0.0);
        let c = edge_triangle_moments(&cycle(4)).unwrap();
        assert_eq!((c.edges, c.triangles), (4, 0));
        assert_seq(&c.moments, &[1.0, 0.0, 2.0, 0.0], 0.0);
        let c = edge_triangle_moments(&star(3)).unwrap();
        assert_eq!((c.edges, c.triangles), (3, 0));
        assert_seq(&c.moments, &[1.0, 0.0, 1.5, 0.0], 0.0);
        assert_eq!(count_triangles(&complete(5)), 10);
        let w = Graph::from_edges(2, [(0, 1, 2.0)]).unwrap();
        assert!(matches!(edge_triangle_moments(&w), Err(Error::WeightedGraph)));
    }

    #[test]
    fn moment_sequence_validation_and_json() {
        assert!(MomentSequence::external(vec![0.5, 0.0], None).is_err());
        assert!(MomentSequence::external(vec![], None).is_err());
        assert!(MomentSequence::external(vec![1.0, f64::NAN], None).is_err());
        let json = r#"{"n": 3, "r": 1, "moments": [1, 0, 2, 2], "source": "egonet"}"#;
        let m: MomentSequence = serde_json::from_str(json).unwrap();
        assert_eq!(m.values(), &[1.0, 0.0, 2.0, 2.0]);
        assert_eq!(m.source, MomentSource::Egonet);
        let back: MomentSequence = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"n": 3, "moments": [2, 0]}"#;
        assert!(serde_json::from_str::<MomentSequence>(bad).is_err());
        let minimal: MomentSequence = serde_json::from_str(r#"{"n": null, "moments": [1, 0, 1]}"#).unwrap();
        assert_eq!(minimal.source, MomentSource::External);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s: CompensatedSum = [1e16, 1.0, -1e16, 1.0].into_iter().collect();
        assert_eq!(s.value(), 2.0);
    }
}
