//! Certified bounds on the largest eigenvalue from a truncated moment sequence.
//!
//! A sequence `(m_0, ..., m_{2r+1})` is the moment sequence of a measure on
//! `(-inf, b]` iff `H_2r >= 0` and `b H_2r - H_2r+1 >= 0`, where the two
//! `(r+1) x (r+1)` Hankel matrices are `[H_2r]_ij = m_{i+j}` and
//! `[H_2r+1]_ij = m_{i+j+1}` (0-based). The spectral measure of a graph is
//! supported on `[lambda_n, lambda_1]`, so the smallest feasible `b` is a
//! lower bound on `lambda_1`.
//!
//! Removing the atom at `lambda_1` leaves the bulk spectrum, supported on
//! `[-lambda_1, lambda_1]` when weights are nonnegative. Its moments are affine
//! in `m_k` and `lambda_1^k`, which turns the same feasibility test into a
//! constraint on `y = lambda_1`; the largest feasible `y` is an upper bound.
//!
//! The lower-bound program is convex in one variable and its feasible set is
//! upward closed, so it is solved by bisection. The upper-bound program is
//! polynomial in `y` and its feasible set need not be an interval, so it is
//! solved by a descending grid scan refined locally.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{psd_check, psd_margin, SymMatrix, DEFAULT_PSD_TOL};
use crate::moments::MomentSequence;

/// `H_2r` and `H_2r+1` built from `(m_0, ..., m_{2r+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelPair {
    pub r: usize,
    pub even: SymMatrix,
    pub odd: SymMatrix,
}

/// Hankel matrices of the bulk moments `(n m_k - y^k) / (n - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BulkHankelPair {
    pub r: usize,
    pub y: f64,
    pub even: SymMatrix,
    pub odd: SymMatrix,
}

/// Support region for [`check_feasibility`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    AllReals,
    AtLeast(f64),
    AtMost(f64),
}

/// Solver settings shared by both bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundOptions {
    /// Relative PSD tolerance (see [`psd_check`]).
    pub psd_tol: f64,
    /// Relative stopping width for every bisection.
    pub bisection_tol: f64,
    /// Grid points for the upper-bound scan.
    pub scan_steps: usize,
    /// Rescale moments by `s^-k`, `s = max(1, sqrt(m_2))`, before building matrices.
    pub prescale: bool,
    /// Compute the upper bound even when the source graph has negative weights.
    pub allow_negative_weights: bool,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            psd_tol: DEFAULT_PSD_TOL,
            bisection_tol: 1e-10,
            scan_steps: 2000,
            prescale: true,
            allow_negative_weights: false,
        }
    }
}

fn check_length(m: &MomentSequence, r: usize) -> Result<()> {
    let needed = 2 * r + 2;
    if m.values().len() < needed {
        return Err(Error::InsufficientMoments {
            order: r,
            needed,
            got: m.values().len(),
        });
    }
    Ok(())
}

fn hankel(values: &[f64], r: usize, offset: usize) -> SymMatrix {
    SymMatrix::from_fn(r + 1, |i, j| values[i + j + offset])
}

pub fn build_hankel_pair(m: &MomentSequence, r: usize) -> Result<HankelPair> {
    check_length(m, r)?;
    Ok(HankelPair {
        r,
        even: hankel(m.values(), r, 0),
        odd: hankel(m.values(), r, 1),
    })
}

/// Whether `m` is the moment sequence of some measure supported on `region`.
pub fn check_feasibility(m: &MomentSequence, r: usize, region: Region, psd_tol: f64) -> Result<bool> {
    let h = build_hankel_pair(m, r)?;
    if !psd_check(&h.even, psd_tol) {
        return Ok(false);
    }
    Ok(match region {
        Region::AllReals => true,
        Region::AtLeast(a) => psd_check(&h.odd.combine(1.0, &h.even, -a), psd_tol),
        Region::AtMost(b) => psd_check(&h.even.combine(b, &h.odd, -1.0), psd_tol),
    })
}

/// Moments rescaled to `m_k / s^k` with `s = sqrt(m_2)`, together with `s`.
///
/// Scaling to unit `m_2` (rather than only shrinking large moments) keeps the
/// bounds covariant under weight scaling: the PSD tolerance is relative to the
/// largest entry, which is otherwise pinned at `m_0 = 1` for small weights.
fn prescaled(m: &MomentSequence, enabled: bool) -> (Vec<f64>, f64) {
    let s = match m.values().get(2) {
        Some(&m2) if enabled && m2 > 0.0 => m2.sqrt(),
        _ => 1.0,
    };
    let mut p = 1.0;
    let values = m
        .values()
        .iter()
        .map(|v| {
            let out = v / p;
            p *= s;
            out
        })
        .collect();
    (values, s)
}

/// Lower bound together with the absolute width of its final bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certified {
    pub value: f64,
    /// Distance by which the program optimum may differ from `value`.
    pub tolerance: f64,
    /// Moment prescale factor used.
    pub prescale: f64,
}

/// Smallest `x` with `H_2r >= 0` and `x H_2r - H_2r+1 >= 0`; a lower bound on `lambda_1`.
pub fn lower_bound_beta(m: &MomentSequence, r: usize, opts: &BoundOptions) -> Result<f64> {
    lower_bound_beta_certified(m, r, opts).map(|c| c.value)
}

/// As [`lower_bound_beta`], also reporting the bracket width.
///
/// Returns the feasible end of the final bracket, so the value is a member of
/// the feasible set and at most `tolerance` above the optimum.
pub fn lower_bound_beta_certified(m: &MomentSequence, r: usize, opts: &BoundOptions) -> Result<Certified> {
    const MAX_DOUBLINGS: usize = 200;
    check_length(m, r)?;
    let (values, s) = prescaled(m, opts.prescale);
    let even = hankel(&values, r, 0);
    let odd = hankel(&values, r, 1);
    if !psd_check(&even, opts.psd_tol) {
        return Err(Error::InfeasibleMoments);
    }
    let feasible = |x: f64| psd_check(&even.combine(x, &odd, -1.0), opts.psd_tol);

    let m1 = values[1];
    let mut lo = m1;
    if feasible(lo) {
        return Ok(Certified {
            value: lo * s,
            tolerance: 0.0,
            prescale: s,
        });
    }
    let mut hi = 1f64.max(2.0 * m1.abs()).max(values.get(2).copied().unwrap_or(0.0));
    let mut doublings = 0;
    while !feasible(hi) {
        if doublings == MAX_DOUBLINGS {
            return Err(Error::BracketExhausted(MAX_DOUBLINGS));
        }
        lo = hi;
        hi *= 2.0;
        doublings += 1;
    }
    while hi - lo > opts.bisection_tol * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Certified {
        value: hi * s,
        tolerance: (hi - lo) * s,
        prescale: s,
    })
}

/// Closed-form lower bound from edge, triangle and node counts of a simple graph:
/// `(3 tri + sqrt(9 tri^2 + 8 e^3 / n)) / (2 e)`.
pub fn beta1_closed_form(n: usize, edges: usize, triangles: usize) -> Result<f64> {
    if edges == 0 {
        return Err(Error::NoEdges);
    }
    if n == 0 {
        return Err(Error::InvalidArgument("node count must be positive".into()));
    }
    let (n, e, t) = (n as f64, edges as f64, triangles as f64);
    Ok((3.0 * t + (9.0 * t * t + 8.0 * e * e * e / n).sqrt()) / (2.0 * e))
}

/// The same closed form expressed through `m_2` and `m_3` (requires `m_1 = 0`, `m_2 > 0`).
pub fn beta1_closed_form_from_moments(m: &MomentSequence) -> Option<f64> {
    let v = m.values();
    if v.len() < 4 || v[1] != 0.0 || v[2] <= 0.0 {
        return None;
    }
    let (m2, m3) = (v[2], v[3]);
    Some((0.5 * m3 + (0.25 * m3 * m3 + m2 * m2 * m2).sqrt()) / m2)
}

fn node_count_for_bulk(m: &MomentSequence) -> Result<usize> {
    match m.n {
        Some(n) if n >= 2 => Ok(n),
        _ => Err(Error::MissingNodeCount),
    }
}

fn bulk_hankel(values: &[f64], n: usize, r: usize, y: f64, offset: usize) -> SymMatrix {
    let nf = n as f64;
    SymMatrix::from_fn(r + 1, |i, j| {
        let k = i + j + offset;
        (nf * values[k] - y.powi(k as i32)) / (nf - 1.0)
    })
}

pub fn build_bulk_hankel_pair(m: &MomentSequence, r: usize, y: f64) -> Result<BulkHankelPair> {
    let n = node_count_for_bulk(m)?;
    check_length(m, r)?;
    Ok(BulkHankelPair {
        r,
        y,
        even: bulk_hankel(m.values(), n, r, y, 0),
        odd: bulk_hankel(m.values(), n, r, y, 1),
    })
}

/// The three upper-bound constraints at one `y`.
struct BulkProgram<'a> {
    values: &'a [f64],
    n: usize,
    r: usize,
    psd_tol: f64,
}

impl BulkProgram<'_> {
    fn matrices(&self, y: f64) -> [SymMatrix; 3] {
        let even = bulk_hankel(self.values, self.n, self.r, y, 0);
        let odd = bulk_hankel(self.values, self.n, self.r, y, 1);
        [
            even.combine(y, &odd, -1.0),
            odd.combine(1.0, &even, y),
            even,
        ]
    }

    fn feasible(&self, y: f64) -> bool {
        self.matrices(y).iter().all(|m| psd_check(m, self.psd_tol))
    }

    /// Worst normalized smallest eigenvalue; `>= -psd_tol` on the feasible set.
    fn margin(&self, y: f64) -> f64 {
        self.matrices(y)
            .iter()
            .map(psd_margin)
            .fold(f64::INFINITY, f64::min)
    }

    /// Bisects between feasible `lo` and infeasible `hi`; returns the feasible end.
    fn climb(&self, mut lo: f64, mut hi: f64, width: f64) -> (f64, f64) {
        while hi - lo > width {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.feasible(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, hi - lo)
    }

    /// Golden-section maximization of the margin on `[a, b]`.
    fn peak(&self, mut a: f64, mut b: f64, width: f64) -> f64 {
        const INV_PHI: f64 = 0.618_033_988_749_894_8;
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let mut fc = self.margin(c);
        let mut fd = self.margin(d);
        for _ in 0..200 {
            if b - a <= width {
                break;
            }
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = self.margin(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = self.margin(d);
            }
        }
        if fc >= fd {
            c
        } else {
            d
        }
    }
}

/// Largest `y` with `T_2r >= 0`, `y T_2r - T_2r+1 >= 0`, `T_2r+1 + y T_2r >= 0`;
/// an upper bound on `lambda_1` for graphs with nonnegative weights.
pub fn upper_bound_delta(m: &MomentSequence, r: usize, opts: &BoundOptions) -> Result<f64> {
    upper_bound_delta_certified(m, r, opts).map(|c| c.value)
}

/// As [`upper_bound_delta`], also reporting the final bracket width.
///
/// `y` cannot exceed `y_cap = (n m_2r)^(1/2r)` since the last diagonal entry
/// of `T_2r` would turn negative. The grid from `y_cap` down to 0 is scanned
/// for the first feasible point, which is then bisected upward against the
/// infeasible point above it. Feasible pockets narrower than the grid (a
/// single point when the bulk moments sit on the boundary of the moment cone)
/// are caught by maximizing the PSD margin around every local maximum of the
/// sampled margin.
pub fn upper_bound_delta_certified(m: &MomentSequence, r: usize, opts: &BoundOptions) -> Result<Certified> {
    if r == 0 {
        return Err(Error::InvalidArgument("upper bound needs order r >= 1".into()));
    }
    let n = node_count_for_bulk(m)?;
    check_length(m, r)?;
    if m.negative_weights && !opts.allow_negative_weights {
        return Err(Error::NegativeWeights);
    }
    let (values, s) = prescaled(m, opts.prescale);
    let program = BulkProgram {
        values: &values,
        n,
        r,
        psd_tol: opts.psd_tol,
    };
    let top = n as f64 * values[2 * r];
    if top < 0.0 {
        return Err(Error::InfeasibleMoments);
    }
    let cap = top.powf(1.0 / (2 * r) as f64);
    let done = |y: f64, width: f64| Certified {
        value: y * s,
        tolerance: width * s,
        prescale: s,
    };
    if cap == 0.0 {
        return if program.feasible(0.0) {
            Ok(done(0.0, 0.0))
        } else {
            Err(Error::NoFeasibleUpperBound)
        };
    }

    let steps = opts.scan_steps.max(2);
    let grid: Vec<f64> = (0..steps)
        .map(|k| cap * (1.0 - k as f64 / (steps - 1) as f64))
        .collect();
    let margins: Vec<f64> = grid.iter().map(|&y| program.margin(y)).collect();
    let width = opts.bisection_tol * cap;

    for k in 0..steps {
        let above = if k == 0 { cap } else { grid[k - 1] };
        if program.feasible(grid[k]) {
            if k == 0 {
                return Ok(done(cap, 0.0));
            }
            let (y, w) = program.climb(grid[k], above, width);
            return Ok(done(y, w));
        }
        let left_ok = k == 0 || margins[k] >= margins[k - 1];
        let right_ok = k + 1 == steps || margins[k] >= margins[k + 1];
        if left_ok && right_ok {
            let below = if k + 1 == steps { 0.0 } else { grid[k + 1] };
            let y = program.peak(below, above, (1e-3 * width).max(8.0 * f64::EPSILON * cap));
            if program.feasible(y) {
                let (y, w) = if y < above {
                    program.climb(y, above, width)
                } else {
                    (y, 0.0)
                };
                return Ok(done(y, w));
            }
        }
    }
    Err(Error::NoFeasibleUpperBound)
}

/// Chung–Lu estimate of `lambda_1`, `sum w_i^2 / sum w_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChungLuEstimate {
    pub value: f64,
    /// Whether `sum w^2 / sum w > sqrt(max w) ln n`, the regime where the estimate is asymptotically exact.
    pub asymptotic_condition: bool,
}

pub fn chung_lu_estimate(weights: &[f64]) -> Result<ChungLuEstimate> {
    if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
        return Err(Error::InvalidArgument(
            "Chung-Lu weights must be finite and nonnegative".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || total <= 0.0 {
        return Err(Error::InvalidArgument("Chung-Lu weights must have positive sum".into()));
    }
    let value = weights.iter().map(|w| w * w).sum::<f64>() / total;
    let max_w = weights.iter().copied().fold(0.0, f64::max);
    let asymptotic_condition = value > max_w.sqrt() * (weights.len() as f64).ln();
    Ok(ChungLuEstimate {
        value,
        asymptotic_condition,
    })
}

/// Outcome of comparing the eigenvalue interval against an epidemic threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// `lambda_1 <= delta < tau`: a small infection dies out.
    GuaranteedDieOut,
    /// `lambda_1 >= beta > tau`.
    GuaranteedAboveThreshold,
    Indeterminate,
}

/// Tolerances behind a [`BoundReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub psd: f64,
    pub bisection: f64,
    pub scan_steps: usize,
    /// Absolute width of the final lower-bound bracket.
    pub beta_abs: f64,
    /// Absolute width of the final upper-bound bracket.
    pub delta_abs: Option<f64>,
}

/// The certified interval `[beta, delta]` and everything reported alongside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub r: usize,
    pub beta: f64,
    pub delta: Option<f64>,
    pub beta_closed_form: Option<f64>,
    pub lambda1: Option<f64>,
    pub chung_lu: Option<f64>,
    pub tau: Option<f64>,
    pub verdict: Option<Verdict>,
    pub tolerances: Tolerances,
    pub prescale: f64,
    /// The upper bound was computed for a graph with negative weights.
    #[serde(default)]
    pub delta_premise_unverified: bool,
    /// Why `delta` is absent, when it is.
    #[serde(default)]
    pub delta_unavailable: Option<String>,
}

impl BoundReport {
    /// `beta - tol <= lambda <= delta + tol` using the report's own bracket widths plus `slack`.
    pub fn encloses(&self, lambda: f64, slack: f64) -> bool {
        let lower_ok = self.beta - self.tolerances.beta_abs - slack <= lambda;
        let upper_ok = match self.delta {
            Some(d) => lambda <= d + self.tolerances.delta_abs.unwrap_or(0.0) + slack,
            None => true,
        };
        lower_ok && upper_ok
    }
}

pub fn threshold_verdict(report: &BoundReport, tau: f64) -> Verdict {
    match report.delta {
        Some(d) if d < tau => Verdict::GuaranteedDieOut,
        _ if report.beta > tau => Verdict::GuaranteedAboveThreshold,
        _ => Verdict::Indeterminate,
    }
}

/// Computes every bound available from `m` at order `r` (default: the
/// highest order the sequence supports).
///
/// The upper bound is omitted, with the reason recorded, when `n` is unknown
/// or when the source has negative weights and no override was given.
pub fn analyze_moments(
    m: &MomentSequence,
    r: Option<usize>,
    tau: Option<f64>,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    let r = match r.or_else(|| m.max_bound_order()) {
        Some(r) => r,
        None => {
            return Err(Error::InsufficientMoments {
                order: 0,
                needed: 2,
                got: m.values().len(),
            })
        }
    };
    if let Some(t) = tau {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument("tau must be positive".into()));
        }
    }
    let beta = lower_bound_beta_certified(m, r, opts)?;
    let (delta, delta_unavailable) = if r == 0 {
        (None, Some("upper bound needs order r >= 1".to_owned()))
    } else {
        match upper_bound_delta_certified(m, r, opts) {
            Ok(c) => (Some(c), None),
            Err(e @ (Error::MissingNodeCount | Error::NegativeWeights)) => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        }
    };
    let mut report = BoundReport {
        r,
        beta: beta.value,
        delta: delta.map(|c| c.value),
        beta_closed_form: beta1_closed_form_from_moments(m),
        lambda1: None,
        chung_lu: None,
        tau,
        verdict: None,
        tolerances: Tolerances {
            psd: opts.psd_tol,
            bisection: opts.bisection_tol,
            scan_steps: opts.scan_steps,
            beta_abs: beta.tolerance,
            delta_abs: delta.map(|c| c.tolerance),
        },
        prescale: beta.prescale,
        delta_premise_unverified: delta.is_some() && m.negative_weights,
        delta_unavailable,
    };
    report.verdict = tau.map(|t| threshold_verdict(&report, t));
    Ok(report)
}
