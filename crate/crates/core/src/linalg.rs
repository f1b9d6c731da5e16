//! Small dense symmetric linear algebra and the dominant adjacency eigenvalue.
//!
//! Hankel matrices here are at most a handful of rows, so a cyclic Jacobi
//! sweep is both accurate and fast enough. The same solver backs the
//! dense oracles used in tests.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Default relative tolerance for PSD verdicts.
pub const DEFAULT_PSD_TOL: f64 = 1e-9;

/// Default dimension cap for dense eigen-decompositions.
pub const DEFAULT_DENSE_CAP: usize = 5000;

/// Dense symmetric matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "SymMatrix must have dim >= 1");
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// Builds `M[i][j] = f(i, j)` for `i <= j` and mirrors it.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(dim: usize, mut f: F) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds from explicit rows; rejects non-square or asymmetric input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument("matrix must be square and non-empty".into()));
        }
        for i in 0..dim {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::InvalidArgument(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &SymMatrix, b: f64) -> SymMatrix {
        assert_eq!(self.dim, other.dim);
        SymMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    /// `max(1, max |entry|)`: the reference magnitude for relative PSD tolerances.
    pub fn scale(&self) -> f64 {
        self.data.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }
}

/// Eigenvalues of a symmetric matrix in descending order, by cyclic Jacobi.
pub fn sym_eigenvalues(m: &SymMatrix) -> Result<Vec<f64>> {
    sym_eigenvalues_capped(m, DEFAULT_DENSE_CAP)
}

pub fn sym_eigenvalues_capped(m: &SymMatrix, cap: usize) -> Result<Vec<f64>> {
    if m.dim() > cap {
        return Err(Error::CapExceeded {
            what: "dense eigen-decomposition",
            size: m.dim(),
            cap,
            advice: "raise the cap or use power iteration",
        });
    }
    let mut vals = jacobi_eigenvalues(m);
    vals.sort_by(|a, b| b.total_cmp(a));
    Ok(vals)
}

fn jacobi_eigenvalues(m: &SymMatrix) -> Vec<f64> {
    const MAX_SWEEPS: usize = 100;
    let n = m.dim();
    let mut a = m.data.clone();
    if n == 1 {
        return a;
    }
    let frob2: f64 = a.iter().map(|x| x * x).sum();
    if frob2 == 0.0 {
        return vec![0.0; n];
    }
    let target = (f64::EPSILON * f64::EPSILON) * frob2;

    for _ in 0..MAX_SWEEPS {
        let mut off2 = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off2 += a[p * n + q] * a[p * n + q];
            }
        }
        if off2 <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    let new_rp = c * arp - s * arq;
                    let new_rq = s * arp + c * arq;
                    a[r * n + p] = new_rp;
                    a[p * n + r] = new_rp;
                    a[r * n + q] = new_rq;
                    a[q * n + r] = new_rq;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Smallest eigenvalue.
pub fn min_eigenvalue(m: &SymMatrix) -> f64 {
    jacobi_eigenvalues(m)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Smallest eigenvalue divided by [`SymMatrix::scale`]. A matrix passes
/// [`psd_check`] at tolerance `tol` exactly when this is `>= -tol`.
pub fn psd_margin(m: &SymMatrix) -> f64 {
    min_eigenvalue(m) / m.scale()
}

/// True iff every eigenvalue of `m` is `>= -tol * scale` with
/// `scale = max(1, max |entry|)`.
///
/// Runs a diagonally pivoted Cholesky factorization of `m + tol*scale*I`. A
/// clearly positive or clearly negative pivot settles the verdict; pivots
/// within rounding distance of zero defer to the eigenvalues.
pub fn psd_check(m: &SymMatrix, tol: f64) -> bool {
    let scale = m.scale();
    let slack = tol * scale;
    match pivoted_cholesky_verdict(m, slack, scale) {
        Some(v) => v,
        None => min_eigenvalue(m) >= -slack,
    }
}

fn pivoted_cholesky_verdict(m: &SymMatrix, slack: f64, scale: f64) -> Option<bool> {
    let n = m.dim();
    let guard = 64.0 * n as f64 * f64::EPSILON * scale;
    let mut a = m.data.clone();
    for i in 0..n {
        a[i * n + i] += slack;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        // largest remaining diagonal of the Schur complement
        let (best, &piv) = perm[k..]
            .iter()
            .enumerate()
            .max_by(|x, y| a[x.1 * n + x.1].total_cmp(&a[y.1 * n + y.1]))
            .expect("non-empty");
        let piv_val = a[piv * n + piv];
        if piv_val < -guard {
            return Some(false);
        }
        if piv_val <= guard {
            return None;
        }
        perm.swap(k, k + best);
        let root = piv_val.sqrt();
        for &i in &perm[k + 1..] {
            a[i * n + piv] /= root;
        }
        for (ii, &i) in perm.iter().enumerate().skip(k + 1) {
            let lik = a[i * n + piv];
            for &j in &perm[ii..] {
                let v = a[j * n + i] - lik * a[j * n + piv];
                a[j * n + i] = v;
                a[i * n + j] = v;
            }
        }
    }
    Some(true)
}

/// Options for [`lambda1_exact`].
#[derive(Debug, Clone, Copy)]
pub struct Lambda1Options {
    /// Residual tolerance relative to `max(1, |lambda|)`.
    pub tol: f64,
    pub max_iters: usize,
    /// Size cap for the dense fallback used on graphs with negative weights.
    pub dense_cap: usize,
}

impl Default for Lambda1Options {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 100_000,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }
}

/// Largest adjacency eigenvalue of `g`.
///
/// Nonnegative weights: shifted power iteration on `A + sigma*I` from the
/// normalized all-ones vector, stopping once the eigen-residual is below
/// `tol * max(1, |theta|)`. The shift separates `lambda_1` from `-lambda_1`
/// on bipartite graphs. Graphs with negative weights go through the dense
/// eigensolver instead, since power iteration would find the spectral radius.
pub fn lambda1_exact(g: &Graph, opts: &Lambda1Options) -> Result<f64> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::InvalidArgument("graph has no nodes".into()));
    }
    if g.edge_count() == 0 {
        return Ok(0.0);
    }
    if g.has_negative_weights() {
        let vals = sym_eigenvalues_capped(&g.dense_adjacency(), opts.dense_cap)?;
        return Ok(vals[0]);
    }

    // Both quantities are lower bounds on lambda_1 for nonnegative weights:
    // sqrt([A^2]_ii) and the Rayleigh quotient of the all-ones vector.
    let max_row_norm = (0..n)
        .map(|i| g.neighbor_weights(i).iter().map(|w| w * w).sum::<f64>())
        .fold(0.0_f64, f64::max)
        .sqrt();
    let ones_quotient = g.edges().map(|(_, _, w)| 2.0 * w).sum::<f64>() / n as f64;
    let sigma = 0.5 * max_row_norm.max(ones_quotient);

    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut theta = 0.0;
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iters {
        g.matvec(&x, &mut y);
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += sigma * xi;
        }
        theta = dot(&x, &y);
        residual = y
            .iter()
            .zip(&x)
            .map(|(yi, xi)| (yi - theta * xi).powi(2))
            .sum::<f64>()
            .sqrt();
        let lambda = theta - sigma;
        if residual <= opts.tol * lambda.abs().max(1.0) {
            return Ok(lambda);
        }
        let norm = dot(&y, &y).sqrt();
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
    }
    Err(Error::NoConvergence {
        iters: opts.max_iters,
        lo: theta - sigma - residual,
        hi: theta - sigma + residual,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
