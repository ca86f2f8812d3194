//! Truncation-augmentation estimates of the l2 convergence rate.
//!
//! `P_k` keeps the northwest `k x k` corner of the kernel and folds the mass
//! that leaves `{0..k-1}` into the last column. The subdominant modulus
//! `rho_k` of `P_k` is tracked as `k` grows until it stabilizes.

use num_complex::Complex64;
use serde::Serialize;

use crate::band_chain::BandChain;
use crate::eigen::{eigenvalues, symmetric_tridiagonal_eigenvalues};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// The eigenvalue removed as the Perron root must lie this close to 1.
pub const PERRON_TOL: f64 = 1e-8;
/// A second eigenvalue this close to the unit circle signals periodicity or
/// reducibility.
pub const UNIT_CIRCLE_TOL: f64 = 1e-10;

/// `k x k` truncated and augmented matrix.
pub fn truncate(chain: &BandChain, k: usize) -> DenseMatrix {
    assert!(k >= 2, "truncation order must be at least 2");
    let mut m = DenseMatrix::zeros(k);
    for i in 0..k {
        for (j, p) in chain.row(i) {
            m[(i, j.min(k - 1))] += p;
        }
    }
    m
}

/// Subdominant eigenvalue of a stochastic matrix: the largest-modulus
/// eigenvalue left after removing the single eigenvalue nearest to 1.
///
/// When the matrix is irreducible its stationary weights `w` are used to
/// pass to `D^{-1} M D` with `D = diag(w)^{-1/2}` before the eigensolve. The
/// spectrum is unchanged, but the truncations of non-reversible kernels are
/// far better conditioned in this frame. Tridiagonal matrices go through the
/// symmetric QL path.
pub fn subdominant_eigenvalue(m: &DenseMatrix) -> Result<Complex64> {
    let n = m.order();
    if n == 1 {
        return Err(Error::NoSubdominant);
    }
    let values = match symmetrized_tridiagonal(m) {
        Some((diag, off)) => symmetric_tridiagonal_eigenvalues(&diag, &off)?
            .into_iter()
            .map(|x| Complex64::new(x, 0.0))
            .collect(),
        None => {
            let work = match m.stationary_log_weights() {
                Ok(logw) => scaled_by_log(m, &logw),
                Err(_) => m.clone(),
            };
            eigenvalues(&work)?.eigenvalues
        }
    };
    pick_subdominant(values)
}

/// `rho_k` of a truncated matrix.
pub fn rho_k(m: &DenseMatrix) -> Result<f64> {
    subdominant_eigenvalue(m).map(|z| z.norm())
}

fn pick_subdominant(mut values: Vec<Complex64>) -> Result<Complex64> {
    let (perron_idx, perron_dist) = values
        .iter()
        .enumerate()
        .map(|(i, z)| (i, (z - 1.0).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least two eigenvalues");
    if perron_dist > PERRON_TOL {
        return Err(Error::PerronNotIsolated(format!(
            "nearest eigenvalue to 1 is {} away",
            perron_dist
        )));
    }
    values.swap_remove(perron_idx);
    let sub = values
        .into_iter()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("at least one remaining eigenvalue");
    if (sub.norm() - 1.0).abs() <= UNIT_CIRCLE_TOL {
        return Err(Error::PerronNotIsolated(format!(
            "second eigenvalue {sub} lies on the unit circle"
        )));
    }
    Ok(sub)
}

/// `M(i,j) sqrt(w(i)/w(j))`, computed from log weights so that deep windows
/// cannot overflow.
fn scaled_by_log(m: &DenseMatrix, logw: &[f64]) -> DenseMatrix {
    let n = m.order();
    let mut out = m.clone();
    for i in 0..n {
        for j in 0..n {
            if out[(i, j)] != 0.0 {
                out[(i, j)] *= (0.5 * (logw[i] - logw[j])).exp();
            }
        }
    }
    out
}

/// A tridiagonal matrix with `M(i,i+1) M(i+1,i) > 0` is diagonally similar to
/// the symmetric tridiagonal matrix with off-diagonal
/// `sqrt(M(i,i+1) M(i+1,i))`.
fn symmetrized_tridiagonal(m: &DenseMatrix) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = m.order();
    for i in 0..n {
        for j in 0..n {
            if i.abs_diff(j) > 1 && m[(i, j)] != 0.0 {
                return None;
            }
        }
    }
    let mut off = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let prod = m[(i, i + 1)] * m[(i + 1, i)];
        if !(prod > 0.0) {
            return None;
        }
        off.push(prod.sqrt());
    }
    let diag = (0..n).map(|i| m[(i, i)]).collect();
    Some((diag, off))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateOptions {
    pub eps: f64,
    pub k_start: usize,
    pub k_max: usize,
    /// Consecutive increments with `|rho_k - rho_{k-1}| <= eps` required
    /// before a verdict.
    pub confirmations: usize,
    /// `rho_k` must exceed `alpha0` by more than this for a point estimate.
    pub margin: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            eps: 1e-5,
            k_start: 2,
            k_max: 400,
            confirmations: 3,
            margin: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Verdict {
    /// The rate is approximately `rho_k`.
    PointEstimate(f64),
    /// The rate is at most `alpha0`.
    UpperBound(f64),
    /// `k_max` was reached before `rho_k` settled.
    Unstabilized,
}

impl Verdict {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Verdict::PointEstimate(v) | Verdict::UpperBound(v) => Some(v),
            Verdict::Unstabilized => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::PointEstimate(_) => "point_estimate",
            Verdict::UpperBound(_) => "upper_bound",
            Verdict::Unstabilized => "unstabilized",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateEstimate {
    pub alpha0: f64,
    pub eps: f64,
    /// `(k, rho_k)` for every order visited.
    pub trajectory: Vec<(usize, f64)>,
    pub k_final: usize,
    pub rho_final: f64,
    pub verdict: Verdict,
    pub stabilized: bool,
}

/// Runs the truncation loop from `opts.k_start` until `rho_k` settles or
/// `opts.k_max` is reached.
pub fn estimate_rho2(chain: &BandChain, alpha0: f64, opts: &EstimateOptions) -> Result<RateEstimate> {
    if !(opts.eps > 0.0) {
        return Err(Error::ParameterDomain(format!("eps must be positive, got {}", opts.eps)));
    }
    let k_start = opts.k_start.max(2);
    if opts.k_max < k_start {
        return Err(Error::ParameterDomain(format!(
            "k_max {} is below k_start {k_start}",
            opts.k_max
        )));
    }
    let mut trajectory = Vec::new();
    let mut streak = 0;
    let mut prev: Option<f64> = None;
    for k in k_start..=opts.k_max {
        let rho = rho_k(&truncate(chain, k)).map_err(|e| Error::AtTruncation {
            k,
            source: Box::new(e),
        })?;
        trajectory.push((k, rho));
        match prev {
            Some(p) if (rho - p).abs() <= opts.eps => streak += 1,
            _ => streak = 0,
        }
        prev = Some(rho);
        if streak >= opts.confirmations.max(1) {
            let verdict = if rho > alpha0 + opts.margin {
                Verdict::PointEstimate(rho)
            } else {
                Verdict::UpperBound(alpha0)
            };
            return Ok(RateEstimate {
                alpha0,
                eps: opts.eps,
                trajectory,
                k_final: k,
                rho_final: rho,
                verdict,
                stabilized: true,
            });
        }
    }
    let &(k_final, rho_final) = trajectory.last().expect("k_max >= k_start");
    Ok(RateEstimate {
        alpha0,
        eps: opts.eps,
        trajectory,
        k_final,
        rho_final,
        verdict: Verdict::Unstabilized,
        stabilized: false,
    })
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint<P> {
    pub parameter: P,
    pub outcome: Result<RateEstimate>,
}

/// Runs [`estimate_rho2`] independently at every grid point. `build` maps a
/// parameter to a chain and its `alpha0`. Failures are recorded per point and
/// the order of `grid` is kept.
pub fn parameter_sweep<P, F>(build: F, grid: &[P], opts: &EstimateOptions) -> Vec<SweepPoint<P>>
where
    P: Clone + Send + Sync,
    F: Fn(&P) -> Result<(BandChain, f64)> + Send + Sync,
{
    let run = |p: &P| SweepPoint {
        parameter: p.clone(),
        outcome: build(p).and_then(|(chain, alpha0)| estimate_rho2(&chain, alpha0, opts)),
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        grid.par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        grid.iter().map(run).collect()
    }
}
