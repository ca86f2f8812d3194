//! Constructors for bounded-increment random walks, birth-death chains and
//! Metropolis-Hastings kernels.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::band_chain::{BandChain, SparseRow, StationaryDist, ROW_SUM_TOL};
use crate::error::{Error, Result};
use crate::spectral::LimitProfile;

/// Diagonal entries below this are reported instead of clamped.
pub const DIAGONAL_TOL: f64 = 1e-12;
/// A ratio limsup at or above `1 - RECURRENCE_MARGIN` fails the recurrence
/// screen.
pub const RECURRENCE_MARGIN: f64 = 1e-9;
/// Number of rows inspected when a model is checked on construction.
pub const PROBE_ROWS: usize = 256;

type SeqFn = dyn Fn(usize) -> f64 + Send + Sync;

/// Bounded-increment random walk: `P(i, i+m) = a_m` for `-g <= m <= d` once
/// `i >= g`, explicit rows below.
///
/// `a` lists `a_{-g}..=a_d`; `boundary` gives rows `0..g`.
pub fn rw_chain(g: usize, d: usize, a: &[f64], boundary: Vec<SparseRow>) -> Result<BandChain> {
    if g == 0 || d == 0 {
        return Err(Error::InvalidCoefficients(
            "both g and d must be positive".into(),
        ));
    }
    if a.len() != g + d + 1 {
        return Err(Error::InvalidCoefficients(format!(
            "expected {} coefficients a_-{g}..a_{d}, got {}",
            g + d + 1,
            a.len()
        )));
    }
    if a.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::InvalidCoefficients(
            "coefficients must lie in [0, 1]".into(),
        ));
    }
    if a[0] <= 0.0 || a[g + d] <= 0.0 {
        return Err(Error::InvalidCoefficients(format!(
            "a_-{g} and a_{d} must be positive"
        )));
    }
    let sum: f64 = a.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(Error::InvalidCoefficients(format!(
            "coefficients sum to {sum}"
        )));
    }
    if boundary.len() != g {
        return Err(Error::InvalidChain(format!(
            "expected {g} boundary rows, got {}",
            boundary.len()
        )));
    }
    let n = g.max(d);
    let mut band = vec![0.0; 2 * n + 1];
    band[n - g..=n + d].copy_from_slice(a);
    BandChain::with_constant_band(boundary, band)
}

/// Walk with two steps down and one up: rows `0` and `1` are
/// `{0: a, 1: 1-a}` and `{0: b, 2: 1-b}`, then
/// `P(n, n-2) = 1/2, P(n, n-1) = 1/3, P(n, n+1) = 1/6`.
pub fn two_down_one_up(a: f64, b: f64) -> Result<BandChain> {
    for (name, v) in [("a", a), ("b", b)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::ParameterDomain(format!(
                "{name} must lie in (0, 1), got {v}"
            )));
        }
    }
    rw_chain(
        2,
        1,
        &[0.5, 1.0 / 3.0, 0.0, 1.0 / 6.0],
        vec![vec![(0, a), (1, 1.0 - a)], vec![(0, b), (2, 1.0 - b)]],
    )
}

/// Increment law of [`two_down_one_up`] as a limit profile.
pub fn two_down_one_up_profile() -> LimitProfile {
    LimitProfile::new(vec![0.5, 1.0 / 3.0, 0.0, 1.0 / 6.0, 0.0])
        .expect("coefficients are a probability vector")
}

/// Birth-death parameters: `p_i` down (`i >= 1`), `r_i` stay, `q_i` up.
#[derive(Clone)]
pub struct BdmcSpec {
    p: Arc<SeqFn>,
    r: Arc<SeqFn>,
    q: Arc<SeqFn>,
}

impl BdmcSpec {
    /// `r` is derived as `1 - p_i - q_i` (and `1 - q_0` at the origin).
    pub fn new<P, Q>(p: P, q: Q) -> Result<Self>
    where
        P: Fn(usize) -> f64 + Send + Sync + 'static,
        Q: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        let p: Arc<SeqFn> = Arc::new(p);
        let q: Arc<SeqFn> = Arc::new(q);
        let (pp, qq) = (p.clone(), q.clone());
        let r: Arc<SeqFn> = Arc::new(move |i| {
            if i == 0 {
                1.0 - qq(0)
            } else {
                1.0 - pp(i) - qq(i)
            }
        });
        let spec = Self { p, r, q };
        spec.validate(PROBE_ROWS)?;
        Ok(spec)
    }

    /// `p_i = p, r_i = r, q_i = q` for `i >= 1`, with `r_0` and `q_0 = 1 - r_0`.
    pub fn constant(p: f64, r: f64, q: f64, r0: f64) -> Result<Self> {
        if (p + r + q - 1.0).abs() > ROW_SUM_TOL || r < 0.0 {
            return Err(Error::ParameterDomain(format!(
                "p + r + q must be 1 with r >= 0, got {p} + {r} + {q}"
            )));
        }
        if !(0.0..1.0).contains(&r0) {
            return Err(Error::ParameterDomain(format!("r0 must lie in [0, 1), got {r0}")));
        }
        Self::new(move |_| p, move |i| if i == 0 { 1.0 - r0 } else { q })
    }

    pub fn p(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            (self.p)(i)
        }
    }

    pub fn r(&self, i: usize) -> f64 {
        (self.r)(i)
    }

    pub fn q(&self, i: usize) -> f64 {
        (self.q)(i)
    }

    /// Checks `r_0 < 1`, `0 < p_i, q_i < 1` and `r_i >= 0` on `0..=i_max`.
    pub fn validate(&self, i_max: usize) -> Result<()> {
        let q0 = self.q(0);
        if !(q0 > 0.0 && q0 <= 1.0) {
            return Err(Error::ParameterDomain(format!(
                "q_0 must lie in (0, 1], got {q0}"
            )));
        }
        for i in 1..=i_max {
            let (p, r, q) = (self.p(i), self.r(i), self.q(i));
            if !(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0) {
                return Err(Error::ParameterDomain(format!(
                    "need 0 < p_i, q_i < 1, got p_{i} = {p}, q_{i} = {q}"
                )));
            }
            if r < -ROW_SUM_TOL {
                return Err(Error::ParameterDomain(format!(
                    "r_{i} = {r} is negative"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Debug for BdmcSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BdmcSpec")
            .field("r0", &self.r(0))
            .field("p1", &self.p(1))
            .field("q1", &self.q(1))
            .finish_non_exhaustive()
    }
}

/// Tridiagonal chain with row 0 = `{0: r_0, 1: q_0}`.
pub fn bdmc_chain(spec: &BdmcSpec) -> Result<BandChain> {
    let s = spec.clone();
    let chain = BandChain::new(
        1,
        vec![vec![(0, spec.r(0)), (1, spec.q(0))]],
        move |i| vec![s.p(i), s.r(i).max(0.0), s.q(i)],
    )?;
    debug_assert_eq!(chain.half_width(), 1);
    Ok(chain)
}

/// `pi(i) = prod_{j=1..i} q_{j-1}/p_j / S` on `0..k`, with `S` replaced by
/// its partial sum over the window.
///
/// Positive recurrence is screened by requiring the ratios `q_{j-1}/p_j` to
/// stay below `1 - 1e-9` on the second half of a probe window of at least
/// [`PROBE_ROWS`] states.
pub fn bdmc_stationary(spec: &BdmcSpec, k: usize) -> Result<StationaryDist> {
    if k == 0 {
        return Err(Error::ParameterDomain("window must be nonempty".into()));
    }
    let ratio = |i: usize| spec.q(i) / spec.p(i + 1);
    let probe = k.max(PROBE_ROWS);
    let limsup = (probe / 2..probe).map(ratio).fold(0.0, f64::max);
    if limsup >= 1.0 - RECURRENCE_MARGIN {
        return Err(Error::NotPositiveRecurrent { ratio: limsup });
    }
    Ok(StationaryDist::from_ratios(k, ratio)?.normalized())
}

/// Target law given by its successor ratios `pi(i+1)/pi(i)`.
#[derive(Clone)]
pub struct TargetRatios {
    ratio: Arc<SeqFn>,
    tail_ratio: Option<f64>,
    name: String,
}

impl TargetRatios {
    pub fn new<F>(name: impl Into<String>, ratio: F, tail_ratio: Option<f64>) -> Self
    where
        F: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        Self {
            ratio: Arc::new(ratio),
            tail_ratio,
            name: name.into(),
        }
    }

    /// Poisson(lambda): ratio `lambda/(i+1)`, tail ratio 0.
    pub fn poisson(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::ParameterDomain(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(Self::new(
            format!("poisson({lambda})"),
            move |i| lambda / (i + 1) as f64,
            Some(0.0),
        ))
    }

    /// `pi(i) ∝ (i+1) tau^i`: ratio `tau (i+2)/(i+1)`.
    pub fn linear_geometric(tau: f64) -> Result<Self> {
        check_open_unit("tau", tau)?;
        Ok(Self::new(
            format!("linear-geometric({tau})"),
            move |i| tau * (i + 2) as f64 / (i + 1) as f64,
            Some(tau),
        ))
    }

    /// `pi(i) ∝ tau^i`.
    pub fn geometric(tau: f64) -> Result<Self> {
        check_open_unit("tau", tau)?;
        Ok(Self::new(format!("geometric({tau})"), move |_| tau, Some(tau)))
    }

    pub fn ratio(&self, i: usize) -> f64 {
        (self.ratio)(i)
    }

    pub fn tail_ratio(&self) -> Option<f64> {
        self.tail_ratio
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `pi(j)/pi(i)` from the successor ratios.
    pub fn relative(&self, i: usize, j: usize) -> f64 {
        if j >= i {
            (i..j).map(|l| self.ratio(l)).product()
        } else {
            1.0 / (j..i).map(|l| self.ratio(l)).product::<f64>()
        }
    }

    /// Unnormalized weights on `0..k`.
    pub fn stationary(&self, k: usize) -> Result<StationaryDist> {
        StationaryDist::from_ratios(k, |i| self.ratio(i))
    }
}

impl fmt::Debug for TargetRatios {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetRatios")
            .field("name", &self.name)
            .field("tail_ratio", &self.tail_ratio)
            .finish()
    }
}

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!(
            "{name} must lie in (0, 1), got {v}"
        )))
    }
}

/// A proposal kernel with symmetric support, plus the limits `q_m` of its
/// band rows when they are known.
#[derive(Clone)]
pub struct ProposalKernel {
    chain: BandChain,
    limits: Option<Vec<f64>>,
}

impl ProposalKernel {
    /// Checks stochasticity and `Q(i,j) = 0 <=> Q(j,i) = 0` on rows
    /// `0..=check_window`.
    pub fn new(chain: BandChain, limits: Option<Vec<f64>>, check_window: usize) -> Result<Self> {
        if let Some(l) = &limits {
            if l.len() != 2 * chain.half_width() + 1 {
                return Err(Error::InvalidCoefficients(format!(
                    "expected {} proposal limits, got {}",
                    2 * chain.half_width() + 1,
                    l.len()
                )));
            }
        }
        let report = chain.validate(check_window);
        if !report.is_valid() {
            return Err(Error::InvalidChain(format!(
                "proposal fails validation: {:?}",
                report.violations.first()
            )));
        }
        for i in 0..=check_window {
            for (j, _) in chain.row(i) {
                if chain.entry(j, i) == 0.0 {
                    return Err(Error::InvalidChain(format!(
                        "asymmetric support: Q({i},{j}) > 0 but Q({j},{i}) = 0"
                    )));
                }
            }
        }
        Ok(Self { chain, limits })
    }

    pub fn chain(&self) -> &BandChain {
        &self.chain
    }

    /// `q_{-N}..=q_N`, if known.
    pub fn limits(&self) -> Option<&[f64]> {
        self.limits.as_deref()
    }
}

impl fmt::Debug for ProposalKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProposalKernel")
            .field("half_width", &self.chain.half_width())
            .field("limits", &self.limits)
            .finish()
    }
}

/// `Q(0,0) = r, Q(0,1) = 1-r` and `Q(i, i-1) = q, Q(i,i) = 1-2q, Q(i,i+1) = q`.
pub fn proposal_rw(r: f64, q: f64) -> Result<ProposalKernel> {
    check_open_unit("r", r)?;
    if !(q > 0.0 && q <= 0.5) {
        return Err(Error::ParameterDomain(format!(
            "q must lie in (0, 1/2], got {q}"
        )));
    }
    let band = vec![q, 1.0 - 2.0 * q, q];
    let chain = BandChain::with_constant_band(vec![vec![(0, r), (1, 1.0 - r)]], band.clone())?;
    ProposalKernel::new(chain, Some(band), 4)
}

/// Metropolis-Hastings kernel for `target` with proposal `proposal`.
///
/// Off-diagonal entries are `min(Q(i,j), pi(j) Q(j,i) / pi(i))`; the diagonal
/// takes the remainder. Rows are generated lazily; the first
/// [`PROBE_ROWS`] rows are checked for a negative diagonal on construction.
pub fn mh_chain(target: &TargetRatios, proposal: &ProposalKernel) -> Result<BandChain> {
    let q = proposal.chain.clone();
    let n = q.half_width();
    let i0 = q.boundary_cutoff();
    let t = target.clone();
    let dense_row = move |i: usize| -> (Vec<(usize, f64)>, f64) {
        let mut off = Vec::new();
        let mut total = 0.0;
        for (j, qij) in q.row(i) {
            if j == i {
                continue;
            }
            let back = t.relative(i, j) * q.entry(j, i);
            let pij = qij.min(back);
            total += pij;
            off.push((j, pij));
        }
        (off, 1.0 - total)
    };
    for i in 0..PROBE_ROWS.max(i0 + 4 * n) {
        let (_, diag) = dense_row(i);
        if diag < -DIAGONAL_TOL {
            return Err(Error::NegativeDiagonal { state: i, value: diag });
        }
    }
    let boundary = (0..i0)
        .map(|i| {
            let (mut row, diag) = dense_row(i);
            row.push((i, diag.max(0.0)));
            row.sort_by_key(|&(j, _)| j);
            row.retain(|&(_, p)| p > 0.0);
            row
        })
        .collect();
    BandChain::new(n, boundary, move |i| {
        let (off, diag) = dense_row(i);
        let mut band = vec![0.0; 2 * n + 1];
        for (j, p) in off {
            band[j + n - i] = p;
        }
        band[n] = diag.max(0.0);
        band
    })
}

/// Limit profile of a M-H kernel: `p_k = min(q_k, tau^k q_{-k})` for `k != 0`
/// and `p_0 = 1 - sum_{k != 0} p_k`.
///
/// `q_limits` holds `q_{-N}..=q_N`.
pub fn mh_limit_profile(q_limits: &[f64], tau: f64) -> Result<LimitProfile> {
    if q_limits.len().is_multiple_of(2) {
        return Err(Error::InvalidCoefficients(format!(
            "expected 2N + 1 proposal limits, got {}",
            q_limits.len()
        )));
    }
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::ParameterDomain(format!("tau must lie in [0, 1), got {tau}")));
    }
    let n = q_limits.len() / 2;
    let ql = |m: isize| q_limits[(m + n as isize) as usize];
    let mut coeffs = vec![0.0; 2 * n + 1];
    for k in 1..=n as isize {
        let (fwd, bwd) = (ql(k), ql(-k));
        let tk = tau.powi(k as i32);
        coeffs[n + k as usize] = fwd.min(tk * bwd);
        // tau^-k q_k may be infinite: the min then falls back to q_-k
        coeffs[n - k as usize] = if fwd == 0.0 { 0.0 } else { bwd.min(fwd / tk) };
    }
    coeffs[n] = 1.0 - coeffs.iter().sum::<f64>();
    LimitProfile::new(coeffs)?.with_tail_ratio(tau)
}

/// Which branch of the constant birth-death case split applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BdmcCase {
    /// `r0 >= beta0`.
    HighBoundary,
    /// `r0 < beta0` and `2p <= (1 - q + sqrt(pq))^2`.
    LowBoundaryWeakDrift,
    /// `r0 <= beta1`: the rate is attained by a boundary eigenvalue.
    Exact,
    /// `beta1 < r0 < beta0`.
    Intermediate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BdmcRateBound {
    pub value: f64,
    pub is_exact: bool,
    pub case: BdmcCase,
    pub beta0: f64,
    pub beta1: Option<f64>,
}

/// Rate bound for the birth-death chain with constant `p, r, q` and
/// boundary holding probability `r0`.
pub fn bdmc_rate_bound(p: f64, q: f64, r: f64, r0: f64) -> Result<BdmcRateBound> {
    if (p + r + q - 1.0).abs() > ROW_SUM_TOL || r < 0.0 {
        return Err(Error::ParameterDomain(format!(
            "p + r + q must be 1 with r >= 0, got {p} + {r} + {q}"
        )));
    }
    if !(p > q && q > 0.0) {
        return Err(Error::ParameterDomain(format!("need p > q > 0, got p = {p}, q = {q}")));
    }
    check_open_unit("r0", r0)?;
    let spq = (p * q).sqrt();
    let bound = r + 2.0 * spq;
    let beta0 = 1.0 - q - spq;
    let generic = |case, beta1| BdmcRateBound {
        value: bound,
        is_exact: false,
        case,
        beta0,
        beta1,
    };
    if r0 >= beta0 {
        return Ok(generic(BdmcCase::HighBoundary, None));
    }
    if 2.0 * p <= (1.0 - q + spq).powi(2) {
        return Ok(generic(BdmcCase::LowBoundaryWeakDrift, None));
    }
    let beta1 = p - spq - (r * (r + 2.0 * spq)).sqrt();
    if r0 <= beta1 {
        Ok(BdmcRateBound {
            value: (r0 + p * (1.0 - r0) / (r0 - 1.0 + q)).abs(),
            is_exact: true,
            case: BdmcCase::Exact,
            beta0,
            beta1: Some(beta1),
        })
    } else {
        Ok(generic(BdmcCase::Intermediate, Some(beta1)))
    }
}
