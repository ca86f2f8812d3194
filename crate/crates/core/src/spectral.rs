//! Essential-spectral-radius bounds and drift checks.
//!
//! Everything here is driven either by a [`LimitProfile`] (the asymptotic
//! increment law `a_m` of the chain and, optionally, the tail ratio `tau` of
//! its invariant law) or by a finite window of an explicit chain and its
//! stationary weights.

use serde::Serialize;

use crate::band_chain::{BandChain, StationaryDist, ROW_SUM_TOL};
use crate::error::{Error, Result};

/// Asymptotic increment probabilities `a_{-N}..=a_N` and an optional tail
/// ratio `tau = lim pi(i+1)/pi(i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitProfile {
    half_width: usize,
    coefficients: Vec<f64>,
    tail_ratio: Option<f64>,
}

impl LimitProfile {
    /// `coefficients[m + N] = a_m`; the length must be odd.
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len().is_multiple_of(2) || coefficients.len() < 3 {
            return Err(Error::InvalidCoefficients(format!(
                "need 2N + 1 >= 3 coefficients, got {}",
                coefficients.len()
            )));
        }
        if let Some((idx, a)) = coefficients
            .iter()
            .enumerate()
            .find(|(_, a)| !(0.0..=1.0).contains(*a))
        {
            return Err(Error::InvalidCoefficients(format!(
                "coefficient at offset {} is {a}",
                idx as isize - (coefficients.len() / 2) as isize
            )));
        }
        let sum: f64 = coefficients.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidCoefficients(format!(
                "coefficients sum to {sum}, not 1"
            )));
        }
        Ok(Self {
            half_width: coefficients.len() / 2,
            coefficients,
            tail_ratio: None,
        })
    }

    /// Attaches `tau`. With `tau = 0` every forward coefficient must vanish.
    pub fn with_tail_ratio(mut self, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        if tau == 0.0 {
            self.check_no_forward_mass()?;
        }
        self.tail_ratio = Some(tau);
        Ok(self)
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn tail_ratio(&self) -> Option<f64> {
        self.tail_ratio
    }

    /// `a_m`, zero outside `-N..=N`.
    pub fn a(&self, m: isize) -> f64 {
        let idx = m + self.half_width as isize;
        if idx < 0 {
            return 0.0;
        }
        self.coefficients.get(idx as usize).copied().unwrap_or(0.0)
    }

    fn offsets(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        let n = self.half_width as isize;
        self.coefficients
            .iter()
            .enumerate()
            .map(move |(idx, &a)| (idx as isize - n, a))
    }

    fn check_no_forward_mass(&self) -> Result<()> {
        for m in 1..=self.half_width {
            let value = self.a(m as isize);
            if value != 0.0 {
                return Err(Error::InconsistentTauZero { m, value });
            }
        }
        Ok(())
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if (0.0..1.0).contains(&tau) {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("tau must lie in [0, 1), got {tau}")))
    }
}

/// `psi(t) = sum_k a_k t^(-k)`.
pub fn psi(profile: &LimitProfile, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonpositiveArgument(t));
    }
    Ok(psi_unchecked(profile, t))
}

fn psi_unchecked(profile: &LimitProfile, t: f64) -> f64 {
    profile
        .offsets()
        .filter(|&(_, a)| a != 0.0)
        .map(|(k, a)| a * t.powi(-(k as i32)))
        .sum()
}

/// Mean asymptotic increment `sum_k k a_k` and whether it is negative.
pub fn neri(profile: &LimitProfile) -> (bool, f64) {
    let drift: f64 = profile.offsets().map(|(k, a)| k as f64 * a).sum();
    (drift < 0.0, drift)
}

const TAU_MAX_ITER: usize = 200;
const TAU_T_TOL: f64 = 1e-14;

/// The root of `psi(t) = 1` inside `(0, 1)`.
///
/// `psi` is convex with `psi(1) = 1`; under a negative mean increment it dips
/// below 1 just left of `t = 1` and blows up at `0+` once some forward
/// coefficient is positive, so the sub-unit root is bracketed by scanning a
/// geometric grid for a sign change and then bisected.
pub fn solve_tau(profile: &LimitProfile) -> Result<f64> {
    if (1..=profile.half_width).all(|m| profile.a(m as isize) == 0.0) {
        return Err(Error::DegenerateTailZero);
    }
    // psi'(1) = -drift, so a sub-unit root exists exactly when the drift is negative
    if !neri(profile).0 {
        return Err(Error::NoRootInUnitInterval);
    }
    let f = |t: f64| psi_unchecked(profile, t) - 1.0;
    // a point with psi < 1, approaching 1 from below
    let hi = (1..=60)
        .map(|j| 1.0 - 0.5f64.powi(j))
        .chain((1..=60).map(|j| 0.5f64.powi(j)))
        .find(|&t| f(t) < 0.0)
        .ok_or(Error::NoRootInUnitInterval)?;
    // a point to its left with psi > 1
    let mut lo = hi;
    loop {
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            return Err(Error::NoRootInUnitInterval);
        }
        if f(lo) > 0.0 {
            break;
        }
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..TAU_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v == 0.0 {
            return Ok(mid);
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= TAU_T_TOL * hi {
            break;
        }
    }
    // pick the bracket end with the smaller residual
    Ok(if f(lo).abs() <= f(hi).abs() { lo } else { hi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Alpha0Method {
    Profile,
    Reversible,
    /// A sup over a finite window, not a certified limsup.
    Empirical,
}

/// An upper bound for the essential spectral radius on l2(pi).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Alpha0Result {
    pub value: f64,
    pub method: Alpha0Method,
    pub tau: Option<f64>,
    /// `(ell, i_max)` for window estimates.
    pub window: Option<(usize, usize)>,
}

/// `psi(sqrt(tau))` when `tau` is in `(0, 1)`, `a_0` when `tau = 0`.
pub fn alpha0_from_profile(profile: &LimitProfile, tau: f64) -> Result<Alpha0Result> {
    check_tau(tau)?;
    let value = if tau == 0.0 {
        profile.check_no_forward_mass()?;
        profile.a(0)
    } else {
        psi_unchecked(profile, tau.sqrt())
    };
    Ok(Alpha0Result {
        value,
        method: Alpha0Method::Profile,
        tau: Some(tau),
        window: None,
    })
}

/// `1 - sum_{m>=1} (sqrt(a_m) - sqrt(a_{-m}))^2`, valid for reversible
/// kernels.
pub fn alpha0_reversible(profile: &LimitProfile) -> Alpha0Result {
    let gap: f64 = (1..=profile.half_width as isize)
        .map(|m| (profile.a(m).sqrt() - profile.a(-m).sqrt()).powi(2))
        .sum();
    Alpha0Result {
        value: 1.0 - gap,
        method: Alpha0Method::Reversible,
        tau: profile.tail_ratio,
        window: None,
    }
}

/// `sum_m sup_{ell <= i <= i_max} beta_m(i)` with
/// `beta_m(i) = sqrt(P(i, i+m) P*(i+m, i)) = P(i, i+m) sqrt(pi(i)/pi(i+m))`.
///
/// This is a window proxy for the limsup in the bound: it dominates it when
/// each `beta_m` is eventually monotone, and nothing is claimed otherwise.
pub fn alpha0_empirical(
    chain: &BandChain,
    pi: &StationaryDist,
    ell: usize,
    i_max: usize,
) -> Result<Alpha0Result> {
    let n = chain.half_width();
    if ell < chain.boundary_cutoff() || ell > i_max {
        return Err(Error::OutOfWindow {
            state: ell,
            window: pi.len(),
        });
    }
    pi.check(i_max + n)?;
    let mut sups = vec![0.0f64; 2 * n + 1];
    for i in ell..=i_max {
        let probs = chain.band_probabilities(i);
        for (idx, &p) in probs.iter().enumerate() {
            if p == 0.0 || i + idx < n {
                continue;
            }
            let j = i + idx - n;
            let beta = p * (0.5 * (pi.log_weight(i) - pi.log_weight(j))).exp();
            sups[idx] = sups[idx].max(beta);
        }
    }
    Ok(Alpha0Result {
        value: sups.iter().sum(),
        method: Alpha0Method::Empirical,
        tau: None,
        window: Some((ell, i_max)),
    })
}

/// Constants of the drift inequality `PV <= alpha V + L` for
/// `V(i) = pi(i)^(-1/2)` over `0..=i_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftCertificate {
    pub alpha: f64,
    pub constant: f64,
    pub probe_depth: usize,
    /// Largest `(PV)(i)/V(i)` on the last quarter of the window.
    pub tail_ratio_max: f64,
}

/// `(PV)(i) / V(i) = sum_j P(i, j) sqrt(pi(i)/pi(j))`.
pub fn drift_ratio(chain: &BandChain, pi: &StationaryDist, i: usize) -> f64 {
    chain
        .row(i)
        .into_iter()
        .map(|(j, p)| p * (0.5 * (pi.log_weight(i) - pi.log_weight(j))).exp())
        .sum()
}

/// `L = max(0, max_{i <= i_max} (PV)(i) - alpha V(i))`, after checking that
/// `(PV)(i)/V(i) <= alpha` on the last quarter of the window.
pub fn drift_constants(
    chain: &BandChain,
    pi: &StationaryDist,
    alpha: f64,
    i_max: usize,
) -> Result<DriftCertificate> {
    pi.check(chain.reach(i_max))?;
    let tail_start = i_max - i_max / 4;
    let mut constant: f64 = 0.0;
    let mut tail_ratio_max: f64 = 0.0;
    for i in 0..=i_max {
        let ratio = drift_ratio(chain, pi, i);
        if i >= tail_start {
            if ratio > alpha {
                return Err(Error::DriftViolatedAtTail {
                    state: i,
                    ratio,
                    alpha,
                });
            }
            tail_ratio_max = tail_ratio_max.max(ratio);
        }
        if ratio > alpha {
            constant = constant.max((ratio - alpha) * pi.lyapunov(i));
        }
    }
    Ok(DriftCertificate {
        alpha,
        constant,
        probe_depth: i_max,
        tail_ratio_max,
    })
}
