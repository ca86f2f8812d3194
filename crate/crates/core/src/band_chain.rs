//! Band-structured Markov kernels on the nonnegative integers.
//!
//! A [`BandChain`] holds finitely many explicit boundary rows and a row
//! function that, for every state `i >= i0`, returns the probabilities of the
//! moves `i -> i + m` for `m` in `-N..=N`. Rows are generated on demand; only
//! [`crate::truncation::truncate`] materializes a matrix.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::truncation::truncate;

/// Default tolerance on row sums.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Default tolerance on the residual of a stationary fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-10;

/// Sparse row: `(column, probability)` pairs in increasing column order.
pub type SparseRow = Vec<(usize, f64)>;

type BandRowFn = dyn Fn(usize) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
pub struct BandChain {
    half_width: usize,
    boundary_cutoff: usize,
    boundary_rows: Vec<SparseRow>,
    band_row: Arc<BandRowFn>,
}

impl BandChain {
    /// `band_row(i)` must return `2 * half_width + 1` probabilities indexed by
    /// offset `m + half_width`. Rows for states below `boundary_rows.len()`
    /// come from `boundary_rows`.
    pub fn new<F>(half_width: usize, boundary_rows: Vec<SparseRow>, band_row: F) -> Result<Self>
    where
        F: Fn(usize) -> Vec<f64> + Send + Sync + 'static,
    {
        if half_width == 0 {
            return Err(Error::InvalidChain("band half-width must be positive".into()));
        }
        let boundary_rows = boundary_rows
            .into_iter()
            .map(normalize_sparse_row)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            half_width,
            boundary_cutoff: boundary_rows.len(),
            boundary_rows,
            band_row: Arc::new(band_row),
        })
    }

    /// Chain whose band rows are the same for every `i >= i0`.
    pub fn with_constant_band(boundary_rows: Vec<SparseRow>, band: Vec<f64>) -> Result<Self> {
        if band.len().is_multiple_of(2) {
            return Err(Error::InvalidChain(format!(
                "band row needs an odd number of entries, got {}",
                band.len()
            )));
        }
        let half_width = band.len() / 2;
        Self::new(half_width, boundary_rows, move |_| band.clone())
    }

    /// `N`.
    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// `i0`: rows below it are explicit boundary rows.
    pub fn boundary_cutoff(&self) -> usize {
        self.boundary_cutoff
    }

    pub fn boundary_rows(&self) -> &[SparseRow] {
        &self.boundary_rows
    }

    /// Raw band probabilities of state `i >= i0`, indexed by `m + N`.
    pub fn band_probabilities(&self, i: usize) -> Vec<f64> {
        (self.band_row)(i)
    }

    /// Nonzero entries of row `i`.
    pub fn row(&self, i: usize) -> SparseRow {
        if i < self.boundary_cutoff {
            return self.boundary_rows[i].clone();
        }
        let n = self.half_width;
        self.band_probabilities(i)
            .into_iter()
            .enumerate()
            .filter(|&(idx, p)| p != 0.0 && i + idx >= n)
            .map(|(idx, p)| (i + idx - n, p))
            .collect()
    }

    /// `P(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i < self.boundary_cutoff {
            return self.boundary_rows[i]
                .iter()
                .find(|&&(col, _)| col == j)
                .map_or(0.0, |&(_, p)| p);
        }
        let n = self.half_width;
        if i.abs_diff(j) > n {
            return 0.0;
        }
        self.band_probabilities(i)
            .get(j + n - i)
            .copied()
            .unwrap_or(0.0)
    }

    /// Largest column that any of rows `0..=i` can reach.
    pub(crate) fn reach(&self, i: usize) -> usize {
        let boundary_reach = self
            .boundary_rows
            .iter()
            .filter_map(|r| r.last().map(|&(j, _)| j))
            .max()
            .unwrap_or(0);
        boundary_reach.max(i + self.half_width)
    }

    /// Checks rows `0..=i_max` for row-sum, sign and band violations.
    pub fn validate(&self, i_max: usize) -> ValidationReport {
        let mut report = ValidationReport {
            rows_checked: i_max + 1,
            max_row_sum_deviation: 0.0,
            violations: Vec::new(),
        };
        let n = self.half_width;
        for i in 0..=i_max {
            let (entries, negative_column_mass) = if i < self.boundary_cutoff {
                (self.boundary_rows[i].clone(), 0.0)
            } else {
                let raw = self.band_probabilities(i);
                if raw.len().is_multiple_of(2) || raw.len() < 2 * n + 1 {
                    report.violations.push(Violation::BandLength {
                        state: i,
                        len: raw.len(),
                    });
                    continue;
                }
                // an over-long row is read as centred offsets of a wider band
                let width = raw.len() / 2;
                let lost: f64 = raw.iter().take(width.saturating_sub(i)).sum();
                let entries: SparseRow = raw
                    .iter()
                    .enumerate()
                    .filter(|&(idx, &p)| p != 0.0 && i + idx >= width)
                    .map(|(idx, &p)| (i + idx - width, p))
                    .collect();
                (entries, lost)
            };
            if negative_column_mass != 0.0 {
                report.violations.push(Violation::BelowZero {
                    state: i,
                    mass: negative_column_mass,
                });
            }
            let mut sum = 0.0;
            for &(j, p) in &entries {
                sum += p;
                if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                    report.violations.push(Violation::EntryRange {
                        state: i,
                        column: j,
                        value: p,
                    });
                }
                if i >= self.boundary_cutoff && i.abs_diff(j) > n {
                    report.violations.push(Violation::Band {
                        state: i,
                        column: j,
                    });
                }
            }
            let dev = (sum - 1.0).abs();
            report.max_row_sum_deviation = report.max_row_sum_deviation.max(dev);
            if dev > ROW_SUM_TOL {
                report.violations.push(Violation::RowSum { state: i, sum });
            }
        }
        report
    }

    /// Positive left fixed vector of the truncated and augmented `k x k`
    /// matrix, normalized to sum one.
    pub fn stationary_truncated(&self, k: usize) -> Result<StationaryDist> {
        if k <= self.boundary_cutoff + self.half_width {
            return Err(Error::ParameterDomain(format!(
                "window {k} must exceed i0 + N = {}",
                self.boundary_cutoff + self.half_width
            )));
        }
        stationary_of(&truncate(self, k))
    }

    /// `P*(i, j) = pi(j) P(j, i) / pi(i)`.
    pub fn adjoint_entry(&self, pi: &StationaryDist, i: usize, j: usize) -> Result<f64> {
        pi.check(i)?;
        pi.check(j)?;
        Ok(pi.ratio(i, j) * self.entry(j, i))
    }

    /// `|sum_j P(j, i) pi(j) / pi(i) - 1|`, the defect of the invariance
    /// equation at state `i`.
    pub fn check_invariance(&self, pi: &StationaryDist, i: usize) -> Result<f64> {
        pi.check(i + self.half_width)?;
        let sum: f64 = (0..=i + self.half_width)
            .map(|j| self.entry(j, i) * pi.ratio(i, j))
            .sum();
        Ok((sum - 1.0).abs())
    }

    /// Detailed balance on rows `0..=i_max`, checked in the ratio form
    /// `|P(i, j) - P*(i, j)| <= tol`.
    pub fn is_reversible(&self, pi: &StationaryDist, i_max: usize, tol: f64) -> bool {
        self.detailed_balance_defect(pi, i_max)
            .is_ok_and(|defect| defect <= tol)
    }

    /// Largest `|P(i, j) - P*(i, j)|` over `i <= i_max`.
    pub fn detailed_balance_defect(&self, pi: &StationaryDist, i_max: usize) -> Result<f64> {
        let reach = self.reach(i_max);
        pi.check(reach)?;
        let mut worst: f64 = 0.0;
        for i in 0..=i_max {
            for j in 0..=reach {
                let forward = self.entry(i, j);
                let backward = pi.ratio(i, j) * self.entry(j, i);
                worst = worst.max((forward - backward).abs());
            }
        }
        Ok(worst)
    }
}

fn normalize_sparse_row(mut row: SparseRow) -> Result<SparseRow> {
    row.sort_by_key(|&(j, _)| j);
    if row.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidChain("duplicate column in boundary row".into()));
    }
    row.retain(|&(_, p)| p != 0.0);
    Ok(row)
}

/// Normalized stationary distribution of an irreducible stochastic matrix,
/// with its fixed-point residual checked against [`FIXED_POINT_TOL`].
pub fn stationary_of(m: &DenseMatrix) -> Result<StationaryDist> {
    let k = m.order();
    let pi = StationaryDist::from_log_weights(m.stationary_log_weights()?)?.normalized();
    // |(pi P)(j) - pi(j)|, evaluated through ratios
    let residual = (0..k)
        .map(|j| {
            let s: f64 = (0..k)
                .filter(|&i| m[(i, j)] != 0.0)
                .map(|i| m[(i, j)] * pi.ratio(j, i))
                .sum();
            (s - 1.0).abs() * pi.weight(j)
        })
        .fold(0.0, f64::max);
    if !(residual <= FIXED_POINT_TOL) {
        return Err(Error::SingularSystem(format!(
            "fixed-point residual {residual:e} exceeds {FIXED_POINT_TOL:e}"
        )));
    }
    Ok(pi)
}

impl fmt::Debug for BandChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BandChain")
            .field("half_width", &self.half_width)
            .field("boundary_cutoff", &self.boundary_cutoff)
            .field("boundary_rows", &self.boundary_rows)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    RowSum { state: usize, sum: f64 },
    EntryRange { state: usize, column: usize, value: f64 },
    Band { state: usize, column: usize },
    BelowZero { state: usize, mass: f64 },
    BandLength { state: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub rows_checked: usize,
    pub max_row_sum_deviation: f64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Invariant weights on a finite window `0..k`.
///
/// Weights are held as logarithms so that windows deep into a fast-decaying
/// tail do not underflow; everything downstream uses ratios.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryDist {
    log_weights: Vec<f64>,
    normalized: bool,
}

impl StationaryDist {
    /// Unnormalized weights. All must be strictly positive and finite.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w > 0.0 && w.is_finite()))
        {
            return Err(Error::ParameterDomain(format!(
                "stationary weight {i} is {w}, must be positive"
            )));
        }
        Self::from_log_weights(weights.iter().map(|w| w.ln()).collect())
    }

    pub fn from_log_weights(log_weights: Vec<f64>) -> Result<Self> {
        if log_weights.is_empty() {
            return Err(Error::ParameterDomain("empty stationary window".into()));
        }
        if let Some(i) = log_weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::SingularSystem(format!(
                "stationary weight {i} is not positive"
            )));
        }
        Ok(Self {
            log_weights,
            normalized: false,
        })
    }

    /// Weights built from successor ratios `pi(i+1)/pi(i)`, `i = 0..k-1`,
    /// starting at `pi(0) = 1`.
    pub fn from_ratios(k: usize, ratio: impl Fn(usize) -> f64) -> Result<Self> {
        let mut logw = Vec::with_capacity(k);
        let mut acc = 0.0;
        for i in 0..k {
            logw.push(acc);
            acc += ratio(i).ln();
        }
        Self::from_log_weights(logw)
    }

    pub fn normalized(mut self) -> Self {
        let total = crate::matrix::log_sum_exp(&self.log_weights);
        for w in &mut self.log_weights {
            *w -= total;
        }
        self.normalized = true;
        self
    }

    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.log_weights[i].exp()
    }

    pub fn log_weight(&self, i: usize) -> f64 {
        self.log_weights[i]
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|w| w.exp()).collect()
    }

    /// `pi(j) / pi(i)`.
    pub fn ratio(&self, i: usize, j: usize) -> f64 {
        (self.log_weights[j] - self.log_weights[i]).exp()
    }

    /// Lyapunov weight `V(i) = pi(i)^(-1/2)`.
    pub fn lyapunov(&self, i: usize) -> f64 {
        (-0.5 * self.log_weights[i]).exp()
    }

    pub(crate) fn check(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::OutOfWindow {
                state: i,
                window: self.len(),
            })
        }
    }
}
