//! Geometric convergence rates of band Markov chains in `l2(pi)`.
//!
//! The crate computes the essential-spectral-radius bound `alpha0` from the
//! asymptotic increment law of a chain, checks the matching drift inequality,
//! and estimates the convergence rate itself from the subdominant eigenvalues
//! of truncated-augmented kernels.
//!
//! ```
//! use specgap_core::{models, spectral};
//!
//! let profile = models::two_down_one_up_profile();
//! let tau = spectral::solve_tau(&profile).unwrap();
//! let alpha0 = spectral::alpha0_from_profile(&profile, tau).unwrap();
//! assert!((alpha0.value - 0.6242).abs() < 1e-4);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod band_chain;
pub mod eigen;
pub mod error;
pub mod matrix;
pub mod models;
pub mod spectral;
pub mod truncation;

pub use band_chain::{BandChain, SparseRow, StationaryDist, ValidationReport, Violation};
pub use error::{Error, Result};
pub use matrix::DenseMatrix;
pub use spectral::{Alpha0Method, Alpha0Result, DriftCertificate, LimitProfile};
pub use truncation::{EstimateOptions, RateEstimate, Verdict};
