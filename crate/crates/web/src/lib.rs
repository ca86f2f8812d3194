//! Browser bindings for the demo page in `www/`.
//!
//! Every export returns a JSON string; the page parses it with `JSON.parse`.
//! The plain functions behind the exports are usable (and tested) natively.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::Serialize;
use wasm_bindgen::prelude::*;

use specgap_core::eigen::eigenvalues;
use specgap_core::models::{mh_chain, mh_limit_profile, proposal_rw, two_down_one_up, TargetRatios};
use specgap_core::spectral::{alpha0_from_profile, psi, solve_tau, LimitProfile};
use specgap_core::truncation::{estimate_rho2, rho_k, truncate};
use specgap_core::{BandChain, EstimateOptions, Error, Result};

/// Largest truncation the page may request; keeps one eigensolve well under
/// a frame budget.
pub const MAX_ORDER: usize = 160;

#[derive(Debug, Serialize)]
pub struct ProfileCurve {
    pub t: Vec<f64>,
    pub psi: Vec<f64>,
    pub tau: Option<f64>,
    pub alpha0: Option<f64>,
    pub drift: f64,
}

/// `psi` sampled on `samples` points of `[t_min, t_max]`, with `tau` and
/// `alpha0` when the profile has a negative drift.
pub fn profile_curve(coeffs: &[f64], t_min: f64, t_max: f64, samples: usize) -> Result<ProfileCurve> {
    let sum: f64 = coeffs.iter().sum();
    if !(sum > 0.0) {
        return Err(Error::InvalidCoefficients("all coefficients are zero".into()));
    }
    let normalized: Vec<f64> = coeffs.iter().map(|c| c / sum).collect();
    let profile = LimitProfile::new(normalized)?;
    if !(t_min > 0.0 && t_max > t_min) || samples < 2 {
        return Err(Error::ParameterDomain("need 0 < t_min < t_max and at least 2 samples".into()));
    }
    let t: Vec<f64> = (0..samples)
        .map(|i| t_min + (t_max - t_min) * i as f64 / (samples - 1) as f64)
        .collect();
    let values = t.iter().map(|&x| psi(&profile, x)).collect::<Result<Vec<_>>>()?;
    let (_, drift) = specgap_core::spectral::neri(&profile);
    let tau = match solve_tau(&profile) {
        Ok(tau) => Some(tau),
        Err(Error::DegenerateTailZero) => Some(0.0),
        Err(_) => None,
    };
    let alpha0 = tau.and_then(|tau| alpha0_from_profile(&profile, tau).ok().map(|a| a.value));
    Ok(ProfileCurve {
        t,
        psi: values,
        tau,
        alpha0,
        drift,
    })
}

/// Demo chains: `walk` (a, b), `mh-poisson` (q), `mh-linear-geometric`
/// (q, tau). Returns the chain and its `alpha0`.
pub fn demo_chain(kind: &str, x: f64, y: f64) -> Result<(BandChain, f64)> {
    match kind {
        "walk" => {
            let chain = two_down_one_up(x, y)?;
            let profile = specgap_core::models::two_down_one_up_profile();
            let alpha0 = alpha0_from_profile(&profile, solve_tau(&profile)?)?.value;
            Ok((chain, alpha0))
        }
        "mh-poisson" => {
            let proposal = proposal_rw(0.5, x)?;
            let chain = mh_chain(&TargetRatios::poisson(1.0)?, &proposal)?;
            let profile = mh_limit_profile(&[x, 1.0 - 2.0 * x, x], 0.0)?;
            Ok((chain, alpha0_from_profile(&profile, 0.0)?.value))
        }
        "mh-linear-geometric" => {
            let proposal = proposal_rw(0.5, x)?;
            let chain = mh_chain(&TargetRatios::linear_geometric(y)?, &proposal)?;
            let profile = mh_limit_profile(&[x, 1.0 - 2.0 * x, x], y)?;
            Ok((chain, alpha0_from_profile(&profile, y)?.value))
        }
        other => Err(Error::InvalidChain(format!("unknown demo chain {other:?}"))),
    }
}

#[derive(Debug, Serialize)]
pub struct TruncationSpectrum {
    pub k: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub rho_k: f64,
    pub alpha0: f64,
}

/// Eigenvalues of the order-`k` truncation.
pub fn truncation_spectrum(kind: &str, x: f64, y: f64, k: usize) -> Result<TruncationSpectrum> {
    if !(2..=MAX_ORDER).contains(&k) {
        return Err(Error::MatrixTooLarge {
            order: k,
            cap: MAX_ORDER,
        });
    }
    let (chain, alpha0) = demo_chain(kind, x, y)?;
    let m = truncate(&chain, k);
    // the raw matrix is fine for plotting; rho_k uses the better-conditioned path
    let spectrum = eigenvalues(&m)?;
    Ok(TruncationSpectrum {
        k,
        re: spectrum.eigenvalues.iter().map(|z| z.re).collect(),
        im: spectrum.eigenvalues.iter().map(|z| z.im).collect(),
        rho_k: rho_k(&m)?,
        alpha0,
    })
}

#[derive(Debug, Serialize)]
pub struct Trajectory {
    pub k: Vec<usize>,
    pub rho: Vec<f64>,
    pub alpha0: f64,
    pub verdict: String,
    pub value: Option<f64>,
}

/// `rho_k` for `k = 2..` until it settles or `k_max` is reached.
pub fn rho_trajectory(kind: &str, x: f64, y: f64, k_max: usize) -> Result<Trajectory> {
    let (chain, alpha0) = demo_chain(kind, x, y)?;
    let opts = EstimateOptions {
        k_max: k_max.clamp(3, MAX_ORDER),
        ..EstimateOptions::default()
    };
    let est = estimate_rho2(&chain, alpha0, &opts)?;
    Ok(Trajectory {
        k: est.trajectory.iter().map(|p| p.0).collect(),
        rho: est.trajectory.iter().map(|p| p.1).collect(),
        alpha0,
        verdict: est.verdict.label().to_string(),
        value: est.verdict.value(),
    })
}

fn to_js<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsValue> {
    match r {
        Ok(v) => serde_json::to_string(&v).map_err(|e| JsValue::from_str(&e.to_string())),
        Err(e) => Err(JsValue::from_str(&e.to_string())),
    }
}

#[wasm_bindgen(js_name = profileCurve)]
pub fn profile_curve_js(coeffs: Vec<f64>, t_min: f64, t_max: f64, samples: usize) -> std::result::Result<String, JsValue> {
    to_js(profile_curve(&coeffs, t_min, t_max, samples))
}

#[wasm_bindgen(js_name = truncationSpectrum)]
pub fn truncation_spectrum_js(kind: &str, x: f64, y: f64, k: usize) -> std::result::Result<String, JsValue> {
    to_js(truncation_spectrum(kind, x, y, k))
}

#[wasm_bindgen(js_name = rhoTrajectory)]
pub fn rho_trajectory_js(kind: &str, x: f64, y: f64, k_max: usize) -> std::result::Result<String, JsValue> {
    to_js(rho_trajectory(kind, x, y, k_max))
}
