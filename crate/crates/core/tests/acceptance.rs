//! Acceptance suite. Prints one PASS/FAIL line per criterion, followed by
//! indented detail, and exits nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use specgap_core::band_chain::{stationary_of, BandChain, StationaryDist};
use specgap_core::eigen::eigenvalues;
use specgap_core::models::{
    bdmc_chain, bdmc_rate_bound, bdmc_stationary, mh_chain, mh_limit_profile, proposal_rw,
    two_down_one_up, two_down_one_up_profile, BdmcCase, BdmcSpec, TargetRatios,
};
use specgap_core::spectral::{
    alpha0_from_profile, alpha0_reversible, drift_constants, psi, solve_tau, LimitProfile,
};
use specgap_core::truncation::{estimate_rho2, truncate};
use specgap_core::{DenseMatrix, EstimateOptions, Error, RateEstimate, Verdict};

struct Report {
    lines: Vec<String>,
    ok: bool,
}

impl Report {
    fn new() -> Self {
        Self {
            lines: Vec::new(),
            ok: true,
        }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.ok &= ok;
        self.lines.push(format!("{} {line}", if ok { "ok  " } else { "MISS" }));
    }

    fn note(&mut self, line: String) {
        self.lines.push(format!("     {line}"));
    }
}

fn run(id: usize, title: &str, f: impl FnOnce(&mut Report)) -> bool {
    let mut r = Report::new();
    let start = Instant::now();
    f(&mut r);
    let elapsed = start.elapsed();
    println!(
        "{} [{id}] {title} ({:.2} s)",
        if r.ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    for l in &r.lines {
        println!("       {l}");
    }
    r.ok
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn describe(est: &RateEstimate) -> String {
    format!(
        "{} rho_{} = {:.6} (alpha0 = {:.6})",
        est.verdict.label(),
        est.k_final,
        est.rho_final,
        est.alpha0
    )
}

fn criterion_1(r: &mut Report) {
    let ((tau, alpha0), elapsed) = timed(|| {
        let prof = two_down_one_up_profile();
        let tau = solve_tau(&prof).unwrap();
        (tau, alpha0_from_profile(&prof, tau).unwrap().value)
    });
    let exact = (37f64.sqrt() - 5.0) / 6.0;
    r.check(
        (tau - exact).abs() <= 1e-10,
        format!("tau = {tau:.15}, (sqrt 37 - 5)/6 = {exact:.15}"),
    );
    r.check(
        (alpha0 - 0.6242).abs() <= 5e-5,
        format!("alpha0 = {alpha0:.6}, published 0.6242"),
    );
    r.check(
        elapsed < Duration::from_millis(100),
        format!("runtime {:.3} ms", elapsed.as_secs_f64() * 1e3),
    );
}

fn walk_alpha0() -> f64 {
    let prof = two_down_one_up_profile();
    alpha0_from_profile(&prof, solve_tau(&prof).unwrap()).unwrap().value
}

fn criterion_2(r: &mut Report) {
    let alpha0 = walk_alpha0();
    let opts = EstimateOptions::default();
    let start = Instant::now();
    for (a, expected) in [(0.1, 0.688), (0.02, 0.757)] {
        let est = estimate_rho2(&two_down_one_up(a, a).unwrap(), alpha0, &opts).unwrap();
        let ok = matches!(est.verdict, Verdict::PointEstimate(v) if (v - expected).abs() <= 1e-3);
        r.check(ok, format!("(a, b) = ({a}, {a}): {}, published {expected}", describe(&est)));
    }
    let est = estimate_rho2(&two_down_one_up(0.5, 0.5).unwrap(), alpha0, &opts).unwrap();
    let ok = matches!(est.verdict, Verdict::UpperBound(_))
        && est.stabilized
        && est.rho_final <= 0.624 + 1e-3;
    r.check(
        ok,
        format!("(a, b) = (1/2, 1/2): {}, published <= 0.624", describe(&est)),
    );
    let elapsed = start.elapsed();
    r.check(
        elapsed < Duration::from_secs(5),
        format!("runtime {:.2} s", elapsed.as_secs_f64()),
    );
}

fn mh_linear_geometric(tau: f64, q: f64) -> (BandChain, f64) {
    let target = TargetRatios::linear_geometric(tau).unwrap();
    let proposal = proposal_rw(0.5, q).unwrap();
    let chain = mh_chain(&target, &proposal).unwrap();
    let prof = mh_limit_profile(proposal.limits().unwrap(), tau).unwrap();
    let alpha0 = alpha0_from_profile(&prof, tau).unwrap().value;
    (chain, alpha0)
}

/// `(tau, q, alpha0, rho)` as published; `rho` is an upper bound for the
/// starred cell.
const TABLE_2: [(f64, f64, f64, f64); 20] = [
    (0.2, 0.1, 0.9694, 0.9710),
    (0.2, 0.2, 0.9389, 0.9421),
    (0.2, 0.3, 0.9083, 0.9131),
    (0.2, 0.4, 0.8778, 0.8842),
    (0.2, 0.5, 0.8472, 0.8552),
    (0.5, 0.1, 0.9914, 0.9921),
    (0.5, 0.2, 0.9828, 0.9842),
    (0.5, 0.3, 0.9743, 0.9763),
    (0.5, 0.4, 0.9657, 0.9684),
    (0.5, 0.5, 0.9571, 0.9605),
    (0.6, 0.1, 0.9949, 0.9953),
    (0.6, 0.2, 0.9898, 0.9906),
    (0.6, 0.3, 0.9848, 0.9860),
    (0.6, 0.4, 0.9797, 0.9814),
    (0.6, 0.5, 0.9746, 0.9767),
    (0.8, 0.1, 0.99889, 0.99889),
    (0.8, 0.2, 0.99777, 0.99781),
    (0.8, 0.3, 0.99666, 0.9968),
    (0.8, 0.4, 0.99554, 0.99579),
    (0.8, 0.5, 0.99443, 0.9948),
];

fn criterion_3(r: &mut Report) {
    let opts = EstimateOptions::default();
    let start = Instant::now();
    for &(tau, q, alpha_pub, rho_pub) in &TABLE_2 {
        let (chain, alpha0) = mh_linear_geometric(tau, q);
        let closed = 1.0 - q * (1.0 - tau.sqrt()).powi(2);
        let alpha_ok = (alpha0 - closed).abs() <= 1e-12 && (alpha0 - alpha_pub).abs() <= 5e-5;
        let est = estimate_rho2(&chain, alpha0, &opts).unwrap();
        let rho_ok = if tau == 0.8 && q == 0.1 {
            matches!(est.verdict, Verdict::UpperBound(_)) && est.stabilized && est.rho_final < alpha0
        } else {
            matches!(est.verdict, Verdict::PointEstimate(v) if (v - rho_pub).abs() <= 1e-3)
        };
        r.check(
            alpha_ok && rho_ok,
            format!(
                "tau = {tau}, q = {q}: alpha0 = {alpha0:.6} (closed form {closed:.6}), {}, published {rho_pub}",
                describe(&est)
            ),
        );
    }
    let elapsed = start.elapsed();
    r.check(
        elapsed < Duration::from_secs(30),
        format!("runtime {:.2} s", elapsed.as_secs_f64()),
    );
}

const TABLE_3: [(f64, f64); 6] = [
    (0.1, 0.9003),
    (0.2, 0.8008),
    (0.3, 0.7015),
    (0.38, 0.6301),
    (0.4, 0.6568),
    (0.5, 0.8090),
];

fn criterion_4(r: &mut Report) {
    let opts = EstimateOptions::default();
    let target = TargetRatios::poisson(1.0).unwrap();
    let start = Instant::now();
    let mut rhos = Vec::new();
    for &(q, rho_pub) in &TABLE_3 {
        let proposal = proposal_rw(0.5, q).unwrap();
        let chain = mh_chain(&target, &proposal).unwrap();
        let prof = mh_limit_profile(proposal.limits().unwrap(), 0.0).unwrap();
        let alpha0 = alpha0_from_profile(&prof, 0.0).unwrap().value;
        let alpha_ok = (alpha0 - (1.0 - q)).abs() <= 1e-12;
        let est = estimate_rho2(&chain, alpha0, &opts).unwrap();
        rhos.push(est.rho_final);
        let rho_ok = est.stabilized && (est.rho_final - rho_pub).abs() <= 1e-3;
        r.check(
            alpha_ok && rho_ok,
            format!(
                "q = {q}: alpha0 = {alpha0:.6}, {}, published {rho_pub}, delta {:+.4}",
                describe(&est),
                est.rho_final - rho_pub
            ),
        );
    }
    let argmin = rhos
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| TABLE_3[i].0)
        .unwrap();
    r.check(
        argmin == 0.38,
        format!("minimum over the grid attained at q = {argmin}, published q = 0.38"),
    );
    let elapsed = start.elapsed();
    r.check(
        elapsed < Duration::from_secs(60),
        format!("runtime {:.2} s", elapsed.as_secs_f64()),
    );
}

fn criterion_5(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut worst_match, mut worst_perron) = (0.0f64, 0.0f64);
    let mut failures = 0;
    for trial in 0..100 {
        let n = 1 + trial % 4;
        let rows = common::random_stochastic(&mut rng, n);
        let m = DenseMatrix::from_rows(&rows).unwrap();
        let ours = eigenvalues(&m).unwrap().eigenvalues;
        let oracle = common::poly_roots(&common::char_poly(&rows));
        let d = common::matching_distance(&ours, &oracle);
        let perron = ours
            .iter()
            .map(|z| (z - 1.0).norm())
            .fold(f64::INFINITY, f64::min);
        worst_match = worst_match.max(d);
        worst_perron = worst_perron.max(perron);
        if d > 1e-8 || perron > 1e-8 {
            failures += 1;
        }
    }
    r.check(
        failures == 0,
        format!(
            "100 matrices, worst eigenvalue mismatch {worst_match:.2e}, worst Perron gap {worst_perron:.2e}"
        ),
    );
}

fn random_profile<R: Rng>(rng: &mut R) -> LimitProfile {
    let n = rng.gen_range(1..=4);
    let raw: Vec<f64> = (0..2 * n + 1)
        .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..1.0) })
        .collect();
    let total: f64 = raw.iter().sum::<f64>() + 1e-3;
    let mut coeffs: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let rest: f64 = coeffs.iter().sum();
    coeffs[n] += 1.0 - rest;
    LimitProfile::new(coeffs).unwrap()
}

fn reversible_profile<R: Rng>(rng: &mut R) -> (LimitProfile, f64) {
    let n: usize = rng.gen_range(1..=3);
    let tau: f64 = rng.gen_range(0.05..0.95);
    let mut coeffs = vec![0.0; 2 * n + 1];
    let budget = rng.gen_range(0.2..0.9);
    let back: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let scale: f64 = back.iter().sum::<f64>();
    for m in 1..=n {
        let down = budget * back[m - 1] / scale / 2.0;
        coeffs[n - m] = down;
        coeffs[n + m] = tau.powi(m as i32) * down;
    }
    // the band needs a positive forward coefficient to define tau
    if coeffs[n + 1..].iter().all(|&c| c == 0.0) {
        coeffs[n - 1] = 0.1;
        coeffs[n + 1] = 0.1 * tau;
    }
    coeffs[n] = 1.0 - coeffs.iter().sum::<f64>();
    (LimitProfile::new(coeffs).unwrap(), tau)
}

fn mh_family() -> Vec<(String, BandChain, StationaryDist)> {
    let mut out = Vec::new();
    for q in [0.1, 0.25, 0.38, 0.5] {
        let target = TargetRatios::poisson(1.0).unwrap();
        let chain = mh_chain(&target, &proposal_rw(0.5, q).unwrap()).unwrap();
        out.push((format!("M-H Poisson(1), q = {q}"), chain, target.stationary(201).unwrap()));
        for tau in [0.2, 0.8] {
            let target = TargetRatios::linear_geometric(tau).unwrap();
            let chain = mh_chain(&target, &proposal_rw(0.3, q).unwrap()).unwrap();
            out.push((
                format!("M-H linear-geometric({tau}), q = {q}"),
                chain,
                target.stationary(201).unwrap(),
            ));
        }
    }
    out
}

fn bdmc_family() -> Vec<(String, BandChain, StationaryDist)> {
    [(0.6, 0.1, 0.3, 0.5), (0.8, 0.1, 0.1, 0.05), (0.5, 0.3, 0.2, 0.9)]
        .into_iter()
        .map(|(p, r, q, r0)| {
            let spec = BdmcSpec::constant(p, r, q, r0).unwrap();
            (
                format!("BDMC p = {p}, r = {r}, q = {q}, r0 = {r0}"),
                bdmc_chain(&spec).unwrap(),
                bdmc_stationary(&spec, 201).unwrap(),
            )
        })
        .collect()
}

fn criterion_6(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);

    let mut worst_one = 0.0f64;
    let mut convex_violations = 0;
    for _ in 0..1000 {
        let prof = random_profile(&mut rng);
        worst_one = worst_one.max((psi(&prof, 1.0).unwrap() - 1.0).abs());
        for _ in 0..5 {
            let (s, t) = (rng.gen_range(0.05..3.0), rng.gen_range(0.05..3.0));
            let lam: f64 = rng.gen_range(0.0..1.0);
            let mid = psi(&prof, lam * s + (1.0 - lam) * t).unwrap();
            let chord = lam * psi(&prof, s).unwrap() + (1.0 - lam) * psi(&prof, t).unwrap();
            if mid > chord + 1e-12 * chord.abs().max(1.0) {
                convex_violations += 1;
            }
        }
    }
    r.check(
        worst_one <= 1e-12 && convex_violations == 0,
        format!("1000 profiles: max |psi(1) - 1| = {worst_one:.1e}, {convex_violations} convexity violations"),
    );

    let mut worst_rev = 0.0f64;
    for _ in 0..1000 {
        let (prof, _) = reversible_profile(&mut rng);
        let solved = solve_tau(&prof).unwrap();
        let a = alpha0_from_profile(&prof, solved).unwrap().value;
        let b = alpha0_reversible(&prof).value;
        worst_rev = worst_rev.max((a - b).abs());
    }
    r.check(
        worst_rev <= 1e-12,
        format!("1000 reversible profiles: max |alpha0 profile - alpha0 reversible| = {worst_rev:.1e}"),
    );

    let mut worst_db = 0.0f64;
    let mut chains = mh_family();
    chains.extend(bdmc_family());
    for (_, chain, pi) in &chains {
        worst_db = worst_db.max(chain.detailed_balance_defect(pi, 199).unwrap());
    }
    r.check(
        worst_db <= 1e-12,
        format!("{} M-H and birth-death chains, window 200: max detailed-balance defect {worst_db:.1e}", chains.len()),
    );

    let mut worst_row = 0.0f64;
    let mut negative = false;
    let mut stoch_chains: Vec<BandChain> = chains.iter().map(|c| c.1.clone()).collect();
    stoch_chains.push(two_down_one_up(0.1, 0.1).unwrap());
    stoch_chains.push(two_down_one_up(0.5, 0.5).unwrap());
    for chain in &stoch_chains {
        for k in 2..=200 {
            let m = truncate(chain, k);
            worst_row = worst_row.max(m.max_row_sum_deviation());
            negative |= !m.is_stochastic(1e-12);
        }
    }
    r.check(
        worst_row <= 1e-12 && !negative,
        format!("truncations k = 2..200 of {} chains: max row-sum deviation {worst_row:.1e}", stoch_chains.len()),
    );

    let mut drift_lines = Vec::new();
    let mut drift_ok = true;
    let walk = two_down_one_up(0.1, 0.1).unwrap();
    let walk_pi = stationary_of(&truncate(&walk, 400)).unwrap();
    let families: Vec<(String, BandChain, StationaryDist, f64)> = vec![
        ("random walk (a, b) = (1/10, 1/10)".into(), walk, walk_pi, walk_alpha0()),
        {
            let spec = BdmcSpec::constant(0.6, 0.1, 0.3, 0.5).unwrap();
            let alpha0 = alpha0_reversible(&LimitProfile::new(vec![0.6, 0.1, 0.3]).unwrap()).value;
            ("BDMC (0.6, 0.1, 0.3)".into(), bdmc_chain(&spec).unwrap(), bdmc_stationary(&spec, 400).unwrap(), alpha0)
        },
        {
            let (chain, alpha0) = mh_linear_geometric(0.5, 0.3);
            let pi = TargetRatios::linear_geometric(0.5).unwrap().stationary(400).unwrap();
            ("M-H linear-geometric(0.5), q = 0.3".into(), chain, pi, alpha0)
        },
    ];
    for (name, chain, pi, alpha0) in &families {
        let above = drift_constants(chain, pi, alpha0 + 0.05, 300);
        let below = drift_constants(chain, pi, alpha0 - 0.05, 300);
        let ok = above.is_ok() && matches!(below, Err(Error::DriftViolatedAtTail { .. }));
        drift_ok &= ok;
        drift_lines.push(format!(
            "{name}: alpha0 + 0.05 {}, alpha0 - 0.05 {}",
            match &above {
                Ok(c) => format!("certified (L = {:.3e})", c.constant),
                Err(e) => format!("failed ({e})"),
            },
            match &below {
                Ok(_) => "certified".to_string(),
                Err(e) => format!("rejected ({e})"),
            }
        ));
    }
    r.check(drift_ok, "drift certificates on three model families".into());
    for l in drift_lines {
        r.note(l);
    }
}

fn criterion_7(r: &mut Report) {
    let cases = [
        ((0.5, 0.2, 0.3, 0.95), BdmcCase::HighBoundary),
        ((0.5, 0.2, 0.3, 0.1), BdmcCase::LowBoundaryWeakDrift),
        ((0.8, 0.1, 0.1, 0.05), BdmcCase::Exact),
        ((0.8, 0.1, 0.1, 0.4), BdmcCase::Intermediate),
    ];
    for ((p, q, rr, r0), want) in cases {
        let b = bdmc_rate_bound(p, q, rr, r0).unwrap();
        let generic = rr + 2.0 * (p * q).sqrt();
        let value_ok = if want == BdmcCase::Exact {
            b.is_exact
        } else {
            !b.is_exact && (b.value - generic).abs() <= 1e-15
        };
        r.check(
            b.case == want && value_ok,
            format!("(p, q, r, r0) = ({p}, {q}, {rr}, {r0}): {:?}, value {:.6}", b.case, b.value),
        );
    }
    let b = bdmc_rate_bound(0.5, 0.2, 0.3, 0.95).unwrap();
    r.check(
        (b.value - 0.93246).abs() <= 5e-6,
        format!("(0.5, 0.2, 0.3) high boundary bound {:.6}, expected 0.93246", b.value),
    );

    let opts = EstimateOptions::default();
    let mut agree = 0;
    let points = [
        (0.8, 0.1, 0.1, 0.05),
        (0.8, 0.1, 0.1, 0.15),
        (0.8, 0.1, 0.1, 0.25),
        (0.85, 0.05, 0.1, 0.1),
    ];
    for (p, q, rr, r0) in points {
        let b = bdmc_rate_bound(p, q, rr, r0).unwrap();
        let spec = BdmcSpec::constant(p, rr, q, r0).unwrap();
        let alpha0 = alpha0_reversible(&LimitProfile::new(vec![p, rr, q]).unwrap()).value;
        let est = estimate_rho2(&bdmc_chain(&spec).unwrap(), alpha0, &opts).unwrap();
        let ok = b.is_exact
            && matches!(est.verdict, Verdict::PointEstimate(v) if (v - b.value).abs() <= 1e-3);
        agree += ok as usize;
        r.note(format!(
            "(p, q, r, r0) = ({p}, {q}, {rr}, {r0}): closed form {:.6} ({:?}), truncation {}",
            b.value,
            b.case,
            describe(&est)
        ));
    }
    r.check(
        agree >= 3,
        format!("{agree} of {} exact-branch points agree within 1e-3", points.len()),
    );
}

fn main() -> ExitCode {
    let results = [
        run(1, "two-down-one-up walk: tau and alpha0", criterion_1),
        run(2, "random walk rates by truncation", criterion_2),
        run(3, "M-H linear-geometric target grid", criterion_3),
        run(4, "M-H Poisson target, proposal sweep", criterion_4),
        run(5, "eigenvalues against characteristic-polynomial roots", criterion_5),
        run(6, "property suites", criterion_6),
        run(7, "birth-death closed-form bounds", criterion_7),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
