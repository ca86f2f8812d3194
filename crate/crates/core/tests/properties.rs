mod common;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use specgap_core::eigen::eigenvalues;
use specgap_core::models::{
    bdmc_chain, bdmc_stationary, mh_chain, mh_limit_profile, proposal_rw, two_down_one_up,
    BdmcSpec, TargetRatios,
};
use specgap_core::spectral::{alpha0_from_profile, psi, solve_tau, LimitProfile};
use specgap_core::truncation::{rho_k, truncate};
use specgap_core::DenseMatrix;

fn profile_strategy() -> impl Strategy<Value = LimitProfile> {
    (1usize..=3)
        .prop_flat_map(|n| prop::collection::vec(0.0f64..1.0, 2 * n + 1))
        .prop_map(|raw| {
            let total: f64 = raw.iter().sum::<f64>() + 1e-3;
            let mut c: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let mid = c.len() / 2;
            let rest: f64 = c.iter().sum();
            c[mid] += 1.0 - rest;
            LimitProfile::new(c).unwrap()
        })
}

proptest! {
    #[test]
    fn tau_is_a_root_below_one(prof in profile_strategy()) {
        if let Ok(tau) = solve_tau(&prof) {
            prop_assert!(tau > 0.0 && tau < 1.0);
            prop_assert!((psi(&prof, tau).unwrap() - 1.0).abs() < 1e-9);
            // alpha0 never exceeds 1 when tau is a genuine sub-unit root
            prop_assert!(alpha0_from_profile(&prof, tau).unwrap().value <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn mh_profile_is_balanced(q in 0.01f64..0.5, tau in 0.01f64..0.99) {
        let prof = mh_limit_profile(&[q, 1.0 - 2.0 * q, q], tau).unwrap();
        let sum: f64 = prof.coefficients().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!((prof.a(1) - tau * prof.a(-1)).abs() < 1e-15);
        prop_assert!((solve_tau(&prof).unwrap() - tau).abs() < 1e-10);
    }

    #[test]
    fn mh_chains_stay_band_and_stochastic(q in 0.05f64..0.5, r in 0.05f64..0.95, tau in 0.05f64..0.95) {
        let target = TargetRatios::linear_geometric(tau).unwrap();
        let proposal = proposal_rw(r, q).unwrap();
        let chain = mh_chain(&target, &proposal).unwrap();
        prop_assert_eq!(chain.half_width(), 1);
        prop_assert!(chain.validate(120).is_valid());
        let pi = target.stationary(121).unwrap();
        prop_assert!(chain.is_reversible(&pi, 119, 1e-12));
    }

    #[test]
    fn bdmc_balance(p in 0.35f64..0.9, frac in 0.0f64..0.9, r0 in 0.01f64..0.99) {
        let q = (1.0 - p) * frac * 0.99;
        prop_assume!(q > 1e-3 && p > q);
        let spec = BdmcSpec::constant(p, 1.0 - p - q, q, r0).unwrap();
        let chain = bdmc_chain(&spec).unwrap();
        let pi = bdmc_stationary(&spec, 150).unwrap();
        prop_assert!(chain.detailed_balance_defect(&pi, 148).unwrap() < 1e-12);
    }

    #[test]
    fn rho_k_is_a_modulus_below_one(a in 0.01f64..0.99, b in 0.01f64..0.99, k in 3usize..60) {
        let rho = rho_k(&truncate(&two_down_one_up(a, b).unwrap(), k)).unwrap();
        prop_assert!((0.0..1.0).contains(&rho));
    }
}

#[test]
fn eigenvalues_match_polynomial_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for trial in 0..300 {
        let n = 1 + trial % 4;
        let rows = common::random_stochastic(&mut rng, n);
        let ours = eigenvalues(&DenseMatrix::from_rows(&rows).unwrap())
            .unwrap()
            .eigenvalues;
        let oracle = common::poly_roots(&common::char_poly(&rows));
        assert!(common::matching_distance(&ours, &oracle) < 1e-8, "trial {trial}: {rows:?}");
    }
}

#[test]
fn char_poly_of_companion() {
    // roots 0.5, -0.25, 0.1
    let rows = vec![
        vec![0.35, 0.075, -0.0125],
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
    ];
    let c = common::char_poly(&rows);
    assert_abs_diff_eq!(c[3], 1.0);
    assert_abs_diff_eq!(c[2], -0.35, epsilon = 1e-15);
    assert_abs_diff_eq!(c[1], -0.075, epsilon = 1e-15);
    assert_abs_diff_eq!(c[0], 0.0125, epsilon = 1e-15);
}
