mod common;

use common::strategies::{any_family, dominant_weighted, total_effort, with_point};
use idsgame::solvers::{
    best_response, closed_form, price_of_anarchy, projected_kkt_residual, solve_social_optimum,
    solve_unregulated_ne, verify_ne, SolverConfig,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn best_response_lies_within_the_strategy_bound(
        (spec, x) in with_point(any_family(1..=8), 5.0),
        i in 0usize..8,
    ) {
        let i = i % spec.n();
        let br = best_response(&spec, i, &x, &SolverConfig::default()).unwrap();
        prop_assert!(br >= 0.0);
        prop_assert!(br <= spec.strategy_bound(0.01).unwrap());
    }

    #[test]
    fn best_response_matches_closed_form(
        (spec, x) in with_point(total_effort(2..=6), 3.0),
        i in 0usize..6,
    ) {
        let i = i % spec.n();
        let br = best_response(&spec, i, &x, &SolverConfig::default()).unwrap();
        let others: f64 = x.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).sum();
        let cf = closed_form::best_response(&spec, i, others).unwrap();
        prop_assert!((br - cf).abs() <= 1e-9, "{br} vs {cf}");
    }

    #[test]
    fn price_of_anarchy_is_at_least_one(spec in total_effort(2..=8)) {
        let cfg = SolverConfig::default();
        let ne = solve_unregulated_ne(&spec, &cfg).unwrap();
        let opt = solve_social_optimum(&spec, &cfg).unwrap();
        let rho = price_of_anarchy(&spec, &ne.profile, &opt.profile).unwrap();
        prop_assert!(rho >= 1.0 - 1e-12);
        let cf = closed_form::price_of_anarchy(&spec).unwrap();
        prop_assert!((rho - cf).abs() <= 1e-8, "{rho} vs {cf}");
    }

    #[test]
    fn solved_equilibrium_certifies(
        spec in prop_oneof![total_effort(1..=6), dominant_weighted(1..=6)],
    ) {
        let cfg = SolverConfig::default();
        let ne = solve_unregulated_ne(&spec, &cfg).unwrap();
        prop_assert!(ne.converged);
        prop_assert!(verify_ne(&spec, &ne.profile, &cfg).unwrap() <= cfg.certify_tol);
    }

    #[test]
    fn convergence_is_never_claimed_without_certification(spec in any_family(1..=6)) {
        let cfg = SolverConfig { max_iter: 2_000, ..Default::default() };
        let ne = solve_unregulated_ne(&spec, &cfg).unwrap();
        let dev = verify_ne(&spec, &ne.profile, &cfg).unwrap();
        prop_assert_eq!(dev, ne.max_deviation);
        if ne.converged {
            prop_assert!(dev <= cfg.certify_tol, "converged with gain {}", dev);
        }
    }

    #[test]
    fn optimum_satisfies_kkt(spec in any_family(1..=6)) {
        let cfg = SolverConfig::default();
        let opt = solve_social_optimum(&spec, &cfg).unwrap();
        prop_assert!(opt.converged);
        prop_assert!(projected_kkt_residual(&spec, &opt.profile).unwrap() <= cfg.kkt_tol);
        prop_assert!(opt.profile.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn equilibrium_under_invests(spec in total_effort(2..=8)) {
        let cfg = SolverConfig::default();
        let ne = solve_unregulated_ne(&spec, &cfg).unwrap();
        let opt = solve_social_optimum(&spec, &cfg).unwrap();
        prop_assert!(ne.profile.total() <= opt.profile.total() + 1e-9);
        let g_ne = spec.social_cost(&ne.profile).unwrap();
        let g_opt = spec.social_cost(&opt.profile).unwrap();
        prop_assert!(g_opt <= g_ne + 1e-12);
    }
}

#[test]
fn s1_closed_forms() {
    let cfg = SolverConfig::default();
    let spec = common::s1();
    let ne = solve_unregulated_ne(&spec, &cfg).unwrap();
    let opt = solve_social_optimum(&spec, &cfg).unwrap();
    assert!((ne.profile[0] - 2f64.ln()).abs() <= 1e-9);
    assert!((opt.profile[0] - 10f64.ln()).abs() <= 1e-9);
    assert!(ne.profile[1..]
        .iter()
        .chain(&opt.profile[1..])
        .all(|v| *v == 0.0));
    let rho = price_of_anarchy(&spec, &ne.profile, &opt.profile).unwrap();
    assert!((rho - 1.7238457209284719).abs() <= 1e-12);
    assert!((rho - closed_form::unit_price_of_anarchy(5, 0.5)).abs() <= 1e-12);
}

#[test]
fn nobody_invests_when_effort_is_dear() {
    let cfg = SolverConfig::default();
    let spec = idsgame::game::GameSpec::total_effort(vec![10.0, 20.0, 30.0], 1.0, 1.0).unwrap();
    let ne = solve_unregulated_ne(&spec, &cfg).unwrap();
    let opt = solve_social_optimum(&spec, &cfg).unwrap();
    assert_eq!(
        price_of_anarchy(&spec, &ne.profile, &opt.profile).unwrap(),
        1.0
    );
}
