mod common;

use common::oracles::*;
use common::*;
use gridedge::linalg::Matrix;
use gridedge::recover::*;
use gridedge::Error;
use nalgebra::SymmetricEigen;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn svt_satisfies_subgradient_condition(m in matrix(6, 9, 10.0), tau in 0.0..8.0f64) {
        let y = prox_nuclear(&m, tau).unwrap();
        prop_assert!(nuclear_subgradient_residual(&m, &y, tau) <= 1e-8);
    }

    #[test]
    fn nuclear_norm_matches_eigen_oracle(m in matrix(6, 9, 10.0)) {
        let e = SymmetricEigen::new(m.transpose() * &m);
        let oracle: f64 = e.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).sum();
        prop_assert!((nuclear_norm(&m) - oracle).abs() <= 1e-6 * oracle.max(1.0));
    }

    #[test]
    fn group_prox_satisfies_subgradient_condition(
        (p, q) in (1..5usize, 1..7usize).prop_flat_map(|(r, c)| (
            proptest::collection::vec(-10.0..10.0f64, r * c).prop_map(move |v| Matrix::from_vec(r, c, v)),
            proptest::collection::vec(-10.0..10.0f64, r * c).prop_map(move |v| Matrix::from_vec(r, c, v)),
        )),
        tau in 0.0..12.0f64,
    ) {
        let (yp, yq) = prox_group_l1(&p, &q, tau).unwrap();
        prop_assert!(group_subgradient_residual(&p, &q, &yp, &yq, tau) <= 1e-8);
    }

    #[test]
    fn group_prox_matches_grid_oracle(a in -10.0..10.0f64, b in -10.0..10.0f64, tau in 0.0..12.0f64) {
        let (yp, yq) = prox_group_l1(&Matrix::from_element(1, 1, a), &Matrix::from_element(1, 1, b), tau).unwrap();
        let (gp, gq) = grid_group_prox((a, b), tau);
        prop_assert!((yp[0] - gp).hypot(yq[0] - gq) <= 1e-4);
    }

    #[test]
    fn running_sum_adjoint_and_inverse(x in matrix(3, 30, 5.0), seed in 0u64..1000) {
        let d = DifferenceOperator::new(x.ncols());
        let y = Matrix::from_fn(x.nrows(), x.ncols(), |i, j| (((i * 31 + j * 17) as u64 + seed) % 13) as f64 - 6.0);
        let lhs = d.u(&x).dot(&y);
        let rhs = x.dot(&d.ut(&y));
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        prop_assert!((d.u_inv(&d.u(&x)) - &x).abs().max() <= 1e-9);
        prop_assert!((d.ut(&d.ut_inv(&x)) - &x).abs().max() <= 1e-9);
    }
}

#[test]
fn prox_rejects_bad_inputs() {
    let a = Matrix::zeros(2, 3);
    assert!(matches!(prox_nuclear(&a, -1.0), Err(Error::Config(_))));
    assert!(matches!(prox_group_l1(&a, &Matrix::zeros(3, 2), 1.0), Err(Error::Dimension(_))));
    assert!(matches!(group_l1_norm(&a, &Matrix::zeros(2, 2)), Err(Error::Dimension(_))));
}

fn short_config(minutes: usize) -> gridedge::synth::ScenarioConfig {
    let mut cfg = exact_recovery_config();
    cfg.minutes = minutes;
    cfg.events.retain(|e| e.end <= minutes);
    cfg
}

#[test]
fn zero_load_recovers_zero() {
    let (mut problem, _) = noiseless_problem(&short_config(120), 1e-3, 1.0);
    problem.gamma.fill(0.0);
    problem.z.fill(0.0);
    problem.gamma_bound.fill(1.0);
    problem.z_bound.fill(1.0);
    for mode in [SolverMode::Full, SolverMode::Rank1] {
        let sol = solve(&problem, &RecoveryOptions::default(), mode).unwrap();
        assert!(sol.x_hat().abs().max() <= 1.0, "{mode:?}");
        assert_eq!(sol.support(), 0, "{mode:?}");
    }
}

#[test]
fn huge_lambda_moves_everything_into_the_low_rank_part() {
    let (mut problem, _) = noiseless_problem(&unity_power_factor(short_config(120)), 2e-3, 1.0);
    problem.lambda = 1e6;
    let sol = solve_full(&problem, &RecoveryOptions::default()).unwrap();
    assert_eq!(sol.support(), 0);
    assert!(sol.dp.iter().chain(sol.dq.iter()).all(|&v| v == 0.0));
    assert!(worst_violation(&problem, &sol.x_hat()) <= 1.05);
}

#[test]
fn support_shrinks_along_the_lambda_path() {
    let (mut problem, _) = noiseless_problem(&unity_power_factor(short_config(120)), 2e-3, 1.0);
    let base = problem.lambda;
    let mut last = usize::MAX;
    for f in [0.2, 1.0, 5.0, 25.0] {
        problem.lambda = base * f;
        let s = solve_full(&problem, &RecoveryOptions::default()).unwrap().support();
        assert!(s <= last, "support {s} after {last} at {f}x");
        last = s;
    }
}

#[test]
fn converged_solutions_are_feasible_and_thresholded() {
    let (problem, truth) = noiseless_problem(&short_config(120), 2e-3, 1.0);
    let opts = RecoveryOptions::default();
    for mode in [SolverMode::Full, SolverMode::Rank1] {
        let sol = solve(&problem, &opts, mode).unwrap();
        let d = &sol.diagnostics;
        if d.converged {
            assert!(d.final_residual() <= opts.tol);
            assert!(worst_violation(&problem, &sol.x_hat()) <= 1.05, "{mode:?}");
        }
        let norms: Vec<f64> = sol.dp.iter().zip(sol.dq.iter()).map(|(a, b)| a.hypot(*b)).collect();
        let top = norms.iter().copied().fold(0.0, f64::max);
        assert!(norms.iter().all(|&g| g == 0.0 || g >= opts.threshold_floor * top));
        assert!(rel_error(&sol.x_hat(), &truth.loads.stacked()) < 0.05, "{mode:?}");
        assert_eq!(d.primal_trace.len(), d.iterations);
        assert_eq!(d.converged, !d.not_converged);
    }
}

#[test]
fn rank_one_needs_u() {
    let (mut problem, _) = noiseless_problem(&short_config(60), 2e-3, 1.0);
    problem.u = None;
    assert!(matches!(solve_rank_one(&problem, &RecoveryOptions::default()), Err(Error::Config(_))));
    problem.u = Some(vec![0.0; 4]);
    assert!(matches!(solve_rank_one(&problem, &RecoveryOptions::default()), Err(Error::Config(_))));
}

#[test]
fn shape_errors_are_reported() {
    let (mut problem, _) = noiseless_problem(&short_config(60), 2e-3, 1.0);
    problem.z_bound = Matrix::zeros(1, 1);
    assert!(matches!(solve_full(&problem, &RecoveryOptions::default()), Err(Error::Dimension(_))));
    let (mut problem, _) = noiseless_problem(&short_config(60), 2e-3, 1.0);
    problem.gamma_bound.fill(0.0);
    assert!(matches!(solve_full(&problem, &RecoveryOptions::default()), Err(Error::Config(_))));
}

#[test]
fn diagnostics_serialize_without_wall_time() {
    let (problem, _) = noiseless_problem(&short_config(60), 2e-3, 1.0);
    let sol = solve_full(&problem, &RecoveryOptions::default()).unwrap();
    let json = sol.diagnostics.to_json().unwrap();
    assert!(json.contains("primal_trace") && !json.contains("wall_time"));
}
