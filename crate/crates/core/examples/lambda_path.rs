//! Sparsity of the recovered events along the regularization path.

use gridedge::feeder::{stock, FeederModel};
use gridedge::recover::{default_lambda, solve, RecoveryOptions, RecoveryProblem, SolverMode};
use gridedge::synth::{simulate, EvConfig, ScenarioConfig};

fn main() -> gridedge::Result<()> {
    let f = stock::radial(10, 5);
    let model = FeederModel::new(f.desc.clone())?;
    let cfg = ScenarioConfig {
        houses: 10,
        minutes: 480,
        start_minute: 1200,
        kappa: 1,
        seed: 4,
        power_factor: [1.0, 1.0],
        ev: EvConfig {
            sessions: 3,
            ..Default::default()
        },
        ..Default::default()
    };
    let sc = simulate(&cfg, &model, f.desc.sensor_plan(1, &f.laterals)?)?;
    let x = sc.truth.loads.stacked();
    let lambda0 = default_lambda(cfg.minutes);
    println!("default lambda for T={}: {lambda0:.4}", cfg.minutes);
    for factor in [0.2, 1.0, 5.0, 25.0, 1e6] {
        let problem = RecoveryProblem::from_measurements(&sc.measurements, factor * lambda0);
        let sol = solve(&problem, &RecoveryOptions::default(), SolverMode::Full)?;
        let energy = |m: &gridedge::linalg::Matrix| m.iter().map(|v| v.abs()).sum::<f64>();
        println!(
            "lambda x{factor:<7}: support {:>4}, |D| {:>9.0}, |K| {:>9.0}, error {:.4}",
            sol.diagnostics.support,
            energy(&sol.dp) + energy(&sol.dq),
            energy(&sol.k),
            (sol.x_hat() - &x).norm() / x.norm()
        );
    }
    Ok(())
}
