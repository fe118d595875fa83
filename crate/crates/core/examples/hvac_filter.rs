//! Air-conditioner cycling leaks into the low-rank part; a band-pass notch
//! over its period range restores the solar pattern.

use gridedge::apps::{bandpass_remove, extract_pattern};
use gridedge::feeder::{stock, FeederModel};
use gridedge::linalg::correlation;
use gridedge::recover::{default_lambda, solve, RecoveryOptions, RecoveryProblem, SolverMode};
use gridedge::synth::{simulate, ScenarioConfig};

fn main() -> gridedge::Result<()> {
    let f = stock::radial(10, 5);
    let model = FeederModel::new(f.desc.clone())?;
    let mut cfg = ScenarioConfig {
        houses: 10,
        minutes: 960,
        start_minute: 300,
        kappa: 1,
        seed: 1,
        ..Default::default()
    };
    cfg.pv.fraction = 0.6;
    cfg.hvac.enabled = true;
    let sc = simulate(&cfg, &model, f.desc.sensor_plan(1, &f.laterals)?)?;
    println!("true HVAC period: {:?} minutes", sc.truth.hvac_period);
    let problem = RecoveryProblem::from_measurements(&sc.measurements, default_lambda(cfg.minutes));
    let sol = solve(&problem, &RecoveryOptions::default(), SolverMode::Full)?;

    let day = cfg.daytime_mask();
    let raw = extract_pattern(&sol, Some(&day))?;
    println!("raw pattern correlation: {:.4}", correlation(&raw.rho, &sc.truth.pattern));
    for band in [[10.0, 35.0], [15.0, 40.0], [5.0, 60.0]] {
        let filtered = bandpass_remove(&raw, band, Some(&day))?;
        println!(
            "periods {:?} removed: correlation {:.4}",
            band,
            correlation(&filtered.rho, &sc.truth.pattern)
        );
    }
    Ok(())
}
