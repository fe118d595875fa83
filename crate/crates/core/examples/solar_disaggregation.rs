//! Behind-the-meter solar on a cloudy day: the shared pattern comes from the
//! recovered low-rank part, and each phase of the head reading is split into
//! demand and generation.

use gridedge::apps::{disaggregate_btm, extract_pattern, BtmOptions};
use gridedge::feeder::{stock, FeederModel};
use gridedge::linalg::correlation;
use gridedge::recover::{default_lambda, solve, RecoveryOptions, RecoveryProblem, SolverMode};
use gridedge::synth::{simulate, PvPattern, ScenarioConfig};

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
    cfg.pv.pattern = PvPattern::Variable;
    let sc = simulate(&cfg, &model, f.desc.sensor_plan(1, &f.laterals)?)?;
    let problem = RecoveryProblem::from_measurements(&sc.measurements, default_lambda(cfg.minutes));
    let sol = solve(&problem, &RecoveryOptions::default(), SolverMode::Full)?;

    let day = cfg.daytime_mask();
    let night: Vec<bool> = day.iter().map(|d| !d).collect();
    let pattern = extract_pattern(&sol, Some(&day))?;
    println!("pattern correlation with truth: {:.4}", correlation(&pattern.rho, &sc.truth.pattern));

    let mut total = vec![0.0; cfg.minutes];
    for ph in 0..3 {
        let z: Vec<f64> = sc.measurements.z.row(ph).iter().copied().collect();
        let fit = disaggregate_btm(&z, &pattern.rho, &night, &BtmOptions::default())?;
        println!(
            "phase {}: alpha {:.0} W, beta {:.0} W, {} Newton steps",
            ["a", "b", "c"][ph],
            fit.alpha,
            fit.beta,
            fit.iterations
        );
        for (t, s) in total.iter_mut().zip(&fit.solar) {
            *t += s;
        }
    }
    let truth = sc.truth.total_solar();
    let peak = truth.iter().copied().fold(0.0, f64::max);
    let rms = (total.iter().zip(&truth).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / truth.len() as f64).sqrt();
    println!("total solar: RMS error {:.2}% of the {:.0} W peak", 100.0 * rms / peak, peak);
    for t in (0..cfg.minutes).step_by(120) {
        println!("  minute {t:>3}: estimated {:>7.0} W, true {:>7.0} W", total[t], truth[t]);
    }
    Ok(())
}
