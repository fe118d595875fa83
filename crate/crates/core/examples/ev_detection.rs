//! EV charging detection from recovered switching events: ROC curves with
//! and without a feeder-head sensor.

use gridedge::apps::{default_fractions, detect_ev_events, ev_truth, roc_sweep};
use gridedge::feeder::{stock, FeederModel};
use gridedge::recover::{default_lambda, solve, RecoveryOptions, RecoveryProblem, SolverMode};
use gridedge::synth::{simulate, EvConfig, ScenarioConfig};

fn main() -> gridedge::Result<()> {
    let f = stock::radial(10, 5);
    let model = FeederModel::new(f.desc.clone())?;
    let fractions = default_fractions();
    for kappa in [0, 1] {
        let cfg = ScenarioConfig {
            houses: 10,
            minutes: 480,
            start_minute: 1200,
            kappa,
            seed: 2,
            ev: EvConfig {
                sessions: 5,
                ..Default::default()
            },
            ..Default::default()
        };
        let sc = simulate(&cfg, &model, f.desc.sensor_plan(kappa, &f.laterals)?)?;
        let problem = RecoveryProblem::from_measurements(&sc.measurements, default_lambda(cfg.minutes));
        let sol = solve(&problem, &RecoveryOptions::default(), SolverMode::Full)?;

        let truth = ev_truth(&sc.truth);
        let gap = cfg.meters.interval;
        let roc = roc_sweep(&sol.dp, &truth, cfg.ev.rating, &fractions, 1, gap)?;
        println!("kappa={kappa}: {} true on/off edges, max TPR {:.2}", truth.len(), roc.max_tpr());
        for p in roc.points.iter().step_by(3) {
            println!("  threshold {:>5.0} W  TPR {:.2}  FPR {:.1e}", p.fraction * cfg.ev.rating, p.tpr, p.fpr);
        }
        let events = detect_ev_events(&sol.dp, cfg.ev.rating, 0.5, gap)?;
        for e in events.iter().take(4) {
            println!(
                "  house {} minute {:>3}: {:?} {:.0} W",
                e.house, e.minute, e.polarity, e.magnitude
            );
        }
    }
    Ok(())
}
