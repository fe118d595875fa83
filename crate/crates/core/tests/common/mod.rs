#![allow(dead_code)]

pub mod oracles;

use gridedge::feeder::{stock, FeederModel};
use gridedge::linalg::Matrix;
use gridedge::recover::{default_lambda, DifferenceOperator, RecoveryProblem};
use gridedge::synth::*;

pub fn event(house: usize, start: usize, end: usize, dp: f64) -> EventSpec {
    EventSpec {
        house,
        start,
        end,
        dp,
        dq: 0.4 * dp,
        kind: EventKind::Appliance,
    }
}

/// Four houses, four hours of midday, half of them with PV, six scripted
/// switching events and nothing random besides the base load and PV.
pub fn exact_recovery_config() -> ScenarioConfig {
    ScenarioConfig {
        houses: 4,
        minutes: 240,
        start_minute: 600,
        appliances: ApplianceConfig {
            rate_per_day: 0.0,
            ..Default::default()
        },
        pv: PvConfig {
            fraction: 0.5,
            ..Default::default()
        },
        noise: NoiseConfig {
            smart_meter: 0.0,
            dpmu: 0.0,
            ..Default::default()
        },
        events: vec![
            event(0, 20, 70, 1500.0),
            event(1, 40, 100, 1200.0),
            event(2, 95, 150, 2000.0),
            event(3, 130, 200, 800.0),
            event(0, 160, 215, 1000.0),
            event(2, 33, 58, 900.0),
        ],
        ..Default::default()
    }
}

/// Purely active loads, so that `Q = DᵠU` can vanish entirely.
pub fn unity_power_factor(mut cfg: ScenarioConfig) -> ScenarioConfig {
    cfg.power_factor = [1.0, 1.0];
    for e in &mut cfg.events {
        e.dq = 0.0;
    }
    cfg
}

/// Noiseless instance on the stock four-bus feeder with a head sensor:
/// `Z = H·X` exactly and bounds `rel·|reading| + abs`.
pub fn noiseless_problem(cfg: &ScenarioConfig, rel: f64, abs: f64) -> (RecoveryProblem, GroundTruth) {
    let feeder = FeederModel::new(stock::four_bus()).unwrap();
    let truth = generate_ground_truth(cfg).unwrap();
    let x = truth.loads.stacked();
    let (gamma, averaging) = sample_smart_meters(&truth, cfg).unwrap();
    let sensors = vec![feeder.desc.head_sensor()];
    let h = recovery_operator(&feeder, &sensors, &gamma, &averaging, Linearization::AverageLoading).unwrap();
    let z = h.apply(&x);
    let gamma_bound = gamma.map(|g| rel * g.abs() + abs);
    let z_bound = z.map(|g| rel * g.abs() + abs);
    let problem = RecoveryProblem {
        gamma,
        averaging,
        z,
        h,
        gamma_bound,
        z_bound,
        lambda: default_lambda(cfg.minutes),
        diff: DifferenceOperator::new(cfg.minutes),
        u: Some(truth.pv_capacity.clone()),
        q_low_rank: None,
        nonnegative_q: false,
    };
    (problem, truth)
}

pub fn rel_error(estimate: &Matrix, truth: &Matrix) -> f64 {
    (estimate - truth).norm() / truth.norm()
}

/// Worst `|residual| / bound` of `x` against both measurement sets.
pub fn worst_violation(problem: &RecoveryProblem, x: &Matrix) -> f64 {
    let meter = (problem.averaging.apply(x) - &problem.gamma).zip_map(&problem.gamma_bound, |r, b| r.abs() / b);
    let mut worst = meter.max();
    if !problem.z.is_empty() {
        let feeder = (problem.h.apply(x) - &problem.z).zip_map(&problem.z_bound, |r, b| r.abs() / b);
        worst = worst.max(feeder.max());
    }
    worst
}

pub fn line(name: &str, pass: bool, detail: impl std::fmt::Display) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}
