//! Generates a scenario and writes its truth and measurements as CSV.
//!
//! cargo run --release --example synthesize -- [out-dir]

use gridedge::feeder::{stock, FeederModel};
use gridedge::synth::io::{load_labels, sensor_labels, write_matrix_csv};
use gridedge::synth::{simulate, EventKind, PvPattern, ScenarioConfig};

fn main() -> gridedge::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "synth-out".into());
    std::fs::create_dir_all(&out)?;

    let f = stock::radial(10, 5);
    let model = FeederModel::new(f.desc.clone())?;
    let mut cfg = ScenarioConfig {
        houses: 10,
        minutes: 720,
        start_minute: 480,
        kappa: 2,
        seed: 7,
        ..Default::default()
    };
    cfg.pv.fraction = 0.5;
    cfg.pv.pattern = PvPattern::Variable;
    cfg.ev.sessions = 3;
    cfg.validate()?;

    let sc = simulate(&cfg, &model, f.desc.sensor_plan(cfg.kappa, &f.laterals)?)?;
    let m = &sc.measurements;
    let evs = sc.truth.events.iter().filter(|e| e.kind == EventKind::Ev).count();
    println!(
        "{} houses x {} minutes: {} events ({evs} EV), PV on {} houses",
        cfg.houses,
        cfg.minutes,
        sc.truth.events.len(),
        sc.truth.pv_capacity.iter().filter(|c| **c > 0.0).count()
    );
    println!(
        "smart meters: {}x{} ({}-minute averages); feeder sensors: {}x{}",
        m.gamma.nrows(),
        m.gamma.ncols(),
        cfg.meters.interval,
        m.z.nrows(),
        m.z.ncols()
    );
    let noise = (&m.z - &m.z_clean).abs().max() / m.z_clean.abs().max();
    println!("largest feeder noise relative to peak reading: {noise:.1e}");

    write_matrix_csv(format!("{out}/loads.csv"), &load_labels(cfg.houses), &sc.truth.loads.stacked(), 1)?;
    write_matrix_csv(format!("{out}/gamma.csv"), &load_labels(cfg.houses), &m.gamma, cfg.meters.interval)?;
    write_matrix_csv(format!("{out}/z.csv"), &sensor_labels(m.sensors.len()), &m.z, 1)?;
    println!("wrote {out}/{{loads,gamma,z}}.csv");
    Ok(())
}
