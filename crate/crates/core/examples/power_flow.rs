//! Nonlinear power flow against the linearized voltages as loading grows.

use gridedge::feeder::{stock, FeederModel};
use gridedge::powerflow::PowerFlowOptions;

fn main() -> gridedge::Result<()> {
    let f = stock::radial(15, 5);
    let model = FeederModel::new(f.desc.clone())?;
    let n = model.n_loads();
    let opts = PowerFlowOptions::default();
    let flat = model.linearize_flat(&[])?;
    let sensors = f.desc.sensor_plan(1, &f.laterals)?;

    for scale in [0.25, 0.5, 1.0, 1.5, 2.0] {
        let x: Vec<f64> = stock::nominal_demand(n).iter().map(|v| v * scale).collect();
        let pf = model.solve(&x, &opts)?;
        let lin = flat.voltage(&x);
        let err = pf
            .v
            .iter()
            .zip(lin.iter())
            .map(|(a, b)| (a - b).norm() / a.norm())
            .fold(0.0, f64::max);
        let vmin = pf.v.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        let head = model.readings(&pf, &sensors)?;
        let p_head: f64 = head[..3].iter().sum();
        let p_load: f64 = x[..n].iter().sum();
        println!(
            "load x{scale:<4}: {:>2} iterations, mismatch {:.1e} VA, min |v| {vmin:.1} V, \
             linearization error {:.3}%, losses {:.0} W",
            pf.iterations,
            pf.residual,
            100.0 * err,
            p_head - p_load
        );
    }
    Ok(())
}
