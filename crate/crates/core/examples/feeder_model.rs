//! Builds the stock feeders, places sensors and inspects the linearized
//! measurement operator.

use gridedge::feeder::{stock, FeederModel};

fn main() -> gridedge::Result<()> {
    let four = FeederModel::new(stock::four_bus())?;
    println!(
        "four-bus: {} buses, {} load nodes, {} wired nodes",
        four.desc.buses.len(),
        four.n_loads(),
        four.adm.n_total()
    );

    let radial = stock::radial(12, 4);
    let model = FeederModel::new(radial.desc.clone())?;
    println!("radial: laterals {:?}", radial.laterals);
    for kappa in 1..=3 {
        let plan = radial.desc.sensor_plan(kappa, &radial.laterals)?;
        let lin = model.linearize_flat(&plan)?;
        let covered: Vec<usize> = plan.iter().map(|s| s.downstream.len()).collect();
        println!(
            "kappa={kappa}: H is {}x{}, houses under each sensor {covered:?}",
            lin.h.nrows(),
            lin.h.ncols()
        );
    }

    // Active power at the head responds roughly one-for-one to demand.
    let lin = model.linearize_flat(&radial.desc.sensor_plan(1, &radial.laterals)?)?;
    let n = model.n_loads();
    let dp_head: f64 = (0..3).map(|ph| lin.h[(ph, 0)]).sum();
    let dq_head: f64 = (3..6).map(|ph| lin.h[(ph, n)]).sum();
    println!("dP_head/dp_1 = {dp_head:.4}, dQ_head/dq_1 = {dq_head:.4}");

    // Round trip through the JSON description format.
    let json = radial.desc.to_json()?;
    let back = gridedge::feeder::FeederDescription::from_json(&json)?;
    println!("JSON description: {} bytes, round trip ok: {}", json.len(), back == radial.desc);
    Ok(())
}
