//! Built-in test feeders: a 4-bus three-phase feeder with one lateral, a
//! parameterized radial feeder with laterals, and a single-phase two-bus
//! system for closed-form checks.

use std::collections::BTreeSet;

use nalgebra::Matrix3;
use num_complex::Complex64;

use super::description::*;

/// Nominal phase-to-ground voltage of the stock low-voltage feeders.
pub const NOMINAL_VOLTAGE: f64 = 230.0;

/// Series impedance of the stock cable in ohm per km, phase frame with the
/// neutral already reduced.
fn cable_impedance() -> Matrix3<Complex64> {
    let c = Complex64::new;
    Matrix3::new(
        c(0.088, 0.075),
        c(0.015, 0.050),
        c(0.015, 0.048),
        c(0.015, 0.050),
        c(0.090, 0.073),
        c(0.015, 0.050),
        c(0.015, 0.048),
        c(0.015, 0.050),
        c(0.085, 0.078),
    )
}

/// Admittance block of a stock cable segment of `km` length.
pub fn cable_admittance(km: f64) -> [[Complex64; 3]; 3] {
    let z = cable_impedance() * Complex64::new(km, 0.0);
    let y = z.try_inverse().expect("stock cable impedance is invertible");
    let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            // average the two triangles so the block is symmetric to the last bit
            *v = (y[(i, j)] + y[(j, i)]) * 0.5;
        }
    }
    out
}

pub fn balanced_source(magnitude: f64) -> [Complex64; 3] {
    let a = 2.0 * std::f64::consts::PI / 3.0;
    [
        Complex64::from_polar(magnitude, 0.0),
        Complex64::from_polar(magnitude, -a),
        Complex64::from_polar(magnitude, a),
    ]
}

fn bus(id: &str, reference: bool) -> BusRecord {
    BusRecord {
        id: id.to_string(),
        phases: Phase::ALL.to_vec(),
        is_reference: reference,
    }
}

fn line(from: &str, to: &str, km: f64) -> LineRecord {
    LineRecord {
        from: from.to_string(),
        to: to.to_string(),
        admittance: cable_admittance(km),
    }
}

fn load(bus: &str, phase: Phase, node: usize) -> LoadRecord {
    LoadRecord {
        bus: bus.to_string(),
        phase,
        node,
    }
}

/// Four three-phase buses: head `0`, trunk `1`, end bus `2`, and a lateral
/// bus `3` hanging off bus `1`. Four houses, a head sensor and a lateral
/// sensor at bus `3`.
pub fn four_bus() -> FeederDescription {
    let mut desc = FeederDescription {
        format: FEEDER_FORMAT.to_string(),
        base_power_va: 100e3,
        v0: balanced_source(NOMINAL_VOLTAGE),
        buses: vec![bus("0", true), bus("1", false), bus("2", false), bus("3", false)],
        lines: vec![line("0", "1", 0.10), line("1", "2", 0.06), line("1", "3", 0.08)],
        loads: vec![
            load("2", Phase::A, 1),
            load("2", Phase::B, 2),
            load("3", Phase::C, 3),
            load("3", Phase::B, 4),
        ],
        sensors: Vec::new(),
    };
    desc.sensors = vec![
        desc.head_sensor(),
        desc.lateral_sensor("3").expect("stock feeder is radial"),
    ];
    desc
}

/// Demand `[p; q]` of `n` houses at nominal loading: 3 kW at power factor
/// 0.95 each.
pub fn nominal_demand(n: usize) -> Vec<f64> {
    let q = 3000.0 * (1.0f64 - 0.95 * 0.95).sqrt() / 0.95;
    let mut x = vec![3000.0; n];
    x.extend(std::iter::repeat(q).take(n));
    x
}

/// A radial feeder together with the names of its lateral-head buses.
#[derive(Clone, Debug)]
pub struct StockFeeder {
    pub desc: FeederDescription,
    pub laterals: Vec<String>,
}

/// Radial feeder with a trunk of `n_laterals` buses, one lateral per trunk
/// bus, and `n_houses` single-phase houses spread round-robin over the
/// laterals (three houses per lateral bus, one per phase).
///
/// The description carries only the feeder-head sensor; use
/// [`FeederDescription::sensor_plan`] to add laterals.
pub fn radial(n_houses: usize, n_laterals: usize) -> StockFeeder {
    assert!(n_laterals >= 1, "radial feeder needs at least one lateral");
    let mut buses = vec![bus("0", true)];
    let mut lines = Vec::new();
    let mut laterals = Vec::new();
    let mut prev = "0".to_string();
    for k in 1..=n_laterals {
        let trunk = format!("T{k}");
        buses.push(bus(&trunk, false));
        lines.push(line(&prev, &trunk, 0.05));
        let head = format!("L{k}");
        buses.push(bus(&head, false));
        lines.push(line(&trunk, &head, 0.03));
        laterals.push(head);
        prev = trunk;
    }

    let mut per_lateral = vec![0usize; n_laterals];
    let mut loads = Vec::with_capacity(n_houses);
    for n in 0..n_houses {
        let k = n % n_laterals;
        let slot = per_lateral[k];
        per_lateral[k] += 1;
        let depth = slot / 3;
        let bus_id = if depth == 0 {
            laterals[k].clone()
        } else {
            format!("L{}.{}", k + 1, depth)
        };
        if slot % 3 == 0 && depth > 0 {
            let parent = if depth == 1 {
                laterals[k].clone()
            } else {
                format!("L{}.{}", k + 1, depth - 1)
            };
            buses.push(bus(&bus_id, false));
            lines.push(line(&parent, &bus_id, 0.03));
        }
        let phase = Phase::ALL[(slot + k) % 3];
        loads.push(load(&bus_id, phase, n + 1));
    }

    let mut desc = FeederDescription {
        format: FEEDER_FORMAT.to_string(),
        base_power_va: 100e3,
        v0: balanced_source(NOMINAL_VOLTAGE),
        buses,
        lines,
        loads,
        sensors: Vec::new(),
    };
    desc.sensors = vec![desc.head_sensor()];
    StockFeeder { desc, laterals }
}

/// Two single-phase buses joined by one series admittance `y`, with one
/// load on the far bus.
pub fn two_bus_single_phase(y: Complex64, v0: Complex64) -> FeederDescription {
    let zero = Complex64::new(0.0, 0.0);
    let mut block = [[zero; 3]; 3];
    block[0][0] = y;
    let mut desc = FeederDescription {
        format: FEEDER_FORMAT.to_string(),
        base_power_va: 1.0,
        v0: [v0, zero, zero],
        buses: vec![
            BusRecord {
                id: "0".into(),
                phases: vec![Phase::A],
                is_reference: true,
            },
            BusRecord {
                id: "1".into(),
                phases: vec![Phase::A],
                is_reference: false,
            },
        ],
        lines: vec![LineRecord {
            from: "0".into(),
            to: "1".into(),
            admittance: block,
        }],
        loads: vec![load("1", Phase::A, 1)],
        sensors: Vec::new(),
    };
    desc.sensors = vec![SensorPlacement {
        kind: SensorKind::FeederHeadPower,
        bus: "0".into(),
        downstream: BTreeSet::from([1]),
    }];
    desc
}
