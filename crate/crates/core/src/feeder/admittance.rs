use std::collections::VecDeque;

use num_complex::Complex64;

use super::description::{FeederDescription, Phase, SensorKind, SensorPlacement};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, ComplexFactor};

/// Largest 1-norm condition number accepted for `Y_LL`.
pub const MAX_CONDITION: f64 = 1e13;

/// One phase conductor at one bus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Node {
    pub bus: usize,
    pub phase: Phase,
}

/// A series branch resolved onto node indices of the full Ybus.
#[derive(Clone, Debug)]
pub struct Branch {
    pub from_bus: usize,
    pub to_bus: usize,
    pub phases: Vec<Phase>,
    pub from_nodes: Vec<usize>,
    pub to_nodes: Vec<usize>,
    pub y: CMatrix,
}

/// Nodal admittance matrix with the reference nodes ordered first, its
/// partitions, and a cached factorization of `Y_LL`.
#[derive(Clone, Debug)]
pub struct AdmittanceModel {
    pub bus_ids: Vec<String>,
    pub nodes: Vec<Node>,
    /// Number of reference-bus nodes (3 for a three-phase head).
    pub n_ref: usize,
    pub y: CMatrix,
    pub y00: CMatrix,
    pub y0l: CMatrix,
    /// Non-reference rows of `Y`, all columns.
    pub yl: CMatrix,
    pub yll: CMatrix,
    pub branches: Vec<Branch>,
    /// Non-reference node index (0-based, into `Y_LL`) of every load, in
    /// load-node order.
    pub load_nodes: Vec<usize>,
    pub base_power_va: f64,
    yll_factor: ComplexFactor,
}

impl AdmittanceModel {
    pub fn n_total(&self) -> usize {
        self.nodes.len()
    }

    /// Number of non-reference nodes.
    pub fn n_pq(&self) -> usize {
        self.nodes.len() - self.n_ref
    }

    pub fn n_loads(&self) -> usize {
        self.load_nodes.len()
    }

    /// `Y_L0`: the reference-column block of `Y_L`.
    pub fn yl0(&self) -> CMatrix {
        self.yl.columns(0, self.n_ref).into_owned()
    }

    pub fn yll_factor(&self) -> &ComplexFactor {
        &self.yll_factor
    }

    /// Reference phasors restricted to the phases present at the head.
    pub fn reference_voltage(&self, v0: &[Complex64; 3]) -> CVector {
        CVector::from_iterator(self.n_ref, self.nodes[..self.n_ref].iter().map(|n| v0[n.phase.index()]))
    }

    pub fn node_index(&self, bus: usize, phase: Phase) -> Option<usize> {
        self.nodes.iter().position(|n| n.bus == bus && n.phase == phase)
    }

    /// Full voltage vector `[v0; v]`.
    pub fn stack(&self, v0: &CVector, v: &CVector) -> CVector {
        let mut full = CVector::zeros(self.n_total());
        full.rows_mut(0, self.n_ref).copy_from(v0);
        full.rows_mut(self.n_ref, self.n_pq()).copy_from(v);
        full
    }

    /// Resolves a sensor into the current-row matrix `R` (phases × all nodes)
    /// and the nodes whose voltage multiplies the measured current.
    pub fn resolve_sensor(&self, sensor: &SensorPlacement) -> Result<ResolvedSensor> {
        let bus = self
            .bus_ids
            .iter()
            .position(|b| *b == sensor.bus)
            .ok_or_else(|| Error::config(format!("sensor on unknown bus {:?}", sensor.bus)))?;
        match sensor.kind {
            SensorKind::FeederHeadPower => {
                if self.nodes[0].bus != bus {
                    return Err(Error::config("feeder-head sensor is not on the reference bus"));
                }
                let phases: Vec<Phase> = self.nodes[..self.n_ref].iter().map(|n| n.phase).collect();
                Ok(ResolvedSensor {
                    kind: sensor.kind,
                    phases,
                    upstream_nodes: (0..self.n_ref).collect(),
                    rows: self.y.rows(0, self.n_ref).into_owned(),
                })
            }
            SensorKind::LateralPower => {
                let depth = self.depths();
                let branch = self
                    .branches
                    .iter()
                    .find(|b| {
                        (b.to_bus == bus && depth[b.from_bus] < depth[bus])
                            || (b.from_bus == bus && depth[b.to_bus] < depth[bus])
                    })
                    .ok_or_else(|| {
                        Error::Topology(format!("no upstream branch feeds lateral bus {:?}", sensor.bus))
                    })?;
                let (up, down) = if branch.to_bus == bus {
                    (&branch.from_nodes, &branch.to_nodes)
                } else {
                    (&branch.to_nodes, &branch.from_nodes)
                };
                let mut rows = CMatrix::zeros(branch.phases.len(), self.n_total());
                for a in 0..branch.phases.len() {
                    for b in 0..branch.phases.len() {
                        rows[(a, up[b])] += branch.y[(a, b)];
                        rows[(a, down[b])] -= branch.y[(a, b)];
                    }
                }
                Ok(ResolvedSensor {
                    kind: sensor.kind,
                    phases: branch.phases.clone(),
                    upstream_nodes: up.clone(),
                    rows,
                })
            }
        }
    }

    /// Breadth-first distance of every bus from the reference bus.
    fn depths(&self) -> Vec<usize> {
        let nb = self.bus_ids.len();
        let mut dist = vec![usize::MAX; nb];
        let root = self.nodes[0].bus;
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            for b in &self.branches {
                let k = if b.from_bus == i {
                    b.to_bus
                } else if b.to_bus == i {
                    b.from_bus
                } else {
                    continue;
                };
                if dist[k] == usize::MAX {
                    dist[k] = dist[i] + 1;
                    queue.push_back(k);
                }
            }
        }
        dist
    }
}

/// A sensor expressed as `s = diag(v_up) · conj(R · [v0; v])`.
#[derive(Clone, Debug)]
pub struct ResolvedSensor {
    pub kind: SensorKind,
    pub phases: Vec<Phase>,
    pub upstream_nodes: Vec<usize>,
    pub rows: CMatrix,
}

/// Assembles the nodal admittance matrix of `desc`.
pub fn build_admittance(desc: &FeederDescription) -> Result<AdmittanceModel> {
    desc.validate()?;
    let ref_bus = desc
        .buses
        .iter()
        .position(|b| b.is_reference)
        .expect("validated: one reference bus");

    let mut order: Vec<usize> = vec![ref_bus];
    order.extend((0..desc.buses.len()).filter(|&i| i != ref_bus));
    let mut nodes = Vec::new();
    for &b in &order {
        let mut phases = desc.buses[b].phases.clone();
        phases.sort();
        nodes.extend(phases.into_iter().map(|phase| Node { bus: b, phase }));
    }
    let n_ref = desc.buses[ref_bus].phases.len();
    let find = |bus: usize, phase: Phase| nodes.iter().position(|n| n.bus == bus && n.phase == phase);

    let n = nodes.len();
    let mut y = CMatrix::zeros(n, n);
    let mut branches = Vec::with_capacity(desc.lines.len());
    for line in &desc.lines {
        let fb = desc.bus_index(&line.from).expect("validated");
        let tb = desc.bus_index(&line.to).expect("validated");
        let phases: Vec<Phase> = Phase::ALL
            .into_iter()
            .filter(|p| desc.buses[fb].phases.contains(p) && desc.buses[tb].phases.contains(p))
            .collect();
        let from_nodes: Vec<usize> = phases.iter().map(|&p| find(fb, p).unwrap()).collect();
        let to_nodes: Vec<usize> = phases.iter().map(|&p| find(tb, p).unwrap()).collect();
        let block = CMatrix::from_fn(phases.len(), phases.len(), |a, b| {
            line.admittance[phases[a].index()][phases[b].index()]
        });
        for a in 0..phases.len() {
            for b in 0..phases.len() {
                let yab = block[(a, b)];
                y[(from_nodes[a], from_nodes[b])] += yab;
                y[(to_nodes[a], to_nodes[b])] += yab;
                y[(from_nodes[a], to_nodes[b])] -= yab;
                y[(to_nodes[a], from_nodes[b])] -= yab;
            }
        }
        branches.push(Branch {
            from_bus: fb,
            to_bus: tb,
            phases,
            from_nodes,
            to_nodes,
            y: block,
        });
    }

    let y00 = y.view((0, 0), (n_ref, n_ref)).into_owned();
    let y0l = y.view((0, n_ref), (n_ref, n - n_ref)).into_owned();
    let yl = y.rows(n_ref, n - n_ref).into_owned();
    let yll = y.view((n_ref, n_ref), (n - n_ref, n - n_ref)).into_owned();

    let yll_factor = ComplexFactor::new(&yll, MAX_CONDITION).map_err(|cond| {
        let bus_ids: Vec<String> = floating_nodes(&y, n_ref)
            .into_iter()
            .map(|i| desc.buses[nodes[i].bus].id.clone())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let buses = if bus_ids.is_empty() {
            order[1..].iter().map(|&b| desc.buses[b].id.clone()).collect()
        } else {
            bus_ids
        };
        Error::Model {
            message: format!("Y_LL is singular or ill-conditioned (condition estimate {cond:.3e})"),
            buses,
        }
    })?;

    let load_nodes = {
        let mut by_index = vec![0usize; desc.loads.len()];
        for l in &desc.loads {
            let b = desc.bus_index(&l.bus).expect("validated");
            by_index[l.node - 1] = find(b, l.phase).expect("validated") - n_ref;
        }
        by_index
    };

    Ok(AdmittanceModel {
        bus_ids: desc.buses.iter().map(|b| b.id.clone()).collect(),
        nodes,
        n_ref,
        y,
        y00,
        y0l,
        yl,
        yll,
        branches,
        load_nodes,
        base_power_va: desc.base_power_va,
        yll_factor,
    })
}

/// Nodes that no path of nonzero admittances connects to a reference node.
fn floating_nodes(y: &CMatrix, n_ref: usize) -> Vec<usize> {
    let n = y.nrows();
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n_ref).collect();
    for s in seen.iter_mut().take(n_ref) {
        *s = true;
    }
    while let Some(i) = queue.pop_front() {
        for k in 0..n {
            if !seen[k] && k != i && y[(i, k)].norm() > 0.0 {
                seen[k] = true;
                queue.push_back(k);
            }
        }
    }
    (n_ref..n).filter(|&i| !seen[i]).collect()
}

/// Voltage of all non-reference nodes when every injection is zero:
/// `Y_LL · w = −Y_L0 · v0`.
pub fn zero_load_voltage(adm: &AdmittanceModel, v0: &[Complex64; 3]) -> Result<CVector> {
    let v0 = adm.reference_voltage(v0);
    let rhs = -(adm.yl0() * &v0);
    let w = adm.yll_factor().solve(&rhs);
    let residual = (&adm.yll * &w - &rhs).norm();
    if residual > 1e-10 * rhs.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Model {
            message: format!(
                "zero-load solve residual {residual:.3e} (condition estimate {:.3e})",
                adm.yll_factor().condition
            ),
            buses: adm.bus_ids.clone(),
        });
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feeder::stock;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_bus_single_phase_assembly() {
        let y = c(1.0, -2.0);
        let adm = build_admittance(&stock::two_bus_single_phase(y, c(1.0, 0.0))).unwrap();
        assert_eq!(adm.y.shape(), (2, 2));
        assert_eq!(adm.y[(0, 0)], y);
        assert_eq!(adm.y[(0, 1)], -y);
        assert_eq!(adm.y[(1, 0)], -y);
        assert_eq!(adm.y[(1, 1)], y);
    }

    #[test]
    fn chain_middle_bus_accumulates_both_lines() {
        let mut desc = stock::two_bus_single_phase(c(2.0, -1.0), c(1.0, 0.0));
        desc.buses.push(super::super::description::BusRecord {
            id: "2".into(),
            phases: vec![Phase::A],
            is_reference: false,
        });
        let mut line = desc.lines[0].clone();
        line.from = "1".into();
        line.to = "2".into();
        desc.lines.push(line);
        let adm = build_admittance(&desc).unwrap();
        let i = adm.node_index(1, Phase::A).unwrap();
        assert_eq!(adm.y[(i, i)], c(4.0, -2.0));
    }

    #[test]
    fn ybus_is_symmetric_with_zero_row_sums() {
        let adm = build_admittance(&stock::four_bus()).unwrap();
        let asym = (&adm.y - adm.y.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert_eq!(asym, 0.0);
        for r in 0..adm.n_total() {
            let s: Complex64 = adm.y.row(r).iter().sum();
            assert!(s.norm() < 1e-9 * adm.y[(r, r)].norm());
        }
    }

    #[test]
    fn zero_load_voltage_replicates_head_on_shunt_free_feeder() {
        let desc = stock::four_bus();
        let adm = build_admittance(&desc).unwrap();
        let w = zero_load_voltage(&adm, &desc.v0).unwrap();
        for (k, node) in adm.nodes[adm.n_ref..].iter().enumerate() {
            assert!((w[k] - desc.v0[node.phase.index()]).norm() < 1e-9);
        }
    }

    #[test]
    fn floating_phase_names_bus() {
        let mut desc = stock::four_bus();
        desc.sensors.clear();
        // cut phase c of the line feeding bus 2
        for row in 0..3 {
            desc.lines[1].admittance[row][2] = c(0.0, 0.0);
            desc.lines[1].admittance[2][row] = c(0.0, 0.0);
        }
        match build_admittance(&desc) {
            Err(Error::Model { buses, .. }) => assert_eq!(buses, vec!["2".to_string()]),
            other => panic!("expected model error, got {other:?}"),
        }
    }
}
