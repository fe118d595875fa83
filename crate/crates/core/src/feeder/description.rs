//! Feeder description: buses, lines, single-phase loads and sensor placements,
//! plus the `gridedge-feeder/1` JSON encoding.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FEEDER_FORMAT: &str = "gridedge-feeder/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    A,
    B,
    C,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::A, Phase::B, Phase::C];

    pub fn index(self) -> usize {
        match self {
            Phase::A => 0,
            Phase::B => 1,
            Phase::C => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BusRecord {
    pub id: String,
    pub phases: Vec<Phase>,
    #[serde(default)]
    pub is_reference: bool,
}

/// A series branch. `admittance` is the full 3×3 phase-frame block in
/// siemens; only the rows/columns of phases present at both ends are used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineRecord {
    pub from: String,
    pub to: String,
    pub admittance: [[Complex64; 3]; 3],
}

/// A wye-connected single-phase load. `node` is the 1-based load-node index
/// that fixes the row of this house in the load matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadRecord {
    pub bus: String,
    pub phase: Phase,
    pub node: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SensorKind {
    /// Three-phase power injected at the reference bus.
    FeederHeadPower,
    /// Three-phase power flowing into the subtree rooted at `bus`.
    LateralPower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorPlacement {
    pub kind: SensorKind,
    pub bus: String,
    /// 1-based load-node indices aggregated by this sensor.
    pub downstream: BTreeSet<usize>,
}

fn default_format() -> String {
    FEEDER_FORMAT.to_string()
}

fn default_base_power() -> f64 {
    1.0e6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeederDescription {
    #[serde(default = "default_format")]
    pub format: String,
    /// Power base used only to express tolerances in per unit.
    #[serde(default = "default_base_power")]
    pub base_power_va: f64,
    /// Reference (feeder-head) phase-to-ground voltages in volts.
    pub v0: [Complex64; 3],
    pub buses: Vec<BusRecord>,
    pub lines: Vec<LineRecord>,
    pub loads: Vec<LoadRecord>,
    #[serde(default)]
    pub sensors: Vec<SensorPlacement>,
}

impl FeederDescription {
    pub fn from_json(text: &str) -> Result<Self> {
        let desc: Self =
            serde_json::from_str(text).map_err(|e| Error::config(format!("feeder file: {e}")))?;
        if desc.format != FEEDER_FORMAT {
            return Err(Error::config(format!(
                "feeder file: unsupported format {:?}, expected {FEEDER_FORMAT:?}",
                desc.format
            )));
        }
        desc.validate()?;
        Ok(desc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn n_loads(&self) -> usize {
        self.loads.len()
    }

    pub fn reference_bus(&self) -> Option<&BusRecord> {
        self.buses.iter().find(|b| b.is_reference)
    }

    pub fn bus_index(&self, id: &str) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    /// Checks every structural invariant of the description.
    pub fn validate(&self) -> Result<()> {
        let refs = self.buses.iter().filter(|b| b.is_reference).count();
        if refs != 1 {
            return Err(Error::Topology(format!(
                "expected exactly one reference bus, found {refs}"
            )));
        }
        let mut ids = HashMap::new();
        for (i, b) in self.buses.iter().enumerate() {
            if ids.insert(b.id.as_str(), i).is_some() {
                return Err(Error::config(format!("duplicate bus id {:?}", b.id)));
            }
            if b.phases.is_empty() {
                return Err(Error::config(format!("bus {:?} has no phases", b.id)));
            }
            let set: BTreeSet<_> = b.phases.iter().collect();
            if set.len() != b.phases.len() {
                return Err(Error::config(format!("bus {:?} repeats a phase", b.id)));
            }
        }
        for line in &self.lines {
            for end in [&line.from, &line.to] {
                if !ids.contains_key(end.as_str()) {
                    return Err(Error::config(format!("line references unknown bus {end:?}")));
                }
            }
            if line.from == line.to {
                return Err(Error::config(format!("line {:?} is a self-loop", line.from)));
            }
            let y = &line.admittance;
            let scale = y.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
            for i in 0..3 {
                for j in 0..3 {
                    if (y[i][j] - y[j][i]).norm() > 1e-12 * scale.max(1.0) {
                        return Err(Error::config(format!(
                            "line {}-{} admittance block is not symmetric",
                            line.from, line.to
                        )));
                    }
                }
            }
        }
        self.check_connected(&ids)?;

        let n = self.loads.len();
        let mut seen = vec![false; n];
        for load in &self.loads {
            let Some(&bi) = ids.get(load.bus.as_str()) else {
                return Err(Error::config(format!("load on unknown bus {:?}", load.bus)));
            };
            let bus = &self.buses[bi];
            if bus.is_reference {
                return Err(Error::config(format!(
                    "load node {} sits on the reference bus",
                    load.node
                )));
            }
            if !bus.phases.contains(&load.phase) {
                return Err(Error::config(format!(
                    "load node {} uses phase {:?} absent at bus {:?}",
                    load.node, load.phase, bus.id
                )));
            }
            if load.node == 0 || load.node > n || seen[load.node - 1] {
                return Err(Error::config(format!(
                    "load-node indices must cover 1..={n} exactly once (offending index {})",
                    load.node
                )));
            }
            seen[load.node - 1] = true;
        }
        for sensor in &self.sensors {
            self.check_sensor(sensor)?;
        }
        Ok(())
    }

    fn check_connected(&self, ids: &HashMap<&str, usize>) -> Result<()> {
        let nb = self.buses.len();
        let mut adj = vec![Vec::new(); nb];
        for line in &self.lines {
            let (a, b) = (ids[line.from.as_str()], ids[line.to.as_str()]);
            adj[a].push(b);
            adj[b].push(a);
        }
        let root = self.buses.iter().position(|b| b.is_reference).unwrap_or(0);
        let mut seen = vec![false; nb];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            for &k in &adj[i] {
                if !seen[k] {
                    seen[k] = true;
                    queue.push_back(k);
                }
            }
        }
        let orphans: Vec<_> = (0..nb)
            .filter(|&i| !seen[i])
            .map(|i| self.buses[i].id.clone())
            .collect();
        if !orphans.is_empty() {
            return Err(Error::Topology(format!(
                "buses not connected to the reference: {}",
                orphans.join(", ")
            )));
        }
        Ok(())
    }

    /// Parent bus of every bus in the tree rooted at the reference, or an
    /// error when the network has loops.
    pub fn parents(&self) -> Result<Vec<Option<usize>>> {
        let nb = self.buses.len();
        if self.lines.len() + 1 != nb {
            return Err(Error::Topology(
                "lateral sensors require a radial feeder (lines = buses - 1)".into(),
            ));
        }
        let mut adj = vec![Vec::new(); nb];
        for line in &self.lines {
            let a = self.bus_index(&line.from).ok_or_else(|| Error::config("unknown bus"))?;
            let b = self.bus_index(&line.to).ok_or_else(|| Error::config("unknown bus"))?;
            adj[a].push(b);
            adj[b].push(a);
        }
        let root = self
            .buses
            .iter()
            .position(|b| b.is_reference)
            .ok_or_else(|| Error::Topology("no reference bus".into()))?;
        let mut parent = vec![None; nb];
        let mut seen = vec![false; nb];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            for &k in &adj[i] {
                if !seen[k] {
                    seen[k] = true;
                    parent[k] = Some(i);
                    queue.push_back(k);
                }
            }
        }
        Ok(parent)
    }

    /// Load-node indices located in the subtree rooted at `bus`.
    pub fn downstream_loads(&self, bus: &str) -> Result<BTreeSet<usize>> {
        let parent = self.parents()?;
        let target = self
            .bus_index(bus)
            .ok_or_else(|| Error::config(format!("unknown bus {bus:?}")))?;
        let in_subtree = |mut i: usize| loop {
            if i == target {
                return true;
            }
            match parent[i] {
                Some(p) => i = p,
                None => return false,
            }
        };
        Ok(self
            .loads
            .iter()
            .filter(|l| self.bus_index(&l.bus).map(in_subtree).unwrap_or(false))
            .map(|l| l.node)
            .collect())
    }

    fn check_sensor(&self, sensor: &SensorPlacement) -> Result<()> {
        let bi = self
            .bus_index(&sensor.bus)
            .ok_or_else(|| Error::config(format!("sensor on unknown bus {:?}", sensor.bus)))?;
        match sensor.kind {
            SensorKind::FeederHeadPower => {
                if !self.buses[bi].is_reference {
                    return Err(Error::config(format!(
                        "feeder-head sensor must sit on the reference bus, not {:?}",
                        sensor.bus
                    )));
                }
                let all: BTreeSet<usize> = (1..=self.loads.len()).collect();
                if sensor.downstream != all {
                    return Err(Error::config(
                        "feeder-head sensor must aggregate every load node".to_string(),
                    ));
                }
            }
            SensorKind::LateralPower => {
                if self.buses[bi].is_reference {
                    return Err(Error::config(
                        "lateral sensor cannot sit on the reference bus".to_string(),
                    ));
                }
                let expected = self.downstream_loads(&sensor.bus)?;
                if sensor.downstream != expected {
                    return Err(Error::config(format!(
                        "lateral sensor at {:?} declares loads {:?} but the subtree holds {:?}",
                        sensor.bus, sensor.downstream, expected
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn head_sensor(&self) -> SensorPlacement {
        SensorPlacement {
            kind: SensorKind::FeederHeadPower,
            bus: self.reference_bus().map(|b| b.id.clone()).unwrap_or_default(),
            downstream: (1..=self.loads.len()).collect(),
        }
    }

    pub fn lateral_sensor(&self, bus: &str) -> Result<SensorPlacement> {
        Ok(SensorPlacement {
            kind: SensorKind::LateralPower,
            bus: bus.to_string(),
            downstream: self.downstream_loads(bus)?,
        })
    }

    /// The first `kappa` sensors: the feeder head, then laterals in
    /// descending order of aggregated loads. `kappa` beyond the number of
    /// declared laterals is an error.
    pub fn sensor_plan(&self, kappa: usize, laterals: &[String]) -> Result<Vec<SensorPlacement>> {
        if kappa == 0 {
            return Ok(Vec::new());
        }
        if kappa > laterals.len() + 1 {
            return Err(Error::config(format!(
                "kappa = {kappa} exceeds the {} available placements",
                laterals.len() + 1
            )));
        }
        let mut lats = laterals
            .iter()
            .map(|b| self.lateral_sensor(b))
            .collect::<Result<Vec<_>>>()?;
        lats.sort_by(|a, b| b.downstream.len().cmp(&a.downstream.len()));
        let mut plan = vec![self.head_sensor()];
        plan.extend(lats.into_iter().take(kappa - 1));
        Ok(plan)
    }
}
