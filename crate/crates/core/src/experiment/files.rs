//! On-disk layout of an experiment directory.
//!
//! ```text
//! truth/         loads.csv pv.csv feeder_clean.csv events.csv truth.json
//! measurements/  gamma.csv gamma_bound.csv z.csv z_bound.csv meters.json sensors.json pv_capacity.json
//! solution/      k.csv dp.csv dq.csv p_hat.csv q_hat.csv [factors.json] diagnostics.json
//! evaluation/    evaluation.json roc.csv detections.csv pattern.csv solar.csv
//! sweep.csv
//! timing/        wall-clock records with their own manifest.json
//! manifest.json  SHA-256 of every other file
//! ```
//!
//! Everything outside `timing/` is a deterministic function of the
//! configuration and seed.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::feeder::SensorPlacement;
use crate::linalg::Matrix;
use crate::recover::{Diagnostics, RecoverySolution};
use crate::synth::io::{load_labels, read_matrix_csv, sensor_labels, write_matrix_csv};
use crate::synth::{AveragingOperator, GroundTruth, LoadEvent, LoadMatrix};

pub const MANIFEST: &str = "manifest.json";
pub const TIMING_DIR: &str = "timing";

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Fails with a configuration error naming `what` when `path` is absent.
pub fn require(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::config(format!("{what}: {} not found", path.display())))
    }
}

pub fn write_records<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn mkdir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn row_labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeterSchedule {
    pub minutes: usize,
    pub interval: usize,
    pub offsets: Vec<usize>,
}

impl MeterSchedule {
    pub fn from_operator(a: &AveragingOperator) -> Self {
        Self {
            minutes: a.minutes,
            interval: a.interval,
            offsets: a.offsets.clone(),
        }
    }

    pub fn operator(&self) -> Result<AveragingOperator> {
        if self.offsets.iter().all(|o| *o == 0) {
            AveragingOperator::synchronous(self.minutes, self.interval, self.offsets.len())
        } else {
            AveragingOperator::asynchronous(self.minutes, self.interval, self.offsets.clone())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct PvCapacity {
    watts: Vec<f64>,
}

/// Measurements as stored on disk; `H` is rebuilt from the feeder.
#[derive(Clone, Debug)]
pub struct StoredMeasurements {
    pub gamma: Matrix,
    pub gamma_bound: Matrix,
    pub z: Matrix,
    pub z_bound: Matrix,
    pub averaging: AveragingOperator,
    pub sensors: Vec<SensorPlacement>,
    pub pv_capacity: Vec<f64>,
}

pub fn write_measurements(dir: &Path, m: &StoredMeasurements) -> Result<()> {
    mkdir(dir)?;
    let n = m.averaging.houses();
    let k = m.sensors.len();
    let interval = m.averaging.interval;
    write_matrix_csv(dir.join("gamma.csv"), &load_labels(n), &m.gamma, interval)?;
    write_matrix_csv(dir.join("gamma_bound.csv"), &load_labels(n), &m.gamma_bound, interval)?;
    write_matrix_csv(dir.join("z.csv"), &sensor_labels(k), &m.z, 1)?;
    write_matrix_csv(dir.join("z_bound.csv"), &sensor_labels(k), &m.z_bound, 1)?;
    write_json(&dir.join("meters.json"), &MeterSchedule::from_operator(&m.averaging))?;
    write_json(&dir.join("sensors.json"), &m.sensors)?;
    write_json(
        &dir.join("pv_capacity.json"),
        &PvCapacity {
            watts: m.pv_capacity.clone(),
        },
    )
}

pub fn read_measurements(dir: &Path) -> Result<StoredMeasurements> {
    for f in ["gamma.csv", "gamma_bound.csv", "z.csv", "z_bound.csv", "meters.json", "sensors.json"] {
        require(&dir.join(f), "measurements")?;
    }
    let (_, gamma) = read_matrix_csv(dir.join("gamma.csv"))?;
    let (_, gamma_bound) = read_matrix_csv(dir.join("gamma_bound.csv"))?;
    let (_, z) = read_matrix_csv(dir.join("z.csv"))?;
    let (_, z_bound) = read_matrix_csv(dir.join("z_bound.csv"))?;
    let schedule: MeterSchedule = read_json(&dir.join("meters.json"))?;
    let sensors: Vec<SensorPlacement> = read_json(&dir.join("sensors.json"))?;
    let averaging = schedule.operator()?;
    let n = averaging.houses();
    let pv_path = dir.join("pv_capacity.json");
    let pv_capacity = if pv_path.is_file() {
        read_json::<PvCapacity>(&pv_path)?.watts
    } else {
        vec![0.0; n]
    };
    if gamma.shape() != (2 * n, averaging.windows) || gamma_bound.shape() != gamma.shape() {
        return Err(Error::dim(format!(
            "smart-meter data is {:?}; the meter schedule implies {:?}",
            gamma.shape(),
            (2 * n, averaging.windows)
        )));
    }
    if z.shape() != (6 * sensors.len(), averaging.minutes) || z_bound.shape() != z.shape() {
        return Err(Error::dim(format!(
            "feeder data is {:?}; {} sensors over {} minutes expected",
            z.shape(),
            sensors.len(),
            averaging.minutes
        )));
    }
    if pv_capacity.len() != n {
        return Err(Error::dim("pv_capacity: one entry per house is required"));
    }
    Ok(StoredMeasurements {
        gamma,
        gamma_bound,
        z,
        z_bound,
        averaging,
        sensors,
        pv_capacity,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct TruthSummary {
    base: Vec<(f64, f64)>,
    pv_capacity: Vec<f64>,
    pattern: Vec<f64>,
    hvac_period: Option<usize>,
}

pub fn write_truth(dir: &Path, gt: &GroundTruth, z_clean: &Matrix) -> Result<()> {
    mkdir(dir)?;
    let n = gt.loads.houses();
    write_matrix_csv(dir.join("loads.csv"), &load_labels(n), &gt.loads.stacked(), 1)?;
    write_matrix_csv(dir.join("pv.csv"), &row_labels("P", n), &gt.pv, 1)?;
    if let Some(h) = &gt.hvac {
        write_matrix_csv(dir.join("hvac.csv"), &load_labels(n), &h.stacked(), 1)?;
    }
    write_matrix_csv(
        dir.join("feeder_clean.csv"),
        &sensor_labels(z_clean.nrows() / 6),
        z_clean,
        1,
    )?;
    write_records(&dir.join("events.csv"), &gt.events)?;
    write_json(
        &dir.join("truth.json"),
        &TruthSummary {
            base: gt.base.clone(),
            pv_capacity: gt.pv_capacity.clone(),
            pattern: gt.pattern.clone(),
            hvac_period: gt.hvac_period,
        },
    )
}

pub fn read_truth(dir: &Path) -> Result<GroundTruth> {
    for f in ["loads.csv", "pv.csv", "events.csv", "truth.json"] {
        require(&dir.join(f), "truth")?;
    }
    let (_, x) = read_matrix_csv(dir.join("loads.csv"))?;
    let (_, pv) = read_matrix_csv(dir.join("pv.csv"))?;
    let hvac_path = dir.join("hvac.csv");
    let hvac = if hvac_path.is_file() {
        Some(LoadMatrix::from_stacked(&read_matrix_csv(hvac_path)?.1)?)
    } else {
        None
    };
    let mut events = Vec::new();
    for rec in csv::Reader::from_path(dir.join("events.csv"))?.deserialize::<LoadEvent>() {
        events.push(rec?);
    }
    let s: TruthSummary = read_json(&dir.join("truth.json"))?;
    Ok(GroundTruth {
        loads: LoadMatrix::from_stacked(&x)?,
        base: s.base,
        pv,
        pv_capacity: s.pv_capacity,
        pattern: s.pattern,
        hvac,
        hvac_period: s.hvac_period,
        events,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Factors {
    u: Vec<f64>,
    v: Vec<f64>,
}

pub fn write_solution(dir: &Path, s: &RecoverySolution) -> Result<()> {
    mkdir(dir)?;
    let n = s.k.nrows();
    write_matrix_csv(dir.join("k.csv"), &row_labels("K", n), &s.k, 1)?;
    write_matrix_csv(dir.join("dp.csv"), &row_labels("P", n), &s.dp, 1)?;
    write_matrix_csv(dir.join("dq.csv"), &row_labels("Q", n), &s.dq, 1)?;
    write_matrix_csv(dir.join("p_hat.csv"), &row_labels("P", n), &s.p_hat, 1)?;
    write_matrix_csv(dir.join("q_hat.csv"), &row_labels("Q", n), &s.q_hat, 1)?;
    let factors = dir.join("factors.json");
    if let (Some(u), Some(v)) = (&s.u, &s.v) {
        write_json(&factors, &Factors { u: u.clone(), v: v.clone() })?;
    } else if factors.exists() {
        fs::remove_file(&factors)?;
    }
    fs::write(dir.join("diagnostics.json"), s.diagnostics.to_json()? + "\n")?;
    Ok(())
}

pub fn read_solution(dir: &Path) -> Result<RecoverySolution> {
    for f in ["k.csv", "dp.csv", "dq.csv", "p_hat.csv", "q_hat.csv", "diagnostics.json"] {
        require(&dir.join(f), "solution")?;
    }
    let m = |f: &str| read_matrix_csv(dir.join(f)).map(|(_, m)| m);
    let factors_path = dir.join("factors.json");
    let (u, v) = if factors_path.is_file() {
        let f: Factors = read_json(&factors_path)?;
        (Some(f.u), Some(f.v))
    } else {
        (None, None)
    };
    let diagnostics: Diagnostics = read_json(&dir.join("diagnostics.json"))?;
    Ok(RecoverySolution {
        k: m("k.csv")?,
        u,
        v,
        dp: m("dp.csv")?,
        dq: m("dq.csv")?,
        p_hat: m("p_hat.csv")?,
        q_hat: m("q_hat.csv")?,
        diagnostics,
    })
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

/// Provenance record of one command run into the directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_sha256: String,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    /// Keyed by command name.
    pub runs: BTreeMap<String, RunRecord>,
    /// Relative path → SHA-256.
    pub files: BTreeMap<String, String>,
}

fn collect(dir: &Path, root: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let p = e.path();
        if p.is_dir() {
            collect(&p, root, out)?;
        } else {
            out.push(p.strip_prefix(root).expect("walked under root").to_path_buf());
        }
    }
    Ok(())
}

fn rel_key(p: &Path) -> String {
    p.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

/// Rewrites `manifest.json` (every file outside `timing/`) and
/// `timing/manifest.json`, recording `command` in both.
pub fn update_manifests(out: &Path, command: &str, run: RunRecord) -> Result<()> {
    let mut paths = Vec::new();
    collect(out, out, &mut paths)?;
    for (path, timing) in [(out.join(MANIFEST), false), (out.join(TIMING_DIR).join(MANIFEST), true)] {
        let mut m: Manifest = if path.is_file() {
            read_json(&path)?
        } else {
            Manifest::default()
        };
        m.format = "gridedge-manifest/1".to_string();
        m.runs.insert(command.to_string(), run.clone());
        m.files.clear();
        for p in &paths {
            let key = rel_key(p);
            let in_timing = key.starts_with("timing/");
            if in_timing != timing {
                continue;
            }
            let local = if timing { &key["timing/".len()..] } else { key.as_str() };
            if local == MANIFEST {
                continue;
            }
            m.files.insert(local.to_string(), sha256_file(&out.join(p))?);
        }
        if timing && m.files.is_empty() {
            continue;
        }
        if let Some(parent) = path.parent() {
            mkdir(parent)?;
        }
        write_json(&path, &m)?;
    }
    Ok(())
}

/// Hashes of every deterministic file, from a fresh scan.
pub fn deterministic_hashes(out: &Path) -> Result<BTreeMap<String, String>> {
    let mut paths = Vec::new();
    collect(out, out, &mut paths)?;
    let mut h = BTreeMap::new();
    for p in paths {
        let key = rel_key(&p);
        if key.starts_with("timing/") {
            continue;
        }
        h.insert(key, sha256_file(&out.join(&p))?);
    }
    Ok(h)
}
