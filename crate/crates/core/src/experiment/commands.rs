//! File-level commands: each reads its inputs from disk, writes its outputs
//! under the experiment directory and refreshes the manifests.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::files::{self, RunRecord, StoredMeasurements};
use super::{Evaluation, ExperimentConfig, SweepParameter};
use crate::apps::{ev_truth, roc_sweep};
use crate::error::{Error, Result};
use crate::recover::{RecoverySolution, SolverMode};
use crate::synth::{recovery_operator, MeasurementSet, Scenario};

fn record(cfg: &ExperimentConfig, out: &Path, command: &str) -> Result<()> {
    files::update_manifests(
        out,
        command,
        RunRecord {
            config_sha256: cfg.sha256()?,
            seed: cfg.scenario.seed,
        },
    )
}

fn mkdir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p)?;
    Ok(())
}

/// Generates a scenario into `out/truth` and `out/measurements`.
pub fn cmd_synth(cfg: &ExperimentConfig, base_dir: &Path, out: &Path) -> Result<Scenario> {
    cfg.validate()?;
    let feeder = cfg.build_feeder(base_dir)?;
    let sc = cfg.simulate(&feeder)?;
    mkdir(out)?;
    let m = &sc.measurements;
    files::write_truth(&out.join("truth"), &sc.truth, &m.z_clean)?;
    files::write_measurements(
        &out.join("measurements"),
        &StoredMeasurements {
            gamma: m.gamma.clone(),
            gamma_bound: m.gamma_bound.clone(),
            z: m.z.clone(),
            z_bound: m.z_bound.clone(),
            averaging: m.averaging.clone(),
            sensors: m.sensors.clone(),
            pv_capacity: sc.truth.pv_capacity.clone(),
        },
    )?;
    record(cfg, out, "synth")?;
    Ok(sc)
}

/// Measurement set with `H` rebuilt from the configured feeder.
pub fn load_measurements(cfg: &ExperimentConfig, base_dir: &Path, dir: &Path) -> Result<(MeasurementSet, Vec<f64>)> {
    let s = files::read_measurements(dir)?;
    let feeder = cfg.build_feeder(base_dir)?;
    if feeder.model.n_loads() != s.averaging.houses() {
        return Err(Error::dim(format!(
            "measurements cover {} houses but the feeder has {}",
            s.averaging.houses(),
            feeder.model.n_loads()
        )));
    }
    let h = recovery_operator(
        &feeder.model,
        &s.sensors,
        &s.gamma,
        &s.averaging,
        cfg.scenario.linearization,
    )?;
    Ok((
        MeasurementSet {
            gamma: s.gamma,
            averaging: s.averaging,
            z_clean: s.z.clone(),
            z: s.z,
            gamma_bound: s.gamma_bound,
            z_bound: s.z_bound,
            h,
            sensors: s.sensors,
        },
        s.pv_capacity,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoverTiming {
    pub mode: SolverMode,
    pub houses: usize,
    pub minutes: usize,
    pub sensors: usize,
    pub iterations: usize,
    pub wall_time_s: f64,
}

/// Solves the recovery on `measurements` (default `out/measurements`) into
/// `out/solution`. A run that stops at the iteration cap still succeeds;
/// its diagnostics say so.
pub fn cmd_recover(
    cfg: &ExperimentConfig,
    base_dir: &Path,
    measurements: Option<&Path>,
    out: &Path,
) -> Result<RecoverySolution> {
    cfg.validate()?;
    let mdir = measurements.map(Path::to_path_buf).unwrap_or_else(|| out.join("measurements"));
    let (m, pv_capacity) = load_measurements(cfg, base_dir, &mdir)?;
    let u = (cfg.recovery.mode == SolverMode::Rank1).then_some(pv_capacity.as_slice());
    let sol = cfg.recover(&m, u)?;
    mkdir(out)?;
    files::write_solution(&out.join("solution"), &sol)?;
    let tdir = out.join(files::TIMING_DIR);
    mkdir(&tdir)?;
    files::write_json(
        &tdir.join("recover.json"),
        &RecoverTiming {
            mode: cfg.recovery.mode,
            houses: m.averaging.houses(),
            minutes: m.averaging.minutes,
            sensors: m.sensors.len(),
            iterations: sol.diagnostics.iterations,
            wall_time_s: sol.diagnostics.wall_time_s,
        },
    )?;
    record(cfg, out, "recover")?;
    Ok(sol)
}

#[derive(Serialize)]
struct RocRow {
    fraction: f64,
    threshold_w: f64,
    tpr: f64,
    fpr: f64,
}

#[derive(Serialize)]
struct PatternRow {
    minute: usize,
    rho: f64,
    rho_filtered: f64,
    truth: Option<f64>,
}

#[derive(Serialize)]
struct SolarRow {
    minute: usize,
    phase_a: f64,
    phase_b: f64,
    phase_c: f64,
    total: f64,
    truth: Option<f64>,
}

/// Evaluates `out/solution` (or `solution`) against the measurements and,
/// when present, the ground truth. Detection needs the truth; without it
/// only the solar analysis runs.
pub fn cmd_evaluate(
    cfg: &ExperimentConfig,
    solution: Option<&Path>,
    measurements: Option<&Path>,
    truth: Option<&Path>,
    out: &Path,
) -> Result<Evaluation> {
    cfg.validate()?;
    let sdir = solution.map(Path::to_path_buf).unwrap_or_else(|| out.join("solution"));
    let mdir = measurements.map(Path::to_path_buf).unwrap_or_else(|| out.join("measurements"));
    let sol = files::read_solution(&sdir)?;
    let m = files::read_measurements(&mdir)?;
    let tdir: Option<PathBuf> = match truth {
        Some(t) => {
            files::require(&t.join("truth.json"), "truth")?;
            Some(t.to_path_buf())
        }
        None => Some(out.join("truth")).filter(|t| t.join("truth.json").is_file()),
    };
    let gt = tdir.as_deref().map(files::read_truth).transpose()?;
    if sol.dp.shape() != (m.averaging.houses(), m.averaging.minutes) {
        return Err(Error::dim("solution and measurements disagree in size"));
    }

    let ev = cfg.evaluate(&sol, &m.z, &m.sensors, gt.as_ref())?;
    let edir = out.join("evaluation");
    mkdir(&edir)?;
    files::write_json(&edir.join("evaluation.json"), &ev)?;

    if let Some(d) = &ev.detection {
        let rating = cfg.ev_rating();
        let rows: Vec<RocRow> = d
            .roc
            .points
            .iter()
            .map(|p| RocRow {
                fraction: p.fraction,
                threshold_w: p.fraction * rating,
                tpr: p.tpr,
                fpr: p.fpr,
            })
            .collect();
        files::write_records(&edir.join("roc.csv"), &rows)?;
        files::write_records(&edir.join("detections.csv"), &d.events)?;
    }
    if let Some(s) = &ev.solar {
        let rows: Vec<PatternRow> = (0..s.rho.len())
            .map(|t| PatternRow {
                minute: t,
                rho: s.rho[t],
                rho_filtered: s.rho_filtered[t],
                truth: s.truth_pattern.as_ref().map(|p| p[t]),
            })
            .collect();
        files::write_records(&edir.join("pattern.csv"), &rows)?;
        if let Some(b) = &s.btm {
            let rows: Vec<SolarRow> = (0..b.total.len())
                .map(|t| SolarRow {
                    minute: t,
                    phase_a: b.phases[0].solar[t],
                    phase_b: b.phases[1].solar[t],
                    phase_c: b.phases[2].solar[t],
                    total: b.total[t],
                    truth: b.truth_total.as_ref().map(|p| p[t]),
                })
                .collect();
            files::write_records(&edir.join("solar.csv"), &rows)?;
        }
    }
    for n in &ev.notices {
        eprintln!("notice: {n}");
    }

    let timing = out.join(files::TIMING_DIR).join("recover.json");
    if timing.is_file() {
        let t: RecoverTiming = files::read_json(&timing)?;
        files::write_records(&out.join(files::TIMING_DIR).join("runtime.csv"), &[t])?;
    }
    record(cfg, out, "evaluate")?;
    Ok(ev)
}

/// One recovery of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: SweepParameter,
    pub value: f64,
    pub seed: u64,
    pub kappa: usize,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    pub support: usize,
    /// `‖X̂ − X‖_F / ‖X‖_F`.
    pub rel_error: f64,
    pub max_tpr: Option<f64>,
    #[serde(skip)]
    pub wall_time_s: f64,
}

#[derive(Serialize)]
struct SweepTiming {
    parameter: SweepParameter,
    value: f64,
    seed: u64,
    iterations: usize,
    wall_time_s: f64,
}

/// Recovers a fresh scenario per grid point and replicate, writing
/// `sweep.csv` and `timing/sweep_runtime.csv`.
pub fn cmd_sweep(cfg: &ExperimentConfig, base_dir: &Path, out: &Path) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let feeder = cfg.build_feeder(base_dir)?;
    let points: Vec<(f64, ExperimentConfig)> = match cfg.sweep.parameter {
        SweepParameter::Kappa => cfg
            .sweep
            .kappas
            .iter()
            .map(|&k| {
                let mut c = cfg.clone();
                c.scenario.kappa = k;
                (k as f64, c)
            })
            .collect(),
        SweepParameter::Lambda => cfg
            .sweep
            .lambda_factors
            .iter()
            .map(|&f| {
                let mut c = cfg.clone();
                c.recovery.lambda = Some(f * cfg.lambda());
                (f, c)
            })
            .collect(),
    };
    if points.is_empty() {
        return Err(Error::config("sweep: empty grid"));
    }
    let mut rows = Vec::new();
    for (value, point) in &points {
        for r in 0..cfg.sweep.replicates {
            let mut c = point.clone();
            c.scenario.seed = cfg.scenario.seed + r as u64;
            let sc = c.simulate(&feeder)?;
            let u = (c.recovery.mode == SolverMode::Rank1).then_some(sc.truth.pv_capacity.as_slice());
            let sol = c.recover(&sc.measurements, u)?;
            let x = sc.truth.loads.stacked();
            let rel_error = (sol.x_hat() - &x).norm() / x.norm().max(f64::MIN_POSITIVE);
            let markers = ev_truth(&sc.truth);
            let max_tpr = if markers.is_empty() {
                None
            } else {
                Some(
                    roc_sweep(
                        &sol.dp,
                        &markers,
                        c.ev_rating(),
                        &c.apps.fractions,
                        c.apps.tolerance,
                        c.min_gap(),
                    )?
                    .max_tpr(),
                )
            };
            rows.push(SweepRow {
                parameter: cfg.sweep.parameter,
                value: *value,
                seed: c.scenario.seed,
                kappa: c.scenario.kappa,
                lambda: c.lambda(),
                iterations: sol.diagnostics.iterations,
                converged: sol.diagnostics.converged,
                support: sol.diagnostics.support,
                rel_error,
                max_tpr,
                wall_time_s: sol.diagnostics.wall_time_s,
            });
        }
    }
    mkdir(out)?;
    files::write_records(&out.join("sweep.csv"), &rows)?;
    let tdir = out.join(files::TIMING_DIR);
    mkdir(&tdir)?;
    let timing: Vec<SweepTiming> = rows
        .iter()
        .map(|r| SweepTiming {
            parameter: r.parameter,
            value: r.value,
            seed: r.seed,
            iterations: r.iterations,
            wall_time_s: r.wall_time_s,
        })
        .collect();
    files::write_records(&tdir.join("sweep_runtime.csv"), &timing)?;
    record(cfg, out, "sweep")?;
    Ok(rows)
}
