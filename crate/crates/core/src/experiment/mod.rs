//! Reproducible experiments: a versioned TOML configuration, the in-memory
//! synth → recover → evaluate pipeline, and the file-level commands behind
//! the `gridedge` binary.
//!
//! ```toml
//! format = "gridedge-experiment/1"
//!
//! [feeder]
//! kind = "radial"      # or "four-bus", or "file" with `path` and `laterals`
//! laterals = 5
//!
//! [scenario]
//! houses = 10
//! minutes = 480
//! start_minute = 1200
//! kappa = 1
//! ev = { sessions = 5 }
//!
//! [recovery]
//! mode = "full"
//! ```

pub mod commands;
pub mod files;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::apps::{
    bandpass_remove, default_fractions, detect_ev_events, disaggregate_btm, ev_truth, extract_pattern, roc_sweep,
    BtmOptions, DetectedEvent, RocCurve, RocPoint,
};
use crate::error::{Error, Result};
use crate::feeder::{stock, FeederDescription, FeederModel, SensorKind, SensorPlacement};
use crate::linalg::{correlation, Matrix};
use crate::recover::{default_lambda, solve, RecoveryOptions, RecoveryProblem, RecoverySolution, SolverMode};
use crate::synth::{simulate, GroundTruth, MeasurementSet, Scenario, ScenarioConfig};

pub use commands::{cmd_evaluate, cmd_recover, cmd_sweep, cmd_synth, SweepRow};

pub const EXPERIMENT_FORMAT: &str = "gridedge-experiment/1";

/// Which feeder hosts the scenario.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FeederSpec {
    /// The stock four-house, four-bus feeder.
    #[default]
    FourBus,
    /// A stock radial feeder sized to the scenario's house count.
    Radial { laterals: usize },
    /// A feeder description file, relative to the configuration file.
    File {
        path: PathBuf,
        /// Buses eligible for lateral sensors.
        #[serde(default)]
        laterals: Vec<String>,
    },
}

/// A feeder model with the buses that may host lateral sensors.
#[derive(Clone, Debug)]
pub struct BuiltFeeder {
    pub model: FeederModel,
    pub laterals: Vec<String>,
}

impl FeederSpec {
    pub fn build(&self, houses: usize, base_dir: &Path) -> Result<BuiltFeeder> {
        let (desc, laterals) = match self {
            FeederSpec::FourBus => {
                let desc = stock::four_bus();
                let laterals = desc
                    .sensors
                    .iter()
                    .filter(|s| s.kind == SensorKind::LateralPower)
                    .map(|s| s.bus.clone())
                    .collect();
                (desc, laterals)
            }
            FeederSpec::Radial { laterals } => {
                if *laterals == 0 {
                    return Err(Error::config("feeder.laterals: must be positive"));
                }
                let f = stock::radial(houses, *laterals);
                (f.desc, f.laterals)
            }
            FeederSpec::File { path, laterals } => {
                let full = base_dir.join(path);
                if !full.is_file() {
                    return Err(Error::config(format!("feeder.path: {} does not exist", full.display())));
                }
                (FeederDescription::load(&full)?, laterals.clone())
            }
        };
        Ok(BuiltFeeder {
            model: FeederModel::new(desc)?,
            laterals,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoverySettings {
    pub mode: SolverMode,
    /// `None` picks `default_lambda(T)`.
    pub lambda: Option<f64>,
    pub nonnegative_q: bool,
    pub q_low_rank: Option<f64>,
    pub solver: RecoveryOptions,
}

impl Default for RecoverySettings {
    fn default() -> Self {
        Self {
            mode: SolverMode::Full,
            lambda: None,
            nonnegative_q: false,
            q_low_rank: None,
            solver: RecoveryOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppSettings {
    /// Defaults to the scenario's EV rating.
    pub ev_rating: Option<f64>,
    /// Threshold grid as fractions of the EV rating.
    pub fractions: Vec<f64>,
    /// Threshold at which detections are reported.
    pub operating_fraction: f64,
    /// Matching tolerance in minutes.
    pub tolerance: usize,
    /// Merge distance in minutes; defaults to the meter interval.
    pub min_gap: Option<usize>,
    /// Periods removed by the band-pass filter.
    pub period_range: [f64; 2],
    /// Use the filtered pattern for the disaggregation.
    pub filter_pattern: bool,
    /// Night as `[from, to)` hours of day, possibly wrapping midnight;
    /// defaults to the minutes outside the PV day.
    pub night_hours: Option<[f64; 2]>,
    pub btm: BtmOptions,
}

impl Default for AppSettings {
    fn default() -> Self {
        Self {
            ev_rating: None,
            fractions: default_fractions(),
            operating_fraction: 0.5,
            tolerance: 1,
            min_gap: None,
            period_range: [10.0, 35.0],
            filter_pattern: false,
            night_hours: None,
            btm: BtmOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    Kappa,
    Lambda,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub parameter: SweepParameter,
    pub kappas: Vec<usize>,
    /// Multiples of the configured λ.
    pub lambda_factors: Vec<f64>,
    /// Seeds `seed, seed + 1, …` per grid point.
    pub replicates: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            parameter: SweepParameter::Kappa,
            kappas: vec![1, 3, 5, 7],
            lambda_factors: vec![0.2, 1.0, 5.0, 25.0],
            replicates: 1,
        }
    }
}

fn default_format() -> String {
    EXPERIMENT_FORMAT.to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_format")]
    pub format: String,
    #[serde(default)]
    pub feeder: FeederSpec,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub recovery: RecoverySettings,
    #[serde(default)]
    pub apps: AppSettings,
    #[serde(default)]
    pub sweep: SweepSettings,
    /// Output directory; the command line takes precedence.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            format: default_format(),
            feeder: FeederSpec::default(),
            scenario: ScenarioConfig::default(),
            recovery: RecoverySettings::default(),
            apps: AppSettings::default(),
            sweep: SweepSettings::default(),
            output: None,
        }
    }
}

impl ExperimentConfig {
    /// Parses without validating, so command-line overrides can still apply.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    /// Reads a configuration file; missing files are configuration errors.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::config(format!("config file {} not found", path.display())),
            _ => Error::Io(e),
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != EXPERIMENT_FORMAT {
            return Err(Error::config(format!(
                "format: expected {EXPERIMENT_FORMAT:?}, got {:?}",
                self.format
            )));
        }
        self.scenario.validate()?;
        if let Some(l) = self.recovery.lambda {
            if !(l > 0.0) {
                return Err(Error::config("recovery.lambda: must be positive"));
            }
        }
        let a = &self.apps;
        if a.ev_rating.is_some_and(|r| !(r > 0.0)) {
            return Err(Error::config("apps.ev_rating: must be positive"));
        }
        if a.fractions.is_empty() || a.fractions.iter().any(|f| !(*f > 0.0)) || !(a.operating_fraction > 0.0) {
            return Err(Error::config("apps.fractions: thresholds must be positive"));
        }
        let [lo, hi] = a.period_range;
        if !(lo > 0.0 && lo < hi) {
            return Err(Error::config("apps.period_range: must satisfy 0 < min < max"));
        }
        if let Some([from, to]) = a.night_hours {
            if !((0.0..=24.0).contains(&from) && (0.0..=24.0).contains(&to) && from != to) {
                return Err(Error::config("apps.night_hours: hours must lie in [0, 24] and differ"));
            }
        }
        if self.sweep.replicates == 0 {
            return Err(Error::config("sweep.replicates: must be positive"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the effective configuration.
    pub fn sha256(&self) -> Result<String> {
        let json = serde_json::to_vec(self)?;
        Ok(hex::encode(Sha256::digest(&json)))
    }

    pub fn lambda(&self) -> f64 {
        self.recovery.lambda.unwrap_or_else(|| default_lambda(self.scenario.minutes))
    }

    pub fn ev_rating(&self) -> f64 {
        self.apps.ev_rating.unwrap_or(self.scenario.ev.rating)
    }

    pub fn min_gap(&self) -> usize {
        self.apps.min_gap.unwrap_or(self.scenario.meters.interval)
    }

    /// `true` on the minutes treated as having no solar generation.
    pub fn night_mask(&self) -> Vec<bool> {
        match self.apps.night_hours {
            None => self.scenario.daytime_mask().into_iter().map(|d| !d).collect(),
            Some([from, to]) => (0..self.scenario.minutes)
                .map(|t| {
                    let h = ((self.scenario.start_minute + t) % 1440) as f64 / 60.0;
                    if from < to {
                        from <= h && h < to
                    } else {
                        h >= from || h < to
                    }
                })
                .collect(),
        }
    }

    pub fn build_feeder(&self, base_dir: &Path) -> Result<BuiltFeeder> {
        self.feeder.build(self.scenario.houses, base_dir)
    }

    pub fn sensors(&self, feeder: &BuiltFeeder) -> Result<Vec<SensorPlacement>> {
        feeder.model.desc.sensor_plan(self.scenario.kappa, &feeder.laterals)
    }

    /// Ground truth and measurements.
    pub fn simulate(&self, feeder: &BuiltFeeder) -> Result<Scenario> {
        self.validate()?;
        simulate(&self.scenario, &feeder.model, self.sensors(feeder)?)
    }

    pub fn problem(&self, m: &MeasurementSet, pv_capacity: Option<&[f64]>) -> RecoveryProblem {
        let mut p = RecoveryProblem::from_measurements(m, self.lambda());
        p.u = pv_capacity.map(|u| u.to_vec());
        p.nonnegative_q = self.recovery.nonnegative_q;
        p.q_low_rank = self.recovery.q_low_rank;
        p
    }

    pub fn recover(&self, m: &MeasurementSet, pv_capacity: Option<&[f64]>) -> Result<RecoverySolution> {
        solve(
            &self.problem(m, pv_capacity),
            &self.recovery.solver,
            self.recovery.mode,
        )
    }

    /// Detection (when the truth is known) and solar analysis of a recovery.
    /// `z` and `sensors` are the feeder readings used for disaggregation.
    pub fn evaluate(
        &self,
        solution: &RecoverySolution,
        z: &Matrix,
        sensors: &[SensorPlacement],
        truth: Option<&GroundTruth>,
    ) -> Result<Evaluation> {
        let mut notices = Vec::new();
        let a = &self.apps;

        let detection = match truth {
            None => {
                notices.push("no ground truth: EV detection skipped".to_string());
                None
            }
            Some(gt) if ev_truth(gt).is_empty() => {
                notices.push("no EV sessions in the ground truth: detection skipped".to_string());
                None
            }
            Some(gt) => {
                let markers = ev_truth(gt);
                let roc = roc_sweep(
                    &solution.dp,
                    &markers,
                    self.ev_rating(),
                    &a.fractions,
                    a.tolerance,
                    self.min_gap(),
                )?;
                let operating = *roc
                    .at(a.operating_fraction)
                    .ok_or_else(|| Error::config("apps.fractions: empty threshold grid"))?;
                let events = detect_ev_events(&solution.dp, self.ev_rating(), operating.fraction, self.min_gap())?;
                Some(Detection {
                    max_tpr: roc.max_tpr(),
                    operating,
                    roc,
                    events,
                    truth_events: markers.len(),
                })
            }
        };

        let reconstruction_error = truth.map(|gt| {
            let x = gt.loads.stacked();
            (solution.x_hat() - &x).norm() / x.norm().max(f64::MIN_POSITIVE)
        });

        let day = self.scenario.daytime_mask();
        let night = self.night_mask();
        let solar = if self.scenario.pv.fraction == 0.0 || !day.iter().any(|d| *d) {
            notices.push("no PV generation in the scenario: solar analysis skipped".to_string());
            None
        } else {
            match extract_pattern(solution, Some(&day)) {
                Err(e) => {
                    notices.push(format!("solar analysis skipped: {e}"));
                    None
                }
                Ok(pattern) => {
                    let filtered = bandpass_remove(&pattern, a.period_range, Some(&day))?;
                    let truth_pattern = truth.map(|gt| gt.pattern.clone());
                    let corr = truth_pattern.as_ref().map(|p| correlation(&pattern.rho, p));
                    let corr_filtered = truth_pattern.as_ref().map(|p| correlation(&filtered.rho, p));
                    let rho = if a.filter_pattern { &filtered.rho } else { &pattern.rho };
                    let btm = self.disaggregate(rho, z, sensors, &night, truth, &mut notices)?;
                    Some(SolarAnalysis {
                        rho: pattern.rho,
                        rho_filtered: filtered.rho,
                        truth_pattern,
                        corr,
                        corr_filtered,
                        btm,
                    })
                }
            }
        };

        Ok(Evaluation {
            detection,
            solar,
            reconstruction_error,
            notices,
        })
    }

    fn disaggregate(
        &self,
        rho: &[f64],
        z: &Matrix,
        sensors: &[SensorPlacement],
        night: &[bool],
        truth: Option<&GroundTruth>,
        notices: &mut Vec<String>,
    ) -> Result<Option<Disaggregation>> {
        let Some(head) = sensors.iter().position(|s| s.kind == SensorKind::FeederHeadPower) else {
            notices.push("no feeder-head sensor: disaggregation skipped".to_string());
            return Ok(None);
        };
        if !night.iter().any(|n| *n) {
            notices.push("no night minutes in the horizon: disaggregation skipped".to_string());
            return Ok(None);
        }
        let t = rho.len();
        let mut phases = Vec::new();
        let mut total = vec![0.0; t];
        for ph in 0..3 {
            let series: Vec<f64> = z.row(6 * head + ph).iter().copied().collect();
            let fit = disaggregate_btm(&series, rho, night, &self.apps.btm)?;
            for (acc, s) in total.iter_mut().zip(&fit.solar) {
                *acc += s;
            }
            phases.push(PhaseFit {
                phase: ["a", "b", "c"][ph].to_string(),
                alpha: fit.alpha,
                beta: fit.beta,
                iterations: fit.iterations,
                solar: fit.solar,
            });
        }
        let truth_total = truth.map(|gt| gt.total_solar());
        let rms_error = truth_total.as_ref().map(|tr| {
            let peak = tr.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            let mse = total.iter().zip(tr).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / t as f64;
            mse.sqrt() / peak
        });
        Ok(Some(Disaggregation {
            phases,
            total,
            truth_total,
            rms_error,
        }))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Detection {
    pub roc: RocCurve,
    pub max_tpr: f64,
    pub operating: RocPoint,
    /// Detections at the operating threshold.
    pub events: Vec<DetectedEvent>,
    pub truth_events: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseFit {
    pub phase: String,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    #[serde(skip)]
    pub solar: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Disaggregation {
    pub phases: Vec<PhaseFit>,
    /// Feeder-total estimate, watts.
    #[serde(skip)]
    pub total: Vec<f64>,
    #[serde(skip)]
    pub truth_total: Option<Vec<f64>>,
    /// RMS error of the total as a fraction of its true peak.
    pub rms_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolarAnalysis {
    #[serde(skip)]
    pub rho: Vec<f64>,
    #[serde(skip)]
    pub rho_filtered: Vec<f64>,
    #[serde(skip)]
    pub truth_pattern: Option<Vec<f64>>,
    pub corr: Option<f64>,
    pub corr_filtered: Option<f64>,
    pub btm: Option<Disaggregation>,
}

/// Summary of one evaluation; the series go to CSV files.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub detection: Option<Detection>,
    pub solar: Option<SolarAnalysis>,
    pub reconstruction_error: Option<f64>,
    pub notices: Vec<String>,
}
