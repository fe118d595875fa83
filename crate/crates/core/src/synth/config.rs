use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Daily shape of the shared solar pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PvPattern {
    /// Clear-sky bell, a clipped raised cosine.
    Smooth,
    /// The bell modulated by a bounded multiplicative cloud walk.
    Variable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PvConfig {
    /// Fraction of houses with rooftop PV.
    pub fraction: f64,
    /// Peak capacity range in watts, drawn per PV house.
    pub capacity: [f64; 2],
    pub pattern: PvPattern,
    /// Minute of day at which generation starts and ends.
    pub sunrise: f64,
    pub sunset: f64,
    /// Step size of the cloud walk, per minute.
    pub cloud_step: f64,
    /// Lowest clear-sky fraction the cloud walk may reach.
    pub cloud_floor: f64,
}

impl Default for PvConfig {
    fn default() -> Self {
        Self {
            fraction: 0.0,
            capacity: [3000.0, 6000.0],
            pattern: PvPattern::Smooth,
            sunrise: 360.0,
            sunset: 1200.0,
            cloud_step: 0.04,
            cloud_floor: 0.3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvConfig {
    /// Constant charging power in watts.
    pub rating: f64,
    /// Number of charging sessions, one per distinct house.
    pub sessions: usize,
    /// Session start range in minutes from the beginning of the horizon.
    pub start_window: [usize; 2],
    /// Session length range in minutes.
    pub duration: [usize; 2],
}

impl Default for EvConfig {
    fn default() -> Self {
        Self {
            rating: 7000.0,
            sessions: 0,
            start_window: [30, 300],
            duration: [60, 180],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApplianceConfig {
    /// Mean number of events per house per day.
    pub rate_per_day: f64,
    /// Active power range in watts.
    pub rating: [f64; 2],
    /// Duration range in minutes.
    pub duration: [usize; 2],
}

impl Default for ApplianceConfig {
    fn default() -> Self {
        Self {
            rate_per_day: 6.0,
            rating: [300.0, 1800.0],
            duration: [5, 60],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HvacConfig {
    pub enabled: bool,
    /// Range from which the common cycling period (minutes) is drawn.
    pub period: [usize; 2],
    /// Compressor active power in watts.
    pub magnitude: f64,
    /// Fraction of houses with a cycling unit.
    pub fraction: f64,
}

impl Default for HvacConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            period: [20, 30],
            magnitude: 2500.0,
            fraction: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Relative accuracy of smart meters (uniform, ± of the reading).
    pub smart_meter: f64,
    /// Relative accuracy of feeder-level sensors.
    pub dpmu: f64,
    /// Relative width of the feeder-measurement bound, covering sensor noise
    /// and linearization error.
    pub feeder_bound: f64,
    /// Absolute floor on every bound, in watts or vars.
    pub bound_floor: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            smart_meter: 0.002,
            dpmu: 0.0002,
            feeder_bound: 0.002,
            bound_floor: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeterConfig {
    /// Averaging window in minutes.
    pub interval: usize,
    /// Shift every house's windows by its own random offset.
    pub asynchronous: bool,
}

impl Default for MeterConfig {
    fn default() -> Self {
        Self {
            interval: 15,
            asynchronous: false,
        }
    }
}

/// Where the recovery model is linearized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Linearization {
    /// Zero-load voltage.
    FlatStart,
    /// Power flow at the time-averaged smart-meter demand.
    AverageLoading,
    /// One operator per meter window, at that window's smart-meter demand.
    PerWindow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Appliance,
    Ev,
}

/// An explicitly scheduled rectangular load event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    /// Zero-based house index.
    pub house: usize,
    pub start: usize,
    pub end: usize,
    pub dp: f64,
    #[serde(default)]
    pub dq: f64,
    #[serde(default = "default_kind")]
    pub kind: EventKind,
}

fn default_kind() -> EventKind {
    EventKind::Appliance
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub houses: usize,
    pub minutes: usize,
    /// Minute of day of the first column.
    pub start_minute: usize,
    /// Base active load range in watts.
    pub base_load: [f64; 2],
    /// Power-factor range for base load and events.
    pub power_factor: [f64; 2],
    pub pv: PvConfig,
    pub ev: EvConfig,
    pub appliances: ApplianceConfig,
    pub hvac: HvacConfig,
    pub noise: NoiseConfig,
    pub meters: MeterConfig,
    pub linearization: Linearization,
    /// Number of feeder-level sensors: the head, then the largest laterals.
    pub kappa: usize,
    /// Largest number of simultaneously active events per house.
    pub max_overlap: usize,
    pub events: Vec<EventSpec>,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            houses: 4,
            minutes: 240,
            start_minute: 600,
            base_load: [300.0, 800.0],
            power_factor: [0.9, 0.95],
            pv: PvConfig::default(),
            ev: EvConfig::default(),
            appliances: ApplianceConfig::default(),
            hvac: HvacConfig::default(),
            noise: NoiseConfig::default(),
            meters: MeterConfig::default(),
            linearization: Linearization::AverageLoading,
            kappa: 1,
            max_overlap: 2,
            events: Vec::new(),
            seed: 0,
        }
    }
}

fn check(ok: bool, field: &str, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(format!("{field}: {msg}")))
    }
}

fn range_ok(r: [f64; 2]) -> bool {
    r[0].is_finite() && r[1].is_finite() && 0.0 <= r[0] && r[0] <= r[1]
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        check(self.houses > 0, "houses", "must be positive")?;
        check(self.minutes > 0, "minutes", "must be positive")?;
        check(range_ok(self.base_load), "base_load", "must be an ordered nonnegative range")?;
        let pf = self.power_factor;
        check(
            range_ok(pf) && pf[0] > 0.0 && pf[1] <= 1.0,
            "power_factor",
            "must be an ordered range inside (0, 1]",
        )?;
        check(
            (0.0..=1.0).contains(&self.pv.fraction),
            "pv.fraction",
            "must lie in [0, 1]",
        )?;
        check(range_ok(self.pv.capacity), "pv.capacity", "must be an ordered nonnegative range")?;
        check(
            self.pv.sunrise < self.pv.sunset,
            "pv.sunset",
            "must be later than pv.sunrise",
        )?;
        check(
            self.pv.cloud_step >= 0.0 && (0.0..=1.0).contains(&self.pv.cloud_floor),
            "pv.cloud_floor",
            "cloud walk parameters out of range",
        )?;
        check(self.ev.rating > 0.0, "ev.rating", "must be positive")?;
        check(
            self.ev.rating > self.appliances.rating[1],
            "ev.rating",
            "must exceed the largest appliance rating",
        )?;
        check(
            self.ev.sessions <= self.houses,
            "ev.sessions",
            "at most one session per house",
        )?;
        check(
            self.ev.start_window[0] <= self.ev.start_window[1],
            "ev.start_window",
            "must be ordered",
        )?;
        check(
            0 < self.ev.duration[0] && self.ev.duration[0] <= self.ev.duration[1],
            "ev.duration",
            "must be an ordered positive range",
        )?;
        check(
            self.appliances.rate_per_day >= 0.0 && self.appliances.rate_per_day.is_finite(),
            "appliances.rate_per_day",
            "must be nonnegative",
        )?;
        check(
            range_ok(self.appliances.rating),
            "appliances.rating",
            "must be an ordered nonnegative range",
        )?;
        check(
            0 < self.appliances.duration[0] && self.appliances.duration[0] <= self.appliances.duration[1],
            "appliances.duration",
            "must be an ordered positive range",
        )?;
        if self.hvac.enabled {
            check(
                1 < self.hvac.period[0] && self.hvac.period[0] <= self.hvac.period[1],
                "hvac.period",
                "must be an ordered range of at least 2 minutes",
            )?;
            check(self.hvac.magnitude >= 0.0, "hvac.magnitude", "must be nonnegative")?;
            check(
                (0.0..=1.0).contains(&self.hvac.fraction),
                "hvac.fraction",
                "must lie in [0, 1]",
            )?;
        }
        check(
            (0.0..0.5).contains(&self.noise.smart_meter)
                && (0.0..0.5).contains(&self.noise.dpmu)
                && self.noise.feeder_bound >= 0.0,
            "noise",
            "accuracies must lie in [0, 0.5)",
        )?;
        check(self.noise.bound_floor > 0.0, "noise.bound_floor", "must be positive")?;
        check(self.meters.interval > 0, "meters.interval", "must be positive")?;
        if !self.meters.asynchronous {
            check(
                self.minutes % self.meters.interval == 0,
                "meters.interval",
                "must divide the horizon for synchronous meters",
            )?;
        } else {
            check(
                self.minutes >= 2 * self.meters.interval,
                "meters.interval",
                "asynchronous meters need at least two windows",
            )?;
            check(
                self.linearization != Linearization::PerWindow,
                "linearization",
                "per-window linearization needs synchronous meters",
            )?;
        }
        check(self.max_overlap > 0, "max_overlap", "must be positive")?;
        for (i, e) in self.events.iter().enumerate() {
            check(
                e.house < self.houses && e.start < e.end && e.start < self.minutes,
                &format!("events[{i}]"),
                "needs a valid house and start < end inside the horizon",
            )?;
        }
        Ok(())
    }

    /// `true` for the minutes of the horizon that lie between sunrise and sunset.
    pub fn daytime_mask(&self) -> Vec<bool> {
        (0..self.minutes)
            .map(|t| is_daytime(&self.pv, (self.start_minute + t) as f64))
            .collect()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Whether a minute of day lies strictly between sunrise and sunset.
pub(crate) fn is_daytime(cfg: &PvConfig, minute_of_day: f64) -> bool {
    let m = minute_of_day.rem_euclid(1440.0);
    cfg.sunrise < m && m < cfg.sunset
}
