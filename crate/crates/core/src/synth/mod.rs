//! Synthetic ground truth (base load, sparse appliance and EV events,
//! rank-one PV, optional HVAC cycling) and its noisy smart-meter and
//! feeder-level observations.

pub mod config;
pub mod generate;
pub mod io;
pub mod sample;

pub use config::{
    ApplianceConfig, EvConfig, EventKind, EventSpec, HvacConfig, Linearization, MeterConfig, NoiseConfig, PvConfig,
    PvPattern, ScenarioConfig,
};
pub use generate::{generate_ground_truth, solar_pattern, GroundTruth, LoadEvent, LoadMatrix};
pub use sample::{
    calibrate_bounds, meter_schedule, recovery_operator, sample_feeder_sensors, sample_smart_meters, simulate,
    AveragingOperator, MeasurementSet, Scenario, SensorOperator,
};
