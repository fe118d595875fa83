//! Joint spatio-temporal recovery of residential loads from feeder-level
//! (D-PMU) and smart-meter measurements.
//!
//! The crate is organised bottom-up:
//!
//! - [`feeder`]: multiphase feeder description, Ybus assembly, fixed-point
//!   linearization and the measurement operator `H`.
//! - [`powerflow`]: nonlinear fixed-point power flow used to synthesize data.
//! - [`synth`]: ground-truth load matrices and noisy measurements.
//! - [`recover`]: low-rank plus jointly sparse recovery by ADMM.
//! - [`apps`]: EV event detection, solar-pattern extraction and behind-the-meter
//!   solar disaggregation.
//! - [`experiment`]: the reproducible synth/recover/evaluate pipeline behind
//!   the `gridedge` binary.

pub mod apps;
pub mod error;
pub mod experiment;
pub mod feeder;
pub mod linalg;
pub mod powerflow;
pub mod recover;
pub mod synth;

pub use error::{Error, Result};
