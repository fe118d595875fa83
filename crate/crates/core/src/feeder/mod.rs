//! Multiphase feeder model: description, nodal admittance, fixed-point
//! linearization and the linear operator of feeder-level power sensors.

pub mod admittance;
pub mod description;
pub mod linearize;
pub mod stock;

pub use admittance::{build_admittance, zero_load_voltage, AdmittanceModel, Node, ResolvedSensor};
pub use description::{
    BusRecord, FeederDescription, LineRecord, LoadRecord, Phase, SensorKind, SensorPlacement, FEEDER_FORMAT,
};
pub use linearize::{
    assemble_measurement_operator, injection_from_demand, linearize, refresh_operating_point, LinearizedModel,
};

use crate::error::Result;
use crate::linalg::CVector;
use crate::powerflow::{self, PowerFlowOptions, VoltageProfile};

/// A validated feeder with its admittance model and zero-load voltage.
#[derive(Clone, Debug)]
pub struct FeederModel {
    pub desc: FeederDescription,
    pub adm: AdmittanceModel,
    pub w: CVector,
}

impl FeederModel {
    pub fn new(desc: FeederDescription) -> Result<Self> {
        let adm = build_admittance(&desc)?;
        let w = zero_load_voltage(&adm, &desc.v0)?;
        Ok(Self { desc, adm, w })
    }

    pub fn n_loads(&self) -> usize {
        self.adm.n_loads()
    }

    /// Nonlinear power flow at demand `x = [p; q]`.
    pub fn solve(&self, x: &[f64], opts: &PowerFlowOptions) -> Result<VoltageProfile> {
        let inj = injection_from_demand(&self.adm, x)?;
        powerflow::solve_fixed_point(&self.adm, &inj, &self.desc.v0, opts)
    }

    /// Sensor readings (six per sensor) for a converged profile.
    pub fn readings(&self, v: &VoltageProfile, sensors: &[SensorPlacement]) -> Result<Vec<f64>> {
        powerflow::feeder_quantities(&self.adm, &self.desc.v0, v, sensors)
    }

    /// Linearization at the zero-load voltage.
    pub fn linearize_flat(&self, sensors: &[SensorPlacement]) -> Result<LinearizedModel> {
        linearize(&self.adm, &self.desc.v0, &self.w)?.with_sensors(&self.adm, sensors)
    }

    /// Linearization at the power-flow solution of demand `x`.
    pub fn linearize_at(
        &self,
        x: &[f64],
        sensors: &[SensorPlacement],
        opts: &PowerFlowOptions,
    ) -> Result<LinearizedModel> {
        let profile = self.solve(x, opts)?;
        linearize(&self.adm, &self.desc.v0, &profile.v)?.with_sensors(&self.adm, sensors)
    }

    pub fn refresh(&self, lin: &LinearizedModel, x_hat: &[f64], opts: &PowerFlowOptions) -> Result<LinearizedModel> {
        refresh_operating_point(&self.adm, &self.desc.v0, lin, x_hat, opts)
    }
}
