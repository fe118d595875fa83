use serde::{Deserialize, Serialize};

use super::difference::DifferenceOperator;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::synth::{AveragingOperator, MeasurementSet, SensorOperator};

/// `λ = 0.05·√(1440 / T)`: the `1/√T` scaling anchored at one day of minutes.
pub fn default_lambda(t: usize) -> f64 {
    0.05 * (1440.0 / t as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    /// Nuclear-norm regularized low-rank component.
    Full,
    /// `K = u·vᵀ` with known `u`, ridge on `v`.
    Rank1,
}

/// Inputs of the recovery: smart-meter and feeder measurements, their bounds
/// and operators, and the regularization weights.
#[derive(Clone, Debug)]
pub struct RecoveryProblem {
    /// `2N × T_s`.
    pub gamma: Matrix,
    pub averaging: AveragingOperator,
    /// `m × T`; `m = 0` when no feeder sensor is placed.
    pub z: Matrix,
    pub h: SensorOperator,
    pub gamma_bound: Matrix,
    pub z_bound: Matrix,
    pub lambda: f64,
    pub diff: DifferenceOperator,
    /// Relative PV capacities (watts) for the rank-one mode.
    pub u: Option<Vec<f64>>,
    /// Reactive-to-active ratio `γ` of a low-rank term added to `Q`.
    pub q_low_rank: Option<f64>,
    /// Constrain `Q̂ ≥ 0`.
    pub nonnegative_q: bool,
}

impl RecoveryProblem {
    pub fn from_measurements(m: &MeasurementSet, lambda: f64) -> Self {
        Self {
            gamma: m.gamma.clone(),
            averaging: m.averaging.clone(),
            z: m.z.clone(),
            h: m.h.clone(),
            gamma_bound: m.gamma_bound.clone(),
            z_bound: m.z_bound.clone(),
            lambda,
            diff: DifferenceOperator::new(m.averaging.minutes),
            u: None,
            q_low_rank: None,
            nonnegative_q: false,
        }
    }

    pub fn with_u(mut self, u: Vec<f64>) -> Self {
        self.u = Some(u);
        self
    }

    pub fn houses(&self) -> usize {
        self.averaging.houses()
    }

    pub fn minutes(&self) -> usize {
        self.diff.t
    }

    pub fn validate(&self) -> Result<()> {
        let (n, t) = (self.houses(), self.minutes());
        if !(self.lambda > 0.0) {
            return Err(Error::config("lambda must be positive"));
        }
        if self.averaging.minutes != t {
            return Err(Error::dim("averaging operator and horizon disagree"));
        }
        if self.gamma.shape() != (2 * n, self.averaging.windows) {
            return Err(Error::dim(format!(
                "smart-meter matrix is {:?}, expected {:?}",
                self.gamma.shape(),
                (2 * n, self.averaging.windows)
            )));
        }
        if self.gamma_bound.shape() != self.gamma.shape() {
            return Err(Error::dim("smart-meter bounds do not match the readings"));
        }
        if self.z.ncols() != t || self.z.nrows() != self.h.rows() {
            return Err(Error::dim(format!(
                "feeder matrix is {:?}, expected {:?}",
                self.z.shape(),
                (self.h.rows(), t)
            )));
        }
        if self.h.rows() > 0 && self.h.cols() != 2 * n {
            return Err(Error::dim("measurement operator needs 2N columns"));
        }
        if let SensorOperator::PerWindow { interval, mats } = &self.h {
            if *interval == 0 || mats.len() * interval < t {
                return Err(Error::dim("per-window operators do not cover the horizon"));
            }
        }
        if self.z_bound.shape() != self.z.shape() {
            return Err(Error::dim("feeder bounds do not match the readings"));
        }
        if self.gamma_bound.iter().chain(self.z_bound.iter()).any(|&b| !(b > 0.0)) {
            return Err(Error::config("error bounds must be strictly positive"));
        }
        if let Some(u) = &self.u {
            if u.len() != n {
                return Err(Error::dim("u needs one entry per house"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoveryOptions {
    /// Relative primal and dual tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial penalty.
    pub rho: f64,
    /// Over-relaxation factor in `(0, 2)`.
    pub relaxation: f64,
    /// Residual balancing (×2 / ÷2 when the residual ratio exceeds 10).
    pub adaptive_rho: bool,
    /// Iterations between balancing checks.
    pub balance_every: usize,
    /// Relative tolerance of the inner conjugate-gradient solve.
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// Penalty weight of the smart-meter constraint copies.
    pub sigma_meter: f64,
    /// Penalty weight of the feeder constraint copies.
    pub sigma_feeder: f64,
    /// Groups below this fraction of the largest group norm are zeroed.
    pub threshold_floor: f64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iter: 2000,
            rho: 1.0,
            relaxation: 1.0,
            adaptive_rho: true,
            balance_every: 10,
            cg_tol: 1e-8,
            cg_max_iter: 200,
            sigma_meter: 1.0,
            sigma_feeder: 1.0,
            threshold_floor: 1e-6,
        }
    }
}

/// Per-run solver record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub mode: SolverMode,
    pub iterations: usize,
    pub converged: bool,
    pub not_converged: bool,
    /// Relative primal residual per iteration.
    pub primal_trace: Vec<f64>,
    /// Relative dual residual per iteration.
    pub dual_trace: Vec<f64>,
    pub objective_trace: Vec<f64>,
    pub rho_final: f64,
    pub cg_iterations: usize,
    /// Largest `|Γ − X̂A| / ℰ` and `|Z − HX̂| / E` of the returned solution.
    pub meter_violation: f64,
    pub feeder_violation: f64,
    /// Set when the constraints look mutually inconsistent.
    pub infeasibility_warning: bool,
    pub support: usize,
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl Diagnostics {
    /// Largest of the final relative primal and dual residuals.
    pub fn final_residual(&self) -> f64 {
        let p = self.primal_trace.last().copied().unwrap_or(f64::INFINITY);
        let d = self.dual_trace.last().copied().unwrap_or(f64::INFINITY);
        p.max(d)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Debug)]
pub struct RecoverySolution {
    /// Low-rank difference-domain component, `N × T`.
    pub k: Matrix,
    /// `u` and `v` of `K = u·vᵀ` in rank-one mode.
    pub u: Option<Vec<f64>>,
    pub v: Option<Vec<f64>>,
    pub dp: Matrix,
    pub dq: Matrix,
    /// `(K + Dᴾ)·U`.
    pub p_hat: Matrix,
    /// `(Dᵠ + γK)·U`.
    pub q_hat: Matrix,
    pub diagnostics: Diagnostics,
}

impl RecoverySolution {
    /// `[P̂; Q̂]`.
    pub fn x_hat(&self) -> Matrix {
        let (n, t) = self.p_hat.shape();
        let mut x = Matrix::zeros(2 * n, t);
        x.rows_mut(0, n).copy_from(&self.p_hat);
        x.rows_mut(n, n).copy_from(&self.q_hat);
        x
    }

    /// Number of nonzero `(n, t)` groups of `D̂`.
    pub fn support(&self) -> usize {
        self.dp
            .iter()
            .zip(self.dq.iter())
            .filter(|(p, q)| **p != 0.0 || **q != 0.0)
            .count()
    }
}
