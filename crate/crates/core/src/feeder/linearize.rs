use num_complex::Complex64;

use super::admittance::AdmittanceModel;
use super::description::SensorPlacement;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, Matrix, J};
use crate::powerflow::{self, InjectionVector, PowerFlowOptions};

/// Fixed-point linearization `ṽ(x) = w + M·x` around an operating point,
/// together with the stacked real measurement operator `H`.
///
/// `x = [p; q]` is the demand of the `N` load nodes (consumption positive,
/// watts and vars), so `H·X` is directly comparable with head readings that
/// grow with load.
#[derive(Clone, Debug)]
pub struct LinearizedModel {
    pub v0: CVector,
    pub w: CVector,
    pub vbar: CVector,
    pub m: CMatrix,
    pub h: Matrix,
    pub sensors: Vec<SensorPlacement>,
}

impl LinearizedModel {
    pub fn n_loads(&self) -> usize {
        self.m.ncols() / 2
    }

    /// Linearized voltage at demand `x`.
    pub fn voltage(&self, x: &[f64]) -> CVector {
        let mut v = self.w.clone();
        for (k, &xk) in x.iter().enumerate() {
            if xk != 0.0 {
                v.axpy(Complex64::new(xk, 0.0), &self.m.column(k), Complex64::new(1.0, 0.0));
            }
        }
        v
    }

    /// Attaches the measurement operator for `sensors`.
    pub fn with_sensors(mut self, adm: &AdmittanceModel, sensors: &[SensorPlacement]) -> Result<Self> {
        self.h = assemble_measurement_operator(&self, adm, sensors)?;
        self.sensors = sensors.to_vec();
        Ok(self)
    }
}

/// Demand vector `[p; q]` to nodal complex injections (generation positive).
pub fn injection_from_demand(adm: &AdmittanceModel, x: &[f64]) -> Result<InjectionVector> {
    let n = adm.n_loads();
    if x.len() != 2 * n {
        return Err(Error::dim(format!("demand vector has {} entries, expected {}", x.len(), 2 * n)));
    }
    let mut s = CVector::zeros(adm.n_pq());
    for (k, &node) in adm.load_nodes.iter().enumerate() {
        s[node] -= Complex64::new(x[k], x[n + k]);
    }
    Ok(InjectionVector(s))
}

/// Fixed-point linearization at `vbar`:
/// `∂v/∂p = −Y_LL⁻¹·e_k / conj(v̄_k)` and `∂v/∂q = j·Y_LL⁻¹·e_k / conj(v̄_k)`
/// for the node `k` hosting each load.
pub fn linearize(adm: &AdmittanceModel, v0: &[Complex64; 3], vbar: &CVector) -> Result<LinearizedModel> {
    if vbar.len() != adm.n_pq() {
        return Err(Error::dim(format!(
            "operating point has {} entries, expected {}",
            vbar.len(),
            adm.n_pq()
        )));
    }
    if let Some(k) = vbar.iter().position(|z| z.norm() == 0.0) {
        return Err(Error::Numerical(format!("operating-point voltage is zero at node {k}")));
    }
    let w = super::admittance::zero_load_voltage(adm, v0)?;
    let n = adm.n_loads();
    let n_pq = adm.n_pq();

    // columns of Y_LL⁻¹ for the distinct load nodes
    let mut selector = CMatrix::zeros(n_pq, n);
    for (k, &node) in adm.load_nodes.iter().enumerate() {
        selector[(node, k)] = Complex64::new(1.0, 0.0) / vbar[node].conj();
    }
    let zcols = adm.yll_factor().solve_matrix(&selector);
    let mut m = CMatrix::zeros(n_pq, 2 * n);
    m.columns_mut(0, n).copy_from(&(-&zcols));
    m.columns_mut(n, n).copy_from(&(zcols * J));

    Ok(LinearizedModel {
        v0: adm.reference_voltage(v0),
        w,
        vbar: vbar.clone(),
        m,
        h: Matrix::zeros(0, 2 * n),
        sensors: Vec::new(),
    })
}

/// Stacks six real rows per sensor, `[Re s_a, Re s_b, Re s_c, Im s_a, Im s_b, Im s_c]`,
/// of the linear map `x ↦ diag(v_up) · conj(R_L · M · x)`.
///
/// For the feeder head `v_up = v0` and `R_L = Y_0L`, which cancels the
/// zero-load offset. Lateral sensors use the branch rows feeding the lateral
/// and the operating-point voltage at its upstream end.
pub fn assemble_measurement_operator(
    lin: &LinearizedModel,
    adm: &AdmittanceModel,
    sensors: &[SensorPlacement],
) -> Result<Matrix> {
    let n2 = lin.m.ncols();
    let mut h = Matrix::zeros(6 * sensors.len(), n2);
    let v_full = adm.stack(&lin.v0, &lin.vbar);
    for (si, sensor) in sensors.iter().enumerate() {
        let rs = adm.resolve_sensor(sensor)?;
        let rl = rs.rows.columns(adm.n_ref, adm.n_pq()).into_owned();
        let g = rl * &lin.m;
        for (a, phase) in rs.phases.iter().enumerate() {
            let vu = v_full[rs.upstream_nodes[a]];
            let p = phase.index();
            for c in 0..n2 {
                let s = vu * g[(a, c)].conj();
                h[(6 * si + p, c)] = s.re;
                h[(6 * si + 3 + p, c)] = s.im;
            }
        }
    }
    Ok(h)
}

/// Re-solves the power flow at demand `x_hat`, re-linearizes there and
/// reassembles `H` for the sensors already attached to `lin`.
pub fn refresh_operating_point(
    adm: &AdmittanceModel,
    v0: &[Complex64; 3],
    lin: &LinearizedModel,
    x_hat: &[f64],
    opts: &PowerFlowOptions,
) -> Result<LinearizedModel> {
    let inj = injection_from_demand(adm, x_hat)?;
    let profile = powerflow::solve_fixed_point(adm, &inj, v0, opts)?;
    linearize(adm, v0, &profile.v)?.with_sensors(adm, &lin.sensors)
}
