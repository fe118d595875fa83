//! Nonlinear multiphase power flow by fixed-point (Z-bus) iteration,
//! used to synthesize ground-truth feeder measurements.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::feeder::{AdmittanceModel, SensorPlacement};
use crate::linalg::CVector;

/// Complex nodal power injections over the non-reference nodes, in VA.
/// Loads appear with negative real part.
#[derive(Clone, Debug, PartialEq)]
pub struct InjectionVector(pub CVector);

#[derive(Clone, Debug)]
pub struct VoltageProfile {
    pub v: CVector,
    pub iterations: usize,
    /// Largest nodal power mismatch in VA.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct PowerFlowOptions {
    /// Mismatch tolerance in per unit of the feeder's power base.
    pub tol_pu: f64,
    pub max_iter: usize,
}

impl Default for PowerFlowOptions {
    fn default() -> Self {
        Self {
            tol_pu: 1e-9,
            max_iter: 100,
        }
    }
}

/// Largest entry of `|diag(v)·conj(Y_L·[v0; v]) − s|`.
pub fn power_mismatch(adm: &AdmittanceModel, v0: &CVector, v: &CVector, s: &CVector) -> f64 {
    let full = adm.stack(v0, v);
    let i = &adm.yl * full;
    v.iter()
        .zip(i.iter())
        .zip(s.iter())
        .map(|((vk, ik), sk)| (vk * ik.conj() - sk).norm())
        .fold(0.0, f64::max)
}

/// Iterates `v ← Y_LL⁻¹·(conj(s ./ v) − Y_L0·v0)` from the zero-load voltage
/// until the power mismatch drops below `opts.tol_pu`.
pub fn solve_fixed_point(
    adm: &AdmittanceModel,
    inj: &InjectionVector,
    v0: &[Complex64; 3],
    opts: &PowerFlowOptions,
) -> Result<VoltageProfile> {
    match iterate(adm, inj, v0, opts) {
        Ok(profile) => Ok(profile),
        Err(Error::Divergence {
            iterations, residual, ..
        }) => Err(Error::Divergence {
            iterations,
            residual,
            critical_loading: critical_loading(adm, inj, v0, opts),
        }),
        Err(e) => Err(e),
    }
}

fn iterate(
    adm: &AdmittanceModel,
    inj: &InjectionVector,
    v0: &[Complex64; 3],
    opts: &PowerFlowOptions,
) -> Result<VoltageProfile> {
    if !(opts.tol_pu > 0.0) {
        return Err(Error::config("power-flow tolerance must be positive"));
    }
    let s = &inj.0;
    if s.len() != adm.n_pq() {
        return Err(Error::dim(format!(
            "injection vector has {} entries, expected {}",
            s.len(),
            adm.n_pq()
        )));
    }
    let v0 = adm.reference_voltage(v0);
    let offset = -(adm.yl0() * &v0);
    let factor = adm.yll_factor();
    let tol = opts.tol_pu * adm.base_power_va;

    let mut v = factor.solve(&offset);
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let mut rhs = offset.clone();
        for k in 0..v.len() {
            if s[k] != Complex64::new(0.0, 0.0) {
                if v[k].norm() == 0.0 {
                    return Err(Error::Numerical(format!("zero voltage iterate at node {k}")));
                }
                rhs[k] += (s[k] / v[k]).conj();
            }
        }
        v = factor.solve(&rhs);
        residual = power_mismatch(adm, &v0, &v, s);
        if !residual.is_finite() {
            break;
        }
        if residual <= tol {
            return Ok(VoltageProfile {
                v,
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::Divergence {
        iterations: opts.max_iter,
        residual,
        critical_loading: f64::NAN,
    })
}

/// Bisects the largest multiplier of `inj` in (0, 1] for which the
/// iteration still converges.
fn critical_loading(
    adm: &AdmittanceModel,
    inj: &InjectionVector,
    v0: &[Complex64; 3],
    opts: &PowerFlowOptions,
) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..12 {
        let mid = 0.5 * (lo + hi);
        let scaled = InjectionVector(inj.0.map(|z| z * mid));
        if iterate(adm, &scaled, v0, opts).is_ok() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Readings of `sensors` for a converged profile: six entries per sensor,
/// `[P_a, P_b, P_c, Q_a, Q_b, Q_c]`, with power flowing away from the head
/// counted positive. Absent phases read zero.
pub fn feeder_quantities(
    adm: &AdmittanceModel,
    v0: &[Complex64; 3],
    profile: &VoltageProfile,
    sensors: &[SensorPlacement],
) -> Result<Vec<f64>> {
    if profile.v.len() != adm.n_pq() {
        return Err(Error::dim("voltage profile does not match the feeder"));
    }
    let full = adm.stack(&adm.reference_voltage(v0), &profile.v);
    let mut out = vec![0.0; 6 * sensors.len()];
    for (si, sensor) in sensors.iter().enumerate() {
        let rs = adm.resolve_sensor(sensor)?;
        let current = &rs.rows * &full;
        for (a, phase) in rs.phases.iter().enumerate() {
            let s = full[rs.upstream_nodes[a]] * current[a].conj();
            out[6 * si + phase.index()] = s.re;
            out[6 * si + 3 + phase.index()] = s.im;
        }
    }
    Ok(out)
}
