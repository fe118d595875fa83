use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recover::{default_lambda, RecoverySolution};

/// Unit-norm temporal solar pattern, positive on balance over the daytime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolarPattern {
    pub rho: Vec<f64>,
}

impl SolarPattern {
    /// Normalizes `x` and fixes its sign so that its sum over `daytime`
    /// (the whole horizon if `None`) is positive.
    pub fn new(mut x: Vec<f64>, daytime: Option<&[bool]>) -> Result<Self> {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 1e-12) || !norm.is_finite() {
            return Err(Error::Numerical("degenerate solar pattern (zero low-rank part)".into()));
        }
        let day_sum: f64 = match daytime {
            Some(m) => x.iter().zip(m).filter(|(_, d)| **d).map(|(v, _)| v).sum(),
            None => x.iter().sum(),
        };
        let s = if day_sum < 0.0 { -1.0 / norm } else { 1.0 / norm };
        x.iter_mut().for_each(|v| *v *= s);
        Ok(Self { rho: x })
    }
}

/// Pattern of the recovered low-rank component: `v̂ᵀU` in rank-one mode, the
/// first right singular vector of `K̂` through `U` otherwise.
pub fn extract_pattern(solution: &RecoverySolution, daytime: Option<&[bool]>) -> Result<SolarPattern> {
    let mut v = match &solution.v {
        Some(v) => v.clone(),
        None => {
            if solution.k.is_empty() {
                return Err(Error::Numerical("degenerate solar pattern (empty K)".into()));
            }
            let svd = solution.k.clone().svd(false, true);
            let vt = svd
                .v_t
                .ok_or_else(|| Error::Numerical("SVD returned no right singular vectors".into()))?;
            let i = svd.singular_values.imax();
            if svd.singular_values[i] <= 0.0 {
                return Err(Error::Numerical("degenerate solar pattern (zero low-rank part)".into()));
            }
            vt.row(i).iter().copied().collect()
        }
    };
    let mut acc = 0.0;
    for x in v.iter_mut() {
        acc += *x;
        *x = acc;
    }
    SolarPattern::new(v, daytime)
}

/// Zeros every Fourier bin whose period lies in `[p_min, p_max]` minutes and
/// transforms back. The result is not renormalized.
pub fn bandpass_filter(x: &[f64], period: [f64; 2]) -> Result<Vec<f64>> {
    let t = x.len();
    let [lo, hi] = period;
    if !(lo > 0.0 && lo < hi && hi < t as f64) {
        return Err(Error::config(format!(
            "period range must satisfy 0 < min < max < {t}, got [{lo}, {hi}]"
        )));
    }
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(t).process(&mut buf);
    for (k, b) in buf.iter_mut().enumerate().skip(1) {
        let p = t as f64 / k.min(t - k) as f64;
        if lo <= p && p <= hi {
            *b = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(t).process(&mut buf);
    Ok(buf.iter().map(|c| c.re / t as f64).collect())
}

/// Removes a periodic contamination (for instance HVAC cycling) from a
/// pattern and renormalizes.
pub fn bandpass_remove(pattern: &SolarPattern, period: [f64; 2], daytime: Option<&[bool]>) -> Result<SolarPattern> {
    SolarPattern::new(bandpass_filter(&pattern.rho, period)?, daytime)
}

/// Exact 1-D total-variation denoising,
/// `argmin_s ½‖r − s‖² + μ·Σ|s_{t+1} − s_t|`, by a direct linear-time scan
/// that tracks the admissible level range of the current segment.
pub fn tv_denoise(r: &[f64], mu: f64) -> Vec<f64> {
    let n = r.len();
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    if mu <= 0.0 {
        out.copy_from_slice(r);
        return out;
    }
    let (mut k, mut k0, mut kplus, mut kminus) = (0usize, 0usize, 0usize, 0usize);
    let (mut umin, mut umax) = (mu, -mu);
    let (mut vmin, mut vmax) = (r[0] - mu, r[0] + mu);
    loop {
        while k == n - 1 {
            if umin < 0.0 {
                loop {
                    out[k0] = vmin;
                    k0 += 1;
                    if k0 > kminus {
                        break;
                    }
                }
                k = k0;
                kminus = k0;
                vmin = r[k0];
                umin = mu;
                umax = vmin + umin - vmax;
            } else if umax > 0.0 {
                loop {
                    out[k0] = vmax;
                    k0 += 1;
                    if k0 > kplus {
                        break;
                    }
                }
                k = k0;
                kplus = k0;
                vmax = r[k0];
                umax = -mu;
                umin = vmax + umax - vmin;
            } else {
                vmin += umin / (k - k0 + 1) as f64;
                for o in &mut out[k0..=k] {
                    *o = vmin;
                }
                return out;
            }
        }
        umin += r[k + 1] - vmin;
        umax += r[k + 1] - vmax;
        if umin < -mu {
            loop {
                out[k0] = vmin;
                k0 += 1;
                if k0 > kminus {
                    break;
                }
            }
            k = k0;
            kminus = k0;
            kplus = k0;
            vmin = r[k0];
            vmax = vmin + 2.0 * mu;
            umin = mu;
            umax = -mu;
        } else if umax > mu {
            loop {
                out[k0] = vmax;
                k0 += 1;
                if k0 > kplus {
                    break;
                }
            }
            k = k0;
            kminus = k0;
            kplus = k0;
            vmax = r[k0];
            vmin = vmax - 2.0 * mu;
            umin = mu;
            umax = -mu;
        } else {
            k += 1;
            if umin >= mu {
                kminus = k;
                vmin += (umin - mu) / (kminus - k0 + 1) as f64;
                umin = mu;
            }
            if umax <= -mu {
                kplus = k;
                vmax += (umax + mu) / (kplus - k0 + 1) as f64;
                umax = -mu;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BtmOptions {
    /// Sparsity weight on the changes, relative to the peak of the series;
    /// `None` uses `default_lambda(T)`.
    pub mu: Option<f64>,
    /// Weight of the zero-solar equations on night minutes.
    pub night_weight: f64,
    pub max_iter: usize,
}

impl Default for BtmOptions {
    fn default() -> Self {
        Self {
            mu: None,
            night_weight: 1.0,
            max_iter: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisaggregationFit {
    pub alpha: f64,
    pub beta: f64,
    /// Changes of the non-solar part, watts; `d[0]` is its initial level.
    pub d: Vec<f64>,
    /// Estimated generation `max(0, −(α + β·ρ̂ₜ))`, watts; zero on the
    /// night anchors.
    pub solar: Vec<f64>,
    pub iterations: usize,
}

/// Splits a feeder active-power series into `α + β·ρ̂` and a piecewise
/// constant remainder `s = Uᵀd`:
///
/// ```text
///   min ½‖z − α·1 − β·ρ̂ − Uᵀd‖² + ½w‖α·1 + β·ρ̂‖²_night + μ·Σ_{t≥1}|d_t|
/// ```
///
/// For fixed `(α, β)` the `d`-problem is total-variation denoising, solved
/// exactly; its value is a smooth piecewise quadratic in `(α, β)`, minimized
/// by safeguarded Newton steps.
pub fn disaggregate_btm(z: &[f64], rho: &[f64], night: &[bool], opts: &BtmOptions) -> Result<DisaggregationFit> {
    let t = z.len();
    if rho.len() != t || night.len() != t {
        return Err(Error::dim("series, pattern and night mask differ in length"));
    }
    if !night.iter().any(|n| *n) {
        return Err(Error::config("night mask must select at least one minute"));
    }
    let day: Vec<f64> = rho.iter().zip(night).filter(|(_, n)| !**n).map(|(r, _)| *r).collect();
    let spread = day.iter().copied().fold(f64::NEG_INFINITY, f64::max) - day.iter().copied().fold(f64::INFINITY, f64::min);
    if day.is_empty() || !(spread > 1e-9) {
        return Err(Error::Numerical("degenerate fit: pattern is constant over the daytime".into()));
    }

    let scale = z.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let zn: Vec<f64> = z.iter().map(|v| v / scale).collect();
    let mu = opts.mu.unwrap_or_else(|| default_lambda(t));
    let w = opts.night_weight;

    let eval = |a: f64, b: f64| {
        let r: Vec<f64> = (0..t).map(|i| zn[i] - a - b * rho[i]).collect();
        let s = tv_denoise(&r, mu);
        let mut f = 0.0;
        for i in 0..t {
            f += 0.5 * (r[i] - s[i]).powi(2);
            if i > 0 {
                f += mu * (s[i] - s[i - 1]).abs();
            }
            if night[i] {
                f += 0.5 * w * (a + b * rho[i]).powi(2);
            }
        }
        (f, r, s)
    };

    let (mut a, mut b) = (0.0, 0.0);
    let (mut f, mut r, mut s) = eval(a, b);
    let mut iterations = 0;
    for it in 1..=opts.max_iter {
        iterations = it;
        // gradient and generalized Hessian; within a segment of s the
        // envelope behaves like the deviation from the segment mean
        let (mut g0, mut g1) = (0.0, 0.0);
        let (mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0);
        for i in 0..t {
            g0 -= r[i] - s[i];
            g1 -= rho[i] * (r[i] - s[i]);
            if night[i] {
                let v = a + b * rho[i];
                g0 += w * v;
                g1 += w * v * rho[i];
                h00 += w;
                h01 += w * rho[i];
                h11 += w * rho[i] * rho[i];
            }
        }
        let mut i = 0;
        while i < t {
            let mut j = i + 1;
            while j < t && s[j] == s[i] {
                j += 1;
            }
            let len = (j - i) as f64;
            let mean = rho[i..j].iter().sum::<f64>() / len;
            h11 += rho[i..j].iter().map(|p| (p - mean).powi(2)).sum::<f64>();
            i = j;
        }
        let det = h00 * h11 - h01 * h01;
        if !(det > 0.0) {
            return Err(Error::Numerical("degenerate fit: solar and constant terms are not separable".into()));
        }
        let da = -(h11 * g0 - h01 * g1) / det;
        let db = -(h00 * g1 - h01 * g0) / det;
        let mut step = 1.0;
        let mut accepted = false;
        while step > 1e-12 {
            let cand = eval(a + step * da, b + step * db);
            if cand.0 <= f - 1e-4 * step * -(g0 * da + g1 * db) || cand.0 < f && step < 1.0 {
                a += step * da;
                b += step * db;
                (f, r, s) = cand;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted || (step * da).abs().max((step * db).abs()) <= 1e-14 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
    }
    let (alpha, beta) = (a * scale, b * scale);
    let d = (0..t)
        .map(|i| scale * if i == 0 { s[0] } else { s[i] - s[i - 1] })
        .collect();
    Ok(DisaggregationFit {
        alpha,
        beta,
        d,
        solar: rho
            .iter()
            .zip(night)
            .map(|(p, n)| if *n { 0.0 } else { (-(alpha + beta * p)).max(0.0) })
            .collect(),
        iterations,
    })
}
