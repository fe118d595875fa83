use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Linearization, ScenarioConfig};
use super::generate::{generate_ground_truth, GroundTruth, LoadMatrix};
use crate::error::{Error, Result};
use crate::feeder::{FeederModel, SensorPlacement};
use crate::linalg::Matrix;
use crate::powerflow::PowerFlowOptions;

/// Smart-meter window averaging. House `n` reports the mean of minutes
/// `[o_n + j·m, o_n + (j+1)·m)` for window `j`; synchronous meters have all
/// offsets zero, so `A = (1/m)·I ⊗ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct AveragingOperator {
    pub minutes: usize,
    pub interval: usize,
    /// Per-house offset in minutes; shared by the house's P and Q rows.
    pub offsets: Vec<usize>,
    pub windows: usize,
}

impl AveragingOperator {
    pub fn synchronous(minutes: usize, interval: usize, houses: usize) -> Result<Self> {
        if interval == 0 || minutes % interval != 0 {
            return Err(Error::config(format!(
                "meter interval {interval} does not divide the horizon of {minutes} minutes"
            )));
        }
        Ok(Self {
            minutes,
            interval,
            offsets: vec![0; houses],
            windows: minutes / interval,
        })
    }

    /// Only windows that fit entirely inside the horizon for every house are
    /// kept.
    pub fn asynchronous(minutes: usize, interval: usize, offsets: Vec<usize>) -> Result<Self> {
        if interval == 0 || offsets.iter().any(|&o| o >= interval) {
            return Err(Error::config("meter offsets must lie in [0, interval)"));
        }
        let max_off = offsets.iter().copied().max().unwrap_or(0);
        let windows = minutes.saturating_sub(max_off) / interval;
        if windows == 0 {
            return Err(Error::config("horizon shorter than one meter window"));
        }
        Ok(Self {
            minutes,
            interval,
            offsets,
            windows,
        })
    }

    pub fn houses(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_synchronous(&self) -> bool {
        self.offsets.iter().all(|&o| o == 0)
    }

    /// Window averages of one row with the given offset.
    pub fn apply_row(&self, row: &[f64], offset: usize, out: &mut [f64]) {
        let m = self.interval;
        for (j, o) in out.iter_mut().enumerate().take(self.windows) {
            let s = offset + j * m;
            *o = row[s..s + m].iter().sum::<f64>() / m as f64;
        }
    }

    /// Adjoint of [`apply_row`](Self::apply_row): spreads each window value
    /// divided by `m` over its minutes.
    pub fn adjoint_row(&self, g: &[f64], offset: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        let m = self.interval;
        for (j, &gj) in g.iter().enumerate().take(self.windows) {
            let s = offset + j * m;
            let v = gj / m as f64;
            out[s..s + m].iter_mut().for_each(|x| *x = v);
        }
    }

    /// `X·A` for a stacked `[P; Q]` matrix, or a plain `N × T` block when
    /// `x` has `N` rows.
    pub fn apply(&self, x: &Matrix) -> Matrix {
        let n = self.houses();
        let mut out = Matrix::zeros(x.nrows(), self.windows);
        let mut row = vec![0.0; self.minutes];
        let mut avg = vec![0.0; self.windows];
        for r in 0..x.nrows() {
            row.iter_mut().zip(x.row(r).iter()).for_each(|(a, b)| *a = *b);
            self.apply_row(&row, self.offsets[r % n], &mut avg);
            for j in 0..self.windows {
                out[(r, j)] = avg[j];
            }
        }
        out
    }

    /// `G·Aᵀ` for a stacked window matrix `g` (rows as in [`apply`](Self::apply)).
    pub fn adjoint(&self, g: &Matrix) -> Matrix {
        let n = self.houses();
        let mut out = Matrix::zeros(g.nrows(), self.minutes);
        let m = self.interval;
        for r in 0..g.nrows() {
            let o = self.offsets[r % n];
            for j in 0..self.windows {
                let v = g[(r, j)] / m as f64;
                for t in o + j * m..o + (j + 1) * m {
                    out[(r, t)] = v;
                }
            }
        }
        out
    }

    /// Dense `T × T_s` matrix for one house.
    pub fn dense(&self, house: usize) -> Matrix {
        let mut a = Matrix::zeros(self.minutes, self.windows);
        let s0 = self.offsets[house];
        for j in 0..self.windows {
            for t in 0..self.interval {
                a[(s0 + j * self.interval + t, j)] = 1.0 / self.interval as f64;
            }
        }
        a
    }
}

/// Feeder-level measurement operator used by the recovery, either fixed or
/// re-linearized per smart-meter window.
#[derive(Clone, Debug, PartialEq)]
pub enum SensorOperator {
    Fixed(Matrix),
    PerWindow { interval: usize, mats: Vec<Matrix> },
}

impl SensorOperator {
    pub fn rows(&self) -> usize {
        match self {
            SensorOperator::Fixed(h) => h.nrows(),
            SensorOperator::PerWindow { mats, .. } => mats.first().map_or(0, |h| h.nrows()),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            SensorOperator::Fixed(h) => h.ncols(),
            SensorOperator::PerWindow { mats, .. } => mats.first().map_or(0, |h| h.ncols()),
        }
    }

    /// Operator in force at minute `t`.
    pub fn at(&self, t: usize) -> &Matrix {
        match self {
            SensorOperator::Fixed(h) => h,
            SensorOperator::PerWindow { interval, mats } => &mats[(t / interval).min(mats.len() - 1)],
        }
    }

    /// `H_t·x_t` column by column.
    pub fn apply(&self, x: &Matrix) -> Matrix {
        match self {
            SensorOperator::Fixed(h) => h * x,
            SensorOperator::PerWindow { .. } => {
                let mut out = Matrix::zeros(self.rows(), x.ncols());
                for t in 0..x.ncols() {
                    out.set_column(t, &(self.at(t) * x.column(t)));
                }
                out
            }
        }
    }
}

/// Noisy observations of a scenario together with their error bounds and the
/// operators that map loads to them.
#[derive(Clone, Debug)]
pub struct MeasurementSet {
    /// Smart-meter averages `Γ`, `2N × T_s`.
    pub gamma: Matrix,
    pub averaging: AveragingOperator,
    /// Feeder-level readings `Z`, `6κ × T`.
    pub z: Matrix,
    /// The same readings before sensor noise.
    pub z_clean: Matrix,
    pub gamma_bound: Matrix,
    pub z_bound: Matrix,
    pub h: SensorOperator,
    pub sensors: Vec<SensorPlacement>,
}

/// A generated scenario: truth and measurements.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub truth: GroundTruth,
    pub measurements: MeasurementSet,
}

fn stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(k);
    r
}

/// Perturbs each entry so that the error is uniform within `± accuracy` of
/// the reported reading: `reading = x / (1 − u·accuracy)`, `u ∈ [−1, 1]`.
fn add_relative_noise(m: &mut Matrix, accuracy: f64, rng: &mut ChaCha8Rng) {
    if accuracy == 0.0 {
        return;
    }
    for x in m.iter_mut() {
        let u: f64 = rng.gen_range(-1.0..=1.0);
        *x /= 1.0 - u * accuracy;
    }
}

/// Averaging operator for the configured schedule; asynchronous offsets are
/// drawn once per house.
pub fn meter_schedule(cfg: &ScenarioConfig) -> Result<AveragingOperator> {
    let m = cfg.meters.interval;
    if cfg.meters.asynchronous {
        let mut rng = stream(cfg.seed, 8);
        let offsets = (0..cfg.houses).map(|_| rng.gen_range(0..m)).collect();
        AveragingOperator::asynchronous(cfg.minutes, m, offsets)
    } else {
        AveragingOperator::synchronous(cfg.minutes, m, cfg.houses)
    }
}

/// `Γ = X·A + noise`, noise uniform within `± accuracy · |reading|`.
pub fn sample_smart_meters(gt: &GroundTruth, cfg: &ScenarioConfig) -> Result<(Matrix, AveragingOperator)> {
    let a = meter_schedule(cfg)?;
    if a.houses() != gt.loads.houses() || a.minutes != gt.loads.minutes() {
        return Err(Error::dim("meter schedule does not match the load matrix"));
    }
    let mut gamma = a.apply(&gt.loads.stacked());
    add_relative_noise(&mut gamma, cfg.noise.smart_meter, &mut stream(cfg.seed, 6));
    Ok((gamma, a))
}

/// Runs the nonlinear power flow at every minute and reads the sensors.
/// Returns `(noisy, clean)` readings.
pub fn sample_feeder_sensors(
    loads: &LoadMatrix,
    feeder: &FeederModel,
    sensors: &[SensorPlacement],
    accuracy: f64,
    seed: u64,
) -> Result<(Matrix, Matrix)> {
    if loads.houses() != feeder.n_loads() {
        return Err(Error::dim(format!(
            "scenario has {} houses but the feeder hosts {} loads",
            loads.houses(),
            feeder.n_loads()
        )));
    }
    let t_len = loads.minutes();
    let mut clean = Matrix::zeros(6 * sensors.len(), t_len);
    if !sensors.is_empty() {
        let opts = PowerFlowOptions::default();
        for t in 0..t_len {
            let profile = feeder.solve(&loads.column(t), &opts).map_err(|e| match e {
                Error::Divergence { .. } => Error::Numerical(format!("power flow failed at minute {t}: {e}")),
                other => other,
            })?;
            let r = feeder.readings(&profile, sensors)?;
            for (i, v) in r.into_iter().enumerate() {
                clean[(i, t)] = v;
            }
        }
    }
    let mut noisy = clean.clone();
    add_relative_noise(&mut noisy, accuracy, &mut stream(seed, 7));
    Ok((noisy, clean))
}

/// Entrywise bounds: `ℰ = max(accuracy·|Γ|, floor)` and
/// `E = max(feeder_bound·|Z|, floor)`.
pub fn calibrate_bounds(gamma: &Matrix, z: &Matrix, accuracy: f64, feeder_bound: f64, floor: f64) -> (Matrix, Matrix) {
    (
        gamma.map(|g| (accuracy * g.abs()).max(floor)),
        z.map(|x| (feeder_bound * x.abs()).max(floor)),
    )
}

/// Measurement operator for the recovery, linearized as configured. The
/// operating points come from smart-meter data only.
pub fn recovery_operator(
    feeder: &FeederModel,
    sensors: &[SensorPlacement],
    gamma: &Matrix,
    averaging: &AveragingOperator,
    mode: Linearization,
) -> Result<SensorOperator> {
    let opts = PowerFlowOptions::default();
    match mode {
        Linearization::FlatStart => Ok(SensorOperator::Fixed(feeder.linearize_flat(sensors)?.h)),
        Linearization::AverageLoading => {
            let mean: Vec<f64> = gamma.row_iter().map(|r| r.mean()).collect();
            Ok(SensorOperator::Fixed(feeder.linearize_at(&mean, sensors, &opts)?.h))
        }
        Linearization::PerWindow => {
            if !averaging.is_synchronous() {
                return Err(Error::config("per-window linearization needs synchronous meters"));
            }
            let base = feeder.linearize_flat(sensors)?;
            let mut mats = Vec::with_capacity(averaging.windows);
            for j in 0..averaging.windows {
                let x: Vec<f64> = gamma.column(j).iter().copied().collect();
                mats.push(feeder.refresh(&base, &x, &opts)?.h);
            }
            Ok(SensorOperator::PerWindow {
                interval: averaging.interval,
                mats,
            })
        }
    }
}

/// Generates the truth and samples every measurement for `feeder`, with
/// sensors taken from `sensors`.
pub fn simulate(cfg: &ScenarioConfig, feeder: &FeederModel, sensors: Vec<SensorPlacement>) -> Result<Scenario> {
    let truth = generate_ground_truth(cfg)?;
    let (gamma, averaging) = sample_smart_meters(&truth, cfg)?;
    let (z, z_clean) = sample_feeder_sensors(&truth.loads, feeder, &sensors, cfg.noise.dpmu, cfg.seed)?;
    let (gamma_bound, z_bound) = calibrate_bounds(
        &gamma,
        &z,
        cfg.noise.smart_meter,
        cfg.noise.feeder_bound,
        cfg.noise.bound_floor,
    );
    let h = recovery_operator(feeder, &sensors, &gamma, &averaging, cfg.linearization)?;
    Ok(Scenario {
        config: cfg.clone(),
        truth,
        measurements: MeasurementSet {
            gamma,
            averaging,
            z,
            z_clean,
            gamma_bound,
            z_bound,
            h,
            sensors,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feeder::stock;

    #[test]
    fn fifteen_minute_operator_is_kronecker_average() {
        let a = AveragingOperator::synchronous(60, 15, 1).unwrap();
        assert_eq!(a.windows, 4);
        let d = a.dense(0);
        for t in 0..60 {
            for j in 0..4 {
                let expect = if t / 15 == j { 1.0 / 15.0 } else { 0.0 };
                assert_eq!(d[(t, j)], expect);
            }
        }
    }

    #[test]
    fn interval_must_divide_synchronous_horizon() {
        assert!(matches!(
            AveragingOperator::synchronous(50, 15, 1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn partial_pulse_averages_proportionally() {
        let a = AveragingOperator::synchronous(15, 15, 1).unwrap();
        let mut x = Matrix::from_element(1, 15, 100.0);
        for t in 4..9 {
            x[(0, t)] += 300.0;
        }
        let g = a.apply(&x);
        assert!((g[(0, 0)] - (100.0 + 300.0 * 5.0 / 15.0)).abs() < 1e-12);
    }

    #[test]
    fn adjoint_matches_dense_transpose() {
        let a = AveragingOperator::asynchronous(50, 10, vec![3, 7]).unwrap();
        assert_eq!(a.windows, 4);
        let g = [1.0, -2.0, 0.5, 4.0];
        let mut out = vec![0.0; 50];
        a.adjoint_row(&g, 7, &mut out);
        let dense = a.dense(1) * nalgebra::DVector::from_row_slice(&g);
        for t in 0..50 {
            assert!((out[t] - dense[t]).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_loads_give_zero_readings() {
        let f = FeederModel::new(stock::four_bus()).unwrap();
        let loads = LoadMatrix::zeros(4, 3);
        let (z, clean) = sample_feeder_sensors(&loads, &f, &f.desc.sensors, 0.0, 1).unwrap();
        assert_eq!(z.shape(), (12, 3));
        assert!(clean.iter().all(|&x| x.abs() < 1e-6));
    }

    #[test]
    fn bounds_follow_accuracy_with_floor() {
        let g = Matrix::from_row_slice(1, 2, &[1000.0, 0.0]);
        let (e, f) = calibrate_bounds(&g, &g, 0.002, 0.002, 1.0);
        assert!((e[(0, 0)] - 2.0).abs() < 1e-12);
        assert_eq!(e[(0, 1)], 1.0);
        assert_eq!(f[(0, 1)], 1.0);
        let (e2, _) = calibrate_bounds(&g, &g, 0.004, 0.002, 1.0);
        assert!((e2[(0, 0)] - 4.0).abs() < 1e-12);
    }
}
