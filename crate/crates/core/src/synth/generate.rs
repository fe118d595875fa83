use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{is_daytime, EventKind, PvPattern, ScenarioConfig};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Minute-resolution active and reactive demand, one row per house.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadMatrix {
    pub p: Matrix,
    pub q: Matrix,
}

impl LoadMatrix {
    pub fn zeros(n: usize, t: usize) -> Self {
        Self {
            p: Matrix::zeros(n, t),
            q: Matrix::zeros(n, t),
        }
    }

    pub fn houses(&self) -> usize {
        self.p.nrows()
    }

    pub fn minutes(&self) -> usize {
        self.p.ncols()
    }

    /// `X = [P; Q]`.
    pub fn stacked(&self) -> Matrix {
        let (n, t) = self.p.shape();
        let mut x = Matrix::zeros(2 * n, t);
        x.rows_mut(0, n).copy_from(&self.p);
        x.rows_mut(n, n).copy_from(&self.q);
        x
    }

    pub fn from_stacked(x: &Matrix) -> Result<Self> {
        if x.nrows() % 2 != 0 {
            return Err(Error::dim("stacked load matrix needs an even row count"));
        }
        let n = x.nrows() / 2;
        Ok(Self {
            p: x.rows(0, n).into_owned(),
            q: x.rows(n, n).into_owned(),
        })
    }

    /// Demand column `[p; q]` at minute `t`.
    pub fn column(&self, t: usize) -> Vec<f64> {
        self.p.column(t).iter().chain(self.q.column(t).iter()).copied().collect()
    }
}

/// A rectangular change in one house's demand on `[start, end)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadEvent {
    pub house: usize,
    pub start: usize,
    pub end: usize,
    pub dp: f64,
    pub dq: f64,
    pub kind: EventKind,
}

/// Synthetic truth with its generating components.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub loads: LoadMatrix,
    /// Base demand per house, `(p, q)`.
    pub base: Vec<(f64, f64)>,
    /// PV component of `P`, nonpositive, `-capacity · patternᵀ`.
    pub pv: Matrix,
    pub pv_capacity: Vec<f64>,
    /// Shared solar shape with unit peak (all zeros when no house has PV
    /// or the horizon is at night).
    pub pattern: Vec<f64>,
    /// Cycling HVAC component `(P, Q)`, when enabled.
    pub hvac: Option<LoadMatrix>,
    pub hvac_period: Option<usize>,
    pub events: Vec<LoadEvent>,
}

impl GroundTruth {
    pub fn ev_events(&self) -> impl Iterator<Item = &LoadEvent> {
        self.events.iter().filter(|e| e.kind == EventKind::Ev)
    }

    /// Feeder-total PV generation per minute (positive watts).
    pub fn total_solar(&self) -> Vec<f64> {
        self.pv.column_iter().map(|c| -c.sum()).collect()
    }
}

fn tan_phi(pf: f64) -> f64 {
    (1.0 - pf * pf).max(0.0).sqrt() / pf
}

fn uniform(rng: &mut ChaCha8Rng, r: [f64; 2]) -> f64 {
    if r[1] > r[0] {
        rng.gen_range(r[0]..=r[1])
    } else {
        r[0]
    }
}

fn uniform_int(rng: &mut ChaCha8Rng, r: [usize; 2]) -> usize {
    rng.gen_range(r[0]..=r[1])
}

/// Shared solar shape: raised-cosine bell between sunrise and sunset, times
/// an optional cloud walk, scaled to a unit peak over the horizon.
pub fn solar_pattern(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let pv = &cfg.pv;
    let day = pv.sunset - pv.sunrise;
    let noon = 0.5 * (pv.sunrise + pv.sunset);
    let mut cloud = 1.0;
    let mut out = Vec::with_capacity(cfg.minutes);
    for t in 0..cfg.minutes {
        let m = ((cfg.start_minute + t) as f64).rem_euclid(1440.0);
        let bell = if is_daytime(pv, m) {
            0.5 * (1.0 + (2.0 * std::f64::consts::PI * (m - noon) / day).cos())
        } else {
            0.0
        };
        if pv.pattern == PvPattern::Variable {
            cloud += rng.gen_range(-pv.cloud_step..=pv.cloud_step);
            cloud = cloud.clamp(pv.cloud_floor, 1.0);
        }
        out.push(bell * cloud);
    }
    let peak = out.iter().cloned().fold(0.0, f64::max);
    if peak > 0.0 {
        out.iter_mut().for_each(|x| *x /= peak);
    }
    out
}

struct Occupancy {
    active: Vec<Vec<u8>>,
    limit: u8,
}

impl Occupancy {
    fn fits(&self, house: usize, start: usize, end: usize) -> bool {
        self.active[house][start..end].iter().all(|&c| c < self.limit)
    }

    fn mark(&mut self, house: usize, start: usize, end: usize) {
        self.active[house][start..end].iter_mut().for_each(|c| *c += 1);
    }
}

const PLACEMENT_ATTEMPTS: usize = 200;

/// Draws base loads, PV, EV sessions, appliance events and HVAC cycling.
/// Every component uses its own random stream, so e.g. toggling HVAC does
/// not move the EV sessions.
pub fn generate_ground_truth(cfg: &ScenarioConfig) -> Result<GroundTruth> {
    cfg.validate()?;
    let (n, t_len) = (cfg.houses, cfg.minutes);
    let stream = |k: u64| {
        use rand::SeedableRng;
        let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
        r.set_stream(k);
        r
    };

    let mut rng = stream(1);
    let base: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let p = uniform(&mut rng, cfg.base_load);
            let pf = uniform(&mut rng, cfg.power_factor);
            (p, p * tan_phi(pf))
        })
        .collect();

    let mut rng = stream(2);
    let pattern = solar_pattern(cfg, &mut rng);
    let n_pv = (cfg.pv.fraction * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    shuffle(&mut order, &mut rng);
    let mut pv_capacity = vec![0.0; n];
    let mut pv_houses = order[..n_pv].to_vec();
    pv_houses.sort_unstable();
    for &h in &pv_houses {
        pv_capacity[h] = uniform(&mut rng, cfg.pv.capacity);
    }
    let mut pv = Matrix::zeros(n, t_len);
    for h in 0..n {
        for t in 0..t_len {
            pv[(h, t)] = -pv_capacity[h] * pattern[t];
        }
    }

    let mut occ = Occupancy {
        active: vec![vec![0; t_len]; n],
        limit: cfg.max_overlap.min(u8::MAX as usize) as u8,
    };
    let mut events = Vec::new();
    for e in &cfg.events {
        let end = e.end.min(t_len);
        if !occ.fits(e.house, e.start, end) {
            return Err(Error::config(format!(
                "scheduled event at house {} [{}, {}) exceeds the overlap limit",
                e.house, e.start, e.end
            )));
        }
        occ.mark(e.house, e.start, end);
        events.push(LoadEvent {
            house: e.house,
            start: e.start,
            end: e.end,
            dp: e.dp,
            dq: e.dq,
            kind: e.kind,
        });
    }

    let mut rng = stream(3);
    if cfg.ev.sessions > 0 {
        let mut houses: Vec<usize> = (0..n).collect();
        shuffle(&mut houses, &mut rng);
        let ev = &cfg.ev;
        let last_start = ev.start_window[1].min(t_len.saturating_sub(1));
        if ev.start_window[0] > last_start {
            return Err(Error::config("ev.start_window lies outside the horizon"));
        }
        for &h in houses.iter().take(ev.sessions) {
            let pf = uniform(&mut rng, cfg.power_factor);
            let placed = (0..PLACEMENT_ATTEMPTS).find_map(|_| {
                let start = uniform_int(&mut rng, [ev.start_window[0], last_start]);
                let end = start + uniform_int(&mut rng, ev.duration);
                occ.fits(h, start, end.min(t_len)).then_some((start, end))
            });
            let (start, end) = placed.ok_or_else(|| {
                Error::config(format!("cannot place an EV session at house {h} within the overlap limit"))
            })?;
            occ.mark(h, start, end.min(t_len));
            events.push(LoadEvent {
                house: h,
                start,
                end,
                dp: ev.rating,
                dq: ev.rating * tan_phi(pf),
                kind: EventKind::Ev,
            });
        }
    }

    let mut rng = stream(4);
    let ap = &cfg.appliances;
    let expected = ap.rate_per_day * t_len as f64 / 1440.0;
    for h in 0..n {
        let count = (expected + rng.gen::<f64>()).floor() as usize;
        for _ in 0..count {
            let dp = uniform(&mut rng, ap.rating);
            let pf = uniform(&mut rng, cfg.power_factor);
            let dur = uniform_int(&mut rng, ap.duration);
            let placed = (0..PLACEMENT_ATTEMPTS).find_map(|_| {
                let start = rng.gen_range(0..t_len);
                occ.fits(h, start, (start + dur).min(t_len)).then_some(start)
            });
            let start = placed.ok_or_else(|| {
                Error::config(format!("appliance events at house {h} exceed the overlap limit"))
            })?;
            occ.mark(h, start, (start + dur).min(t_len));
            events.push(LoadEvent {
                house: h,
                start,
                end: start + dur,
                dp,
                dq: dp * tan_phi(pf),
                kind: EventKind::Appliance,
            });
        }
    }

    let mut rng = stream(5);
    let (hvac, hvac_period) = if cfg.hvac.enabled {
        let period = uniform_int(&mut rng, cfg.hvac.period);
        let on = period / 2;
        let n_units = (cfg.hvac.fraction * n as f64).round() as usize;
        let mut houses: Vec<usize> = (0..n).collect();
        shuffle(&mut houses, &mut rng);
        let mut m = LoadMatrix::zeros(n, t_len);
        for &h in houses.iter().take(n_units) {
            let phase = rng.gen_range(0..period);
            let pf = uniform(&mut rng, cfg.power_factor);
            let dq = cfg.hvac.magnitude * tan_phi(pf);
            for t in 0..t_len {
                if (t + phase) % period < on {
                    m.p[(h, t)] = cfg.hvac.magnitude;
                    m.q[(h, t)] = dq;
                }
            }
        }
        (Some(m), Some(period))
    } else {
        (None, None)
    };

    let mut loads = LoadMatrix::zeros(n, t_len);
    for h in 0..n {
        for t in 0..t_len {
            loads.p[(h, t)] = base[h].0 + pv[(h, t)];
            loads.q[(h, t)] = base[h].1;
        }
    }
    for e in &events {
        for t in e.start..e.end.min(t_len) {
            loads.p[(e.house, t)] += e.dp;
            loads.q[(e.house, t)] += e.dq;
        }
    }
    if let Some(hv) = &hvac {
        loads.p += &hv.p;
        loads.q += &hv.q;
    }

    Ok(GroundTruth {
        loads,
        base,
        pv,
        pv_capacity,
        pattern,
        hvac,
        hvac_period,
        events,
    })
}

fn shuffle(v: &mut [usize], rng: &mut ChaCha8Rng) {
    use rand::seq::SliceRandom;
    v.shuffle(rng);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::config::EventSpec;

    fn quiet() -> ScenarioConfig {
        ScenarioConfig {
            houses: 5,
            minutes: 120,
            appliances: crate::synth::ApplianceConfig {
                rate_per_day: 0.0,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn no_activity_gives_constant_rows() {
        let gt = generate_ground_truth(&quiet()).unwrap();
        for h in 0..5 {
            let row = gt.loads.p.row(h);
            assert!(row.iter().all(|&x| x == row[0]));
            let row = gt.loads.q.row(h);
            assert!(row.iter().all(|&x| x == row[0]));
        }
    }

    #[test]
    fn scheduled_ev_raises_exactly_its_interval() {
        let mut cfg = quiet();
        cfg.minutes = 900;
        cfg.houses = 4;
        cfg.events.push(EventSpec {
            house: 3,
            start: 600,
            end: 780,
            dp: 7000.0,
            dq: 0.0,
            kind: EventKind::Ev,
        });
        let gt = generate_ground_truth(&cfg).unwrap();
        for t in 0..900 {
            let lift = gt.loads.p[(3, t)] - gt.base[3].0;
            let expect = if (600..780).contains(&t) { 7000.0 } else { 0.0 };
            assert_eq!(lift, expect);
        }
    }

    #[test]
    fn equal_capacity_pv_is_rank_one() {
        let mut cfg = quiet();
        cfg.houses = 6;
        cfg.minutes = 600;
        cfg.start_minute = 420;
        cfg.pv.fraction = 0.5;
        cfg.pv.capacity = [4000.0, 4000.0];
        let gt = generate_ground_truth(&cfg).unwrap();
        let base = Matrix::from_fn(6, 600, |h, _| gt.base[h].0);
        let diff = &gt.loads.p - base;
        let sv = diff.singular_values();
        assert!(sv[0] > 0.0);
        assert!(sv.iter().skip(1).all(|&s| s < 1e-9 * sv[0]));
        assert_eq!(gt.pv_capacity.iter().filter(|&&c| c > 0.0).count(), 3);
    }

    #[test]
    fn overlap_limit_is_enforced() {
        let mut cfg = quiet();
        cfg.max_overlap = 1;
        for _ in 0..2 {
            cfg.events.push(EventSpec {
                house: 0,
                start: 10,
                end: 20,
                dp: 500.0,
                dq: 0.0,
                kind: EventKind::Appliance,
            });
        }
        assert!(matches!(generate_ground_truth(&cfg), Err(Error::Config(_))));
    }
}
