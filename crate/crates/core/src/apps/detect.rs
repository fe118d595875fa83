use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::synth::GroundTruth;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Start,
    End,
}

/// A thresholded change of recovered active power.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectedEvent {
    pub house: usize,
    pub minute: usize,
    /// Signed change in watts.
    pub magnitude: f64,
    pub polarity: Polarity,
}

/// A true on or off transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthMarker {
    pub house: usize,
    pub minute: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub tpr: f64,
    pub fpr: f64,
    pub matched: usize,
    pub false_positives: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fraction: f64,
    pub tpr: f64,
    pub fpr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// Ordered by threshold fraction.
    pub points: Vec<RocPoint>,
    pub tolerance: usize,
}

impl RocCurve {
    pub fn max_tpr(&self) -> f64 {
        self.points.iter().map(|p| p.tpr).fold(0.0, f64::max)
    }

    /// Point at the threshold closest to `fraction`.
    pub fn at(&self, fraction: f64) -> Option<&RocPoint> {
        self.points
            .iter()
            .min_by(|a, b| (a.fraction - fraction).abs().total_cmp(&(b.fraction - fraction).abs()))
    }
}

/// `0.05, 0.10, …, 1.50`.
pub fn default_fractions() -> Vec<f64> {
    (1..=30).map(|k| k as f64 * 0.05).collect()
}

/// Starts and in-horizon ends of every EV session.
pub fn ev_truth(truth: &GroundTruth) -> Vec<TruthMarker> {
    let t = truth.loads.minutes();
    let mut out = Vec::new();
    for e in truth.ev_events() {
        out.push(TruthMarker { house: e.house, minute: e.start });
        if e.end < t {
            out.push(TruthMarker { house: e.house, minute: e.end });
        }
    }
    out.sort_by_key(|m| (m.house, m.minute));
    out
}

/// Entries of `D̂ᴾ` with `|D̂ᴾₙₜ| ≥ fraction · rating` become events. Within a
/// house, detections closer than `min_gap` minutes to a larger one are merged
/// into it. Column 0 carries the initial load level rather than a change and
/// is skipped.
pub fn detect_ev_events(dp: &Matrix, ev_rating: f64, fraction: f64, min_gap: usize) -> Result<Vec<DetectedEvent>> {
    if !(ev_rating > 0.0) || !(fraction > 0.0) {
        return Err(Error::config("EV rating and threshold fraction must be positive"));
    }
    let mut out = Vec::new();
    for house in 0..dp.nrows() {
        let mut cand: Vec<(usize, f64)> = (1..dp.ncols())
            .map(|t| (t, dp[(house, t)]))
            .filter(|(_, d)| d.abs() / ev_rating >= fraction)
            .collect();
        // largest first; ties resolved by time so the result is deterministic
        cand.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
        let mut kept: Vec<(usize, f64)> = Vec::new();
        for (t, d) in cand {
            if kept.iter().all(|(k, _)| k.abs_diff(t) > min_gap) {
                kept.push((t, d));
            }
        }
        kept.sort_by_key(|(t, _)| *t);
        out.extend(kept.into_iter().map(|(minute, magnitude)| DetectedEvent {
            house,
            minute,
            magnitude,
            polarity: if magnitude >= 0.0 { Polarity::Start } else { Polarity::End },
        }));
    }
    Ok(out)
}

/// Non-event house-minutes at detection resolution (minute 0 excluded).
pub fn detection_opportunities(houses: usize, minutes: usize, truth: &[TruthMarker]) -> usize {
    (houses * minutes.saturating_sub(1)).saturating_sub(truth.len())
}

/// Greedy one-to-one matching on house and `|Δt| ≤ tolerance`, closest pairs
/// first.
pub fn score_detections(events: &[DetectedEvent], truth: &[TruthMarker], tolerance: usize, opportunities: usize) -> Score {
    let mut pairs = Vec::new();
    for (i, e) in events.iter().enumerate() {
        for (j, m) in truth.iter().enumerate() {
            if e.house == m.house && e.minute.abs_diff(m.minute) <= tolerance {
                pairs.push((e.minute.abs_diff(m.minute), i, j));
            }
        }
    }
    pairs.sort();
    let mut used_e = vec![false; events.len()];
    let mut used_t = vec![false; truth.len()];
    let mut matched = 0;
    for (_, i, j) in pairs {
        if !used_e[i] && !used_t[j] {
            used_e[i] = true;
            used_t[j] = true;
            matched += 1;
        }
    }
    let false_positives = events.len() - matched;
    Score {
        tpr: if truth.is_empty() { 0.0 } else { matched as f64 / truth.len() as f64 },
        fpr: if opportunities == 0 {
            0.0
        } else {
            (false_positives as f64 / opportunities as f64).min(1.0)
        },
        matched,
        false_positives,
    }
}

pub fn roc_sweep(
    dp: &Matrix,
    truth: &[TruthMarker],
    ev_rating: f64,
    fractions: &[f64],
    tolerance: usize,
    min_gap: usize,
) -> Result<RocCurve> {
    let mut sorted = fractions.to_vec();
    sorted.sort_by(f64::total_cmp);
    let opportunities = detection_opportunities(dp.nrows(), dp.ncols(), truth);
    let points = sorted
        .into_iter()
        .map(|fraction| {
            let events = detect_ev_events(dp, ev_rating, fraction, min_gap)?;
            let s = score_detections(&events, truth, tolerance, opportunities);
            Ok(RocPoint {
                fraction,
                tpr: s.tpr,
                fpr: s.fpr,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RocCurve { points, tolerance })
}
