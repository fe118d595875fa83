//! Grid-edge monitoring on top of a recovery: EV event detection and its
//! ROC evaluation, extraction of the shared solar pattern, removal of
//! periodic contamination, and behind-the-meter solar disaggregation of the
//! feeder-head series.

pub mod detect;
pub mod solar;

pub use detect::{
    default_fractions, detect_ev_events, detection_opportunities, ev_truth, roc_sweep, score_detections,
    DetectedEvent, Polarity, RocCurve, RocPoint, Score, TruthMarker,
};
pub use solar::{
    bandpass_filter, bandpass_remove, disaggregate_btm, extract_pattern, BtmOptions, DisaggregationFit,
    SolarPattern,
};
