//! Matrix CSV files: one row per channel, one column per minute (or meter
//! window), with a header row of time indices.

use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Writes `m` with the given row labels. Column headers are `offset + j·step`
/// minutes from the start of the horizon.
pub fn write_matrix_csv(path: impl AsRef<Path>, labels: &[String], m: &Matrix, step: usize) -> Result<()> {
    if labels.len() != m.nrows() {
        return Err(Error::dim("one label per matrix row is required"));
    }
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["channel".to_string()];
    header.extend((0..m.ncols()).map(|j| (j * step).to_string()));
    w.write_record(&header)?;
    for (i, label) in labels.iter().enumerate() {
        let mut rec = vec![label.clone()];
        rec.extend(m.row(i).iter().map(|x| format!("{x:?}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a matrix written by [`write_matrix_csv`], returning its labels.
pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<(Vec<String>, Matrix)> {
    let mut r = csv::Reader::from_path(path)?;
    let cols = r.headers()?.len().saturating_sub(1);
    let mut labels = Vec::new();
    let mut data = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != cols + 1 {
            return Err(Error::Parse(format!("row {} has {} fields", labels.len() + 1, rec.len())));
        }
        labels.push(rec[0].to_string());
        for f in rec.iter().skip(1) {
            data.push(
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad number {f:?}: {e}")))?,
            );
        }
    }
    Ok((labels.clone(), Matrix::from_row_slice(labels.len(), cols, &data)))
}

/// Row labels `P1..PN, Q1..QN`.
pub fn load_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("P{i}")).chain((1..=n).map(|i| format!("Q{i}"))).collect()
}

/// Row labels `s<k>_P<phase>` / `s<k>_Q<phase>` for `k` sensors.
pub fn sensor_labels(k: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(6 * k);
    for s in 1..=k {
        for q in ["P", "Q"] {
            for ph in ["a", "b", "c"] {
                out.push(format!("s{s}_{q}{ph}"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = Matrix::from_row_slice(2, 3, &[0.1, -2.5e-7, 1.0 / 3.0, 7000.0, 0.0, -1e300]);
        write_matrix_csv(&path, &load_labels(1), &m, 15).unwrap();
        let (labels, back) = read_matrix_csv(&path).unwrap();
        assert_eq!(labels, vec!["P1", "Q1"]);
        assert_eq!(back, m);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("channel,0,15,30\n"));
    }
}
