//! CSV and JSON writers plus the flat row types of the output schemas.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::fiber::{AngleLaws, DriftDemo};

/// Writes `rows` with a header taken from the field names.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a header and rows of preformatted fields.
pub fn write_records(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovRow {
    pub n: usize,
    #[serde(rename = "N")]
    pub replicas: usize,
    pub lambda_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityCsvRow {
    pub n: usize,
    pub median: f64,
    pub rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeylRow {
    pub k: String,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleRow {
    pub sample: usize,
    pub angle_cond: Option<f64>,
    pub angle_uncond: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftRow {
    pub direction: usize,
    pub n_p: usize,
    pub log_ratio: f64,
    pub ang_dist: f64,
}

/// One row per sample index; the shorter column is left empty.
pub fn angle_rows(laws: &AngleLaws) -> Vec<AngleRow> {
    let len = laws.angle_cond.len().max(laws.angle_uncond.len());
    (0..len)
        .map(|i| AngleRow {
            sample: i,
            angle_cond: laws.angle_cond.get(i).copied(),
            angle_uncond: laws.angle_uncond.get(i).copied(),
        })
        .collect()
}

pub fn drift_rows(demo: &DriftDemo) -> Vec<DriftRow> {
    demo.records
        .iter()
        .map(|r| DriftRow { direction: r.direction, n_p: r.n_p, log_ratio: r.log_ratio, ang_dist: r.ang_dist })
        .collect()
}

/// Frequency vector as `"k1 k2 …"`.
pub fn format_frequency(k: &[i64]) -> String {
    k.iter().map(i64::to_string).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_stable() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        let rows = vec![AngleRow { sample: 0, angle_cond: Some(0.1), angle_uncond: None }];
        write_csv(&p, &rows).unwrap();
        let first = std::fs::read(&p).unwrap();
        write_csv(&p, &rows).unwrap();
        assert_eq!(first, std::fs::read(&p).unwrap());
        assert_eq!(String::from_utf8(first).unwrap(), "sample,angle_cond,angle_uncond\n0,0.1,\n");
    }
}
