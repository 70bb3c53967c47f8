//! File formats: sample CSV, model and graph JSON, statistic and spectrum
//! dumps.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sample::SampleMatrix;
use crate::spectral::{partial_coherence, SpectralField};

/// Reads a sample CSV: one header row, one column per channel, one row per
/// time point. An odd number of rows is truncated by one; the flag reports
/// whether that happened.
pub fn read_sample_csv(path: &Path) -> Result<(SampleMatrix, bool)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let width = reader.headers()?.len();
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != width {
            return Err(Error::domain(format!(
                "{}: data row {} has {} fields, header has {width}",
                path.display(),
                line + 1,
                record.len()
            )));
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(c, field)| {
                let v: f64 = field.parse().map_err(|_| {
                    Error::domain(format!(
                        "{}: row {}, column {}: '{field}' is not a number",
                        path.display(),
                        line + 1,
                        c + 1
                    ))
                })?;
                if !v.is_finite() {
                    return Err(Error::domain(format!(
                        "{}: row {}, column {}: non-finite value",
                        path.display(),
                        line + 1,
                        c + 1
                    )));
                }
                Ok(v)
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let (sample, truncated) = SampleMatrix::from_rows_truncating(&rows)?;
    if truncated {
        log::warn!("{}: odd number of rows, dropped the last one", path.display());
    }
    Ok((sample, truncated))
}

/// Writes a sample with header `c1..cp`. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_sample_csv(path: &Path, x: &SampleMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record((1..=x.p()).map(|c| format!("c{c}")))?;
    for t in 0..x.n() {
        w.write_record(x.row(t).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path)?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

/// Spectrum dump with columns `freq,series,value`: the diagonal `S_cc` for
/// every channel, then the squared partial coherence for each listed pair.
pub fn spectrum_dump_csv(s: &SpectralField, pairs: &[(usize, usize)]) -> Result<String> {
    let mut out = String::from("freq,series,value\n");
    for c in 0..s.p() {
        for (j, v) in s.diagonal(c).iter().enumerate() {
            let _ = writeln!(out, "{},S{},{}", s.frequency(j), c + 1, v);
        }
    }
    for &(a, b) in pairs {
        let pc = partial_coherence(s, a, b)?;
        for (j, v) in pc.iter().enumerate() {
            let _ = writeln!(out, "{},pc{}-{},{}", s.frequency(j), a, b, v);
        }
    }
    Ok(out)
}
