use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;

use super::PriceSeries;
use crate::{Error, Result};

/// A parsed price file and the number of rows that were skipped.
#[derive(Debug, Clone)]
pub struct LoadedSeries {
    pub series: PriceSeries,
    pub dropped: usize,
}

/// Reads a `date,close` CSV. The asset id is the file stem.
///
/// Rows with an unparseable date or a missing, unparseable or non-positive
/// close are dropped and counted. Other columns are ignored.
pub fn load_csv(path: impl AsRef<Path>) -> Result<LoadedSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let asset_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_csv(file, asset_id, &path.display().to_string())
}

pub fn read_csv<R: Read>(reader: R, asset_id: impl Into<String>, source: &str) -> Result<LoadedSeries> {
    let asset_id = asset_id.into();
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |column: &'static str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(column))
            .ok_or_else(|| Error::MissingColumn {
                path: source.to_string(),
                column,
            })
    };
    let date_col = find("date")?;
    let close_col = find("close")?;

    let mut rows = Vec::new();
    let mut dropped = 0;
    for record in rdr.records() {
        let record = record?;
        let date = record
            .get(date_col)
            .and_then(|s| NaiveDate::parse_from_str(s, "%Y-%m-%d").ok());
        let close = record
            .get(close_col)
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|c| c.is_finite() && *c > 0.0);
        match (date, close) {
            (Some(d), Some(c)) => rows.push((d, c)),
            _ => dropped += 1,
        }
    }
    if rows.is_empty() {
        return Err(Error::NoValidRows {
            path: source.to_string(),
        });
    }
    let series = PriceSeries::from_unsorted(asset_id, rows)?;
    Ok(LoadedSeries { series, dropped })
}

/// Writes `date,close` rows; closes use the shortest round-trip repr.
pub fn write_csv<W: Write>(series: &PriceSeries, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "close"])?;
    for (d, c) in series.dates().iter().zip(series.closes()) {
        w.write_record([d.format("%Y-%m-%d").to_string(), c.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}
