use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One row of an experiment trajectory. Fields that do not apply to a mode are `None`
/// and written as empty CSV fields (or JSON `null`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub replication: usize,
    pub t: usize,
    pub block: Option<usize>,
    pub distance: Option<f64>,
    pub regret: Option<f64>,
    pub calibration_score: Option<f64>,
    pub gamma_n: Option<f64>,
    #[serde(rename = "L_n")]
    pub l_n: Option<usize>,
}

impl TrajectoryRecord {
    pub fn new(replication: usize, t: usize) -> Self {
        TrajectoryRecord {
            replication,
            t,
            block: None,
            distance: None,
            regret: None,
            calibration_score: None,
            gamma_n: None,
            l_n: None,
        }
    }
}

pub const CSV_HEADER: &str = "replication,t,block,distance,regret,calibration_score,gamma_n,L_n";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Parse(format!("unknown format {other:?}"))),
        }
    }
}

pub fn write_records<W: Write>(records: &[TrajectoryRecord], out: W, format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(CSV_HEADER.split(',')).map_err(io_err)?;
            for r in records {
                w.serialize(r).map_err(io_err)?;
            }
            w.flush().map_err(|e| Error::Io(e.to_string()))
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, records).map_err(|e| Error::Io(e.to_string()))?;
            out.write_all(b"\n").map_err(|e| Error::Io(e.to_string()))
        }
    }
}

/// Write to `path`, creating or truncating it.
pub fn write_results(records: &[TrajectoryRecord], path: &Path, format: Format) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_records(records, std::io::BufWriter::new(f), format)
}

pub fn read_records<R: Read>(input: R, format: Format) -> Result<Vec<TrajectoryRecord>> {
    match format {
        Format::Csv => csv::Reader::from_reader(input)
            .deserialize()
            .map(|r| r.map_err(|e| Error::Parse(e.to_string())))
            .collect(),
        Format::Json => serde_json::from_reader(input).map_err(|e| Error::Parse(e.to_string())),
    }
}

fn io_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_csv_is_header_only() {
        let mut buf = Vec::new();
        write_records(&[], &mut buf, Format::Csv).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn round_trip_both_formats() {
        let mut r = TrajectoryRecord::new(1, 7);
        r.distance = Some(0.123456789012345);
        r.block = Some(3);
        r.l_n = Some(5);
        let recs = vec![r, TrajectoryRecord::new(0, 1)];
        for fmt in [Format::Csv, Format::Json] {
            let mut buf = Vec::new();
            write_records(&recs, &mut buf, fmt).unwrap();
            let back = read_records(buf.as_slice(), fmt).unwrap();
            assert_eq!(back, recs);
        }
        let mut buf = Vec::new();
        write_records(&recs[..1], &mut buf, Format::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().nth(1).unwrap(), "1,7,3,0.123456789012345,,,,5");
    }
}
