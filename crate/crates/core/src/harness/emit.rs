//! CSV and JSON output of sweep records.
//!
//! CSV has exactly the columns
//! `detector,snr_db,trials,bit_errors,ber,mean_ops,rel_pct,restarts,mean_card_theta`.
//! JSON wraps the records with the error target and a per-record
//! `censored` flag.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::{HarnessError, SweepRecord};

pub const CSV_HEADER: [&str; 9] = [
    "detector",
    "snr_db",
    "trials",
    "bit_errors",
    "ber",
    "mean_ops",
    "rel_pct",
    "restarts",
    "mean_card_theta",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Serialize)]
struct JsonRecord<'a> {
    #[serde(flatten)]
    record: &'a SweepRecord,
    censored: bool,
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    min_bit_errors: u64,
    records: Vec<JsonRecord<'a>>,
}

pub fn write_records<W: Write>(
    records: &[SweepRecord],
    format: OutputFormat,
    min_bit_errors: u64,
    writer: W,
) -> Result<(), HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::EmptyRecords);
    }
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(writer);
            w.write_record(CSV_HEADER)?;
            for r in records {
                w.write_record([
                    r.detector.clone(),
                    r.snr_db.to_string(),
                    r.trials.to_string(),
                    r.bit_errors.to_string(),
                    r.ber.to_string(),
                    r.mean_ops.to_string(),
                    r.rel_pct.to_string(),
                    r.restarts.to_string(),
                    r.mean_card_theta.to_string(),
                ])?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let doc = JsonDocument {
                min_bit_errors,
                records: records
                    .iter()
                    .map(|record| JsonRecord {
                        record,
                        censored: record.is_censored(min_bit_errors),
                    })
                    .collect(),
            };
            let mut writer = writer;
            serde_json::to_writer_pretty(&mut writer, &doc)?;
            writeln!(writer)?;
        }
    }
    Ok(())
}

pub fn emit(
    records: &[SweepRecord],
    format: OutputFormat,
    min_bit_errors: u64,
    path: &Path,
) -> Result<(), HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::EmptyRecords);
    }
    let file = BufWriter::new(File::create(path)?);
    write_records(records, format, min_bit_errors, file)
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRecord>, HarnessError> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(HarnessError::ConfigError(format!("unexpected CSV header {header:?}")));
    }
    reader
        .deserialize()
        .map(|r| r.map_err(HarnessError::from))
        .collect()
}
