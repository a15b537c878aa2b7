//! JSON-lines record files, gzip-compressed when the path ends in `.gz`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::Serialize;

use super::{MeasurementRecord, Scheme};
use crate::error::{Error, Result};

fn is_gzip(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

pub fn write_records(recs: &[MeasurementRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = BufWriter::new(File::create(path)?);
    let mut out: Box<dyn Write> = if is_gzip(path) {
        Box::new(GzEncoder::new(file, Compression::default()))
    } else {
        Box::new(file)
    };
    for r in recs {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn open_lines(path: &Path) -> Result<Box<dyn BufRead>> {
    let file = File::open(path)?;
    let inner: Box<dyn Read> = if is_gzip(path) { Box::new(GzDecoder::new(file)) } else { Box::new(file) };
    Ok(Box::new(BufReader::new(inner)))
}

fn parse_line(text: &str, line: usize) -> Result<MeasurementRecord> {
    let rec: MeasurementRecord =
        serde_json::from_str(text).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
    rec.validate().map_err(|e| Error::Parse { line, msg: e.to_string() })?;
    Ok(rec)
}

/// Read and validate every record; the first bad line aborts with its line number.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<MeasurementRecord>> {
    let mut recs = Vec::new();
    for (i, line) in open_lines(path.as_ref())?.lines().enumerate() {
        let line_text = line?;
        if line_text.trim().is_empty() {
            continue;
        }
        recs.push(parse_line(&line_text, i + 1)?);
    }
    Ok(recs)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub records: usize,
    pub total_outcomes: usize,
    pub ancilla_records: usize,
    pub two_sided_records: usize,
    pub qubits: Vec<usize>,
    pub errors: Vec<LineError>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Check every line, collecting diagnostics instead of stopping at the first one.
pub fn validate_records(path: impl AsRef<Path>) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();
    for (i, line) in open_lines(path.as_ref())?.lines().enumerate() {
        let line_text = line?;
        if line_text.trim().is_empty() {
            continue;
        }
        match parse_line(&line_text, i + 1) {
            Ok(r) => {
                report.records += 1;
                report.total_outcomes += r.outcomes.len();
                match r.scheme {
                    Scheme::Ancilla => report.ancilla_records += 1,
                    Scheme::TwoSided => report.two_sided_records += 1,
                }
                if !report.qubits.contains(&r.n) {
                    report.qubits.push(r.n);
                }
            }
            Err(Error::Parse { line, msg }) => report.errors.push(LineError { line, message: msg }),
            Err(e) => return Err(e),
        }
    }
    if report.qubits.len() > 1 {
        report.errors.push(LineError { line: 0, message: format!("records mix qubit counts {:?}", report.qubits) });
    }
    Ok(report)
}
