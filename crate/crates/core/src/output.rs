//! CSV and JSON serialization of [`SweepResult`].
//!
//! CSV dialect: `#`-prefixed `key = value` metadata lines, then a header
//! row, then comma-separated rows. Numbers are written as `{:.16e}`, which
//! round-trips every `f64` and keeps the output byte-stable.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sweep::{OutputFormat, SweepResult};

pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    for (k, v) in &result.metadata {
        writeln!(out, "# {k} = {}", v.replace('\n', " "))?;
    }
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    writer.write_record(&result.header)?;
    for row in &result.rows {
        if row.len() != result.header.len() {
            return Err(Error::Contract(format!(
                "row of {} values under a header of {} columns",
                row.len(),
                result.header.len()
            )));
        }
        writer.write_record(row.iter().map(|&v| format_number(v)))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<SweepResult> {
    let mut metadata = BTreeMap::new();
    let mut body = String::new();
    for line in BufReader::new(input).lines() {
        let line = line?;
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.split_once('=') {
                metadata.insert(k.trim().to_owned(), v.trim().to_owned());
            }
        } else {
            body.push_str(&line);
            body.push('\n');
        }
    }
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let header = reader.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| Error::Contract(format!("bad numeric field '{f}'"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(SweepResult { metadata, header, rows })
}

pub fn write_json<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, result)?;
    writeln!(out)?;
    Ok(())
}

pub fn read_json<R: Read>(input: R) -> Result<SweepResult> {
    Ok(serde_json::from_reader(input)?)
}

pub fn write_result<W: Write>(result: &SweepResult, format: OutputFormat, out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(result, out),
        OutputFormat::Json => write_json(result, out),
    }
}

pub fn write_to_path(result: &SweepResult, format: OutputFormat, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_result(result, format, &mut out)?;
    out.flush()?;
    Ok(())
}

/// `.json` means JSON, anything else CSV.
pub fn format_for_path(path: &Path) -> OutputFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("json") => OutputFormat::Json,
        _ => OutputFormat::Csv,
    }
}
