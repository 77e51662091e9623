// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

//! CSV and JSON files written and read by the commands. Everything is in
//! atomic units.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rydberg_oct_core::propagator::PulseGrid;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Relative tolerance on the spacing of a field file's time column.
const SPACING_TOL: f64 = 1e-9;

pub fn csv_writer(path: &Path) -> CliResult<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| CliError::data(path, e))
}

pub fn write_rows<R: Serialize>(path: &Path, header: &[String], rows: impl IntoIterator<Item = R>) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| CliError::data(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| CliError::data(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// `time,field` rows.
pub fn write_field(path: &Path, field: &PulseGrid) -> CliResult<()> {
    let header = ["time".to_string(), "field".to_string()];
    write_rows(path, &header, field.times().into_iter().zip(field.samples.iter().copied()))
}

pub fn read_field(path: &Path) -> CliResult<PulseGrid> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::data(path, e))?;
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (i, row) in r.deserialize::<(f64, f64)>().enumerate() {
        let (t, e) = row.map_err(|e| CliError::data(path, format!("row {}: {e}", i + 1)))?;
        times.push(t);
        samples.push(e);
    }
    if times.len() < 2 {
        return Err(CliError::data(path, "a field needs at least two samples"));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    for (j, &t) in times.iter().enumerate() {
        let expect = times[0] + j as f64 * dt;
        if (t - expect).abs() > SPACING_TOL * dt.abs().max(expect.abs()) {
            return Err(CliError::data(path, format!("time column is not uniformly spaced at row {}", j + 1)));
        }
    }
    PulseGrid::new(times[0], dt, samples).map_err(|e| CliError::data(path, e))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::data(path, e))?;
    writeln!(w).map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_json(path: &Path) -> CliResult<serde_json::Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::data(path, e))
}
