// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

//! Plain-text Hamiltonian files.
//!
//! ```text
//! format = rydberg-oct-hamiltonian/1
//! n_min = 24
//! n_max = 29
//! l_max = 2
//! defects = 0:4.05,1:3.59
//! provenance = generated: ...
//!
//! [energies]
//! 24s,-1.2345678901234567e-3
//! ...
//! [dipoles]
//! 24s,24p,1.2345678901234567e2
//! ...
//! ```
//!
//! Dipole rows list nonzero entries; a missing transpose is filled by
//! symmetry. Values are written with 17 significant digits so a save/load
//! cycle is bit-exact. Without the basis keys, state order follows the
//! energies section.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::{BasisSpec, HamiltonianData, QuantumDefects, StateLabel};
use crate::error::{Error, Result};

const FORMAT: &str = "rydberg-oct-hamiltonian/1";

pub fn save_hamiltonian(data: &HamiltonianData, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_hamiltonian(data, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_hamiltonian(path: impl AsRef<Path>) -> Result<HamiltonianData> {
    read_hamiltonian(BufReader::new(File::open(path)?))
}

pub fn write_hamiltonian(data: &HamiltonianData, w: &mut impl Write) -> Result<()> {
    writeln!(w, "format = {FORMAT}")?;
    if let Some(spec) = &data.spec {
        writeln!(w, "n_min = {}", spec.n_min)?;
        writeln!(w, "n_max = {}", spec.n_max)?;
        writeln!(w, "l_max = {}", spec.l_max)?;
        let defects: Vec<String> =
            spec.quantum_defects.iter().map(|(l, d)| format!("{l}:{d:?}")).collect();
        writeln!(w, "defects = {}", defects.join(","))?;
    }
    writeln!(w, "provenance = {}", data.provenance.replace('\n', " "))?;
    writeln!(w)?;
    writeln!(w, "[energies]")?;
    for (label, e) in data.labels.iter().zip(data.energies.iter()) {
        writeln!(w, "{label},{e:.16e}")?;
    }
    writeln!(w, "[dipoles]")?;
    for (i, a) in data.labels.iter().enumerate() {
        for (j, b) in data.labels.iter().enumerate() {
            let v = data.z[(i, j)];
            if v != 0.0 {
                writeln!(w, "{a},{b},{v:.16e}")?;
            }
        }
    }
    Ok(())
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_f64(text: &str, line: usize) -> Result<f64> {
    text.trim().parse().map_err(|_| parse_err(line, format!("bad number '{}'", text.trim())))
}

fn parse_label(text: &str, line: usize) -> Result<StateLabel> {
    text.parse().map_err(|e: Error| parse_err(line, e.to_string()))
}

#[derive(PartialEq)]
enum Section {
    Header,
    Energies,
    Dipoles,
}

pub fn read_hamiltonian(reader: impl BufRead) -> Result<HamiltonianData> {
    let mut header: HashMap<String, (usize, String)> = HashMap::new();
    let mut energies: Vec<(usize, StateLabel, f64)> = Vec::new();
    let mut dipoles: Vec<(usize, StateLabel, StateLabel, f64)> = Vec::new();
    let mut section = Section::Header;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line {
            "[energies]" => {
                section = Section::Energies;
                continue;
            }
            "[dipoles]" => {
                section = Section::Dipoles;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Header => {
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| parse_err(lineno, "expected key = value"))?;
                header.insert(k.trim().to_string(), (lineno, v.trim().to_string()));
            }
            Section::Energies => {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != 2 {
                    return Err(parse_err(lineno, "expected label,energy"));
                }
                energies.push((lineno, parse_label(fields[0], lineno)?, parse_f64(fields[1], lineno)?));
            }
            Section::Dipoles => {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != 3 {
                    return Err(parse_err(lineno, "expected label,label,value"));
                }
                dipoles.push((
                    lineno,
                    parse_label(fields[0], lineno)?,
                    parse_label(fields[1], lineno)?,
                    parse_f64(fields[2], lineno)?,
                ));
            }
        }
    }

    match header.get("format") {
        Some((_, f)) if f == FORMAT => {}
        Some((line, f)) => return Err(parse_err(*line, format!("unsupported format '{f}'"))),
        None => return Err(parse_err(1, "missing format key")),
    }

    let spec = parse_spec(&header)?;
    let labels = match &spec {
        Some(s) => s.labels(),
        None => energies.iter().map(|&(_, l, _)| l).collect(),
    };
    let index: HashMap<StateLabel, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let n = labels.len();

    let mut energy = vec![None; n];
    for &(line, label, e) in &energies {
        let i = *index
            .get(&label)
            .ok_or_else(|| Error::Validation(format!("line {line}: {label} is not in the basis")))?;
        if energy[i].replace(e).is_some() {
            return Err(Error::Validation(format!("line {line}: duplicate energy for {label}")));
        }
    }
    let energy: Vec<f64> = energy
        .into_iter()
        .zip(&labels)
        .map(|(e, l)| e.ok_or_else(|| Error::Validation(format!("missing energy for {l}"))))
        .collect::<Result<_>>()?;

    let mut z = DMatrix::zeros(n, n);
    let mut seen = vec![false; n * n];
    for &(line, a, b, v) in &dipoles {
        let (i, j) = match (index.get(&a), index.get(&b)) {
            (Some(&i), Some(&j)) => (i, j),
            _ => {
                return Err(Error::Validation(format!(
                    "line {line}: <{a}|z|{b}> refers to a state outside the basis"
                )))
            }
        };
        if a.l.abs_diff(b.l) != 1 {
            return Err(Error::Validation(format!(
                "line {line}: <{a}|z|{b}> violates the dipole selection rule"
            )));
        }
        if seen[i * n + j] {
            return Err(Error::Validation(format!("line {line}: duplicate entry <{a}|z|{b}>")));
        }
        seen[i * n + j] = true;
        z[(i, j)] = v;
    }
    for i in 0..n {
        for j in 0..n {
            if seen[i * n + j] && !seen[j * n + i] {
                z[(j, i)] = z[(i, j)];
            }
        }
    }

    let provenance = header.get("provenance").map(|(_, p)| p.clone()).unwrap_or_default();
    let mut data = HamiltonianData::new(labels, DVector::from_vec(energy), z, provenance)?;
    data.spec = spec;
    data.validate()?;
    Ok(data)
}

fn parse_spec(header: &HashMap<String, (usize, String)>) -> Result<Option<BasisSpec>> {
    let get_u32 = |key: &str| -> Result<Option<u32>> {
        header
            .get(key)
            .map(|(line, v)| v.parse().map_err(|_| parse_err(*line, format!("bad {key} '{v}'"))))
            .transpose()
    };
    let (n_min, n_max, l_max) = match (get_u32("n_min")?, get_u32("n_max")?, get_u32("l_max")?) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        (None, None, None) => return Ok(None),
        _ => return Err(parse_err(1, "n_min, n_max and l_max must appear together")),
    };
    let mut pairs = Vec::new();
    if let Some((line, text)) = header.get("defects") {
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (l, d) = item
                .split_once(':')
                .ok_or_else(|| parse_err(*line, format!("bad defect entry '{item}'")))?;
            let l: u32 = l.trim().parse().map_err(|_| parse_err(*line, format!("bad l '{l}'")))?;
            pairs.push((l, parse_f64(d, *line)?));
        }
    }
    let spec = BasisSpec::new(n_min, n_max, l_max, QuantumDefects::from_pairs(pairs))?;
    Ok(Some(spec))
}
