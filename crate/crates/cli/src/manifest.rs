// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

//! Run manifests.
//!
//! A manifest is a TOML file with `schema_version = 1` and the sections
//! `[basis]`, `[register]`, `[pulse]`, `[oct]`, `[propagate]` and `[analyze]`.
//! Times and fields may be bare numbers (atomic units) or strings with a unit,
//! e.g. `"10 fs"`, `"8 ps"`, `"1 kV/cm"`. Relative paths are taken relative to
//! the manifest's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rydberg_oct_core::atomic::{build_hamiltonian_with, load_hamiltonian, RadialGrid};
use rydberg_oct_core::oct::EnsembleProblem;
use rydberg_oct_core::propagator::PulseGrid;
use rydberg_oct_core::pulses::half_cycle_pulse;
use rydberg_oct_core::units::parse_quantity;
use rydberg_oct_core::{BasisSpec, HamiltonianData, PenaltySchedule, QuantumDefects, RegisterSpec, StateLabel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult, Context};
use crate::io::read_field;

pub const SCHEMA_VERSION: u32 = 1;

/// A number in atomic units or a string carrying its own unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Atomic(f64),
    Text(String),
}

impl Quantity {
    pub fn atomic(&self, key: &str) -> CliResult<f64> {
        match self {
            Quantity::Atomic(v) => Ok(*v),
            Quantity::Text(s) => parse_quantity(s).map_err(|e| CliError::manifest(key, e)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Defects {
    /// `"cesium"` or `"hydrogenic"`.
    Preset(String),
    /// `{ s = 4.05, p = 3.59 }` or `{ 0 = 4.05, 1 = 3.59 }`.
    Table(BTreeMap<String, f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    /// Load a saved Hamiltonian instead of building one.
    pub hamiltonian: Option<PathBuf>,
    pub n_min: Option<u32>,
    pub n_max: Option<u32>,
    /// Exclusive bound on l.
    pub l_max: Option<u32>,
    pub defects: Option<Defects>,
    pub grid_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegisterSection {
    pub orbitals: Vec<String>,
    pub marked: Option<String>,
    /// Marked bits optimized together by `optimize-universal`; defaults to all
    /// but the first and last orbital.
    pub ensemble: Option<Vec<String>>,
    /// Time at which the register holds its phase pattern.
    pub phase_reference_time: Option<Quantity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    /// `"half-cycle"`, `"zero"` or `"file"`.
    pub shape: String,
    pub duration: Option<Quantity>,
    pub dt: Option<Quantity>,
    pub peak: Option<Quantity>,
    pub width: Option<Quantity>,
    pub t_peak: Option<Quantity>,
    /// Field CSV for `shape = "file"`.
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OctSection {
    pub penalty: f64,
    pub edge_multiplier: f64,
    pub ramp_fraction: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for OctSection {
    fn default() -> Self {
        Self {
            penalty: PenaltySchedule::DEFAULT_BASE,
            edge_multiplier: PenaltySchedule::DEFAULT_EDGE_MULTIPLIER,
            ramp_fraction: PenaltySchedule::DEFAULT_RAMP_FRACTION,
            max_iterations: 200,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagateSection {
    /// Trajectory rows are written every this many steps.
    pub record_every: usize,
    /// Absorber on the boundary shells, applied after every step; 0 disables it.
    pub absorber_strength: f64,
}

impl Default for PropagateSection {
    fn default() -> Self {
        Self { record_every: 10, absorber_strength: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyzeSection {
    /// Field CSV analyzed by `analyze` and `decode-test`.
    pub field: Option<PathBuf>,
    pub husimi_sigma: Option<Quantity>,
    pub time_stride: usize,
    /// Highest Husimi frequency, atomic units of angular frequency.
    pub frequency_max: f64,
    pub frequency_count: usize,
    pub peaks: usize,
}

impl Default for AnalyzeSection {
    fn default() -> Self {
        Self { field: None, husimi_sigma: None, time_stride: 4, frequency_max: 4e-4, frequency_count: 200, peaks: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub schema_version: u32,
    pub output_dir: Option<PathBuf>,
    pub basis: BasisSection,
    pub register: Option<RegisterSection>,
    pub pulse: Option<PulseSection>,
    #[serde(default)]
    pub oct: OctSection,
    #[serde(default)]
    pub propagate: PropagateSection,
    #[serde(default)]
    pub analyze: AnalyzeSection,
}

/// A parsed manifest plus the directory its relative paths refer to.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub manifest: RunManifest,
    pub dir: PathBuf,
}

fn label(text: &str, key: &str) -> CliResult<StateLabel> {
    text.parse().map_err(|e| CliError::manifest(key, e))
}

fn required<'a, T>(value: &'a Option<T>, key: &str) -> CliResult<&'a T> {
    value.as_ref().ok_or_else(|| CliError::manifest(key, "missing"))
}

fn defect_l(key: &str) -> Option<u32> {
    key.parse().ok().or_else(|| "spdfghiklmnoqrtuvwxyz".find(key).filter(|_| key.len() == 1).map(|i| i as u32))
}

impl RunManifest {
    pub fn parse(text: &str, origin: &Path) -> CliResult<Self> {
        let m: RunManifest = toml::from_str(text)
            .map_err(|e| CliError::ManifestSyntax { path: origin.to_path_buf(), message: e.to_string() })?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(CliError::manifest(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", m.schema_version),
            ));
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> CliResult<Loaded> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let manifest = Self::parse(&text, path)?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Loaded { manifest, dir })
    }

    pub fn defects(&self) -> CliResult<QuantumDefects> {
        match &self.basis.defects {
            None => Ok(QuantumDefects::hydrogenic()),
            Some(Defects::Preset(name)) => match name.as_str() {
                "cesium" => Ok(QuantumDefects::cesium()),
                "hydrogenic" => Ok(QuantumDefects::hydrogenic()),
                other => Err(CliError::manifest("basis.defects", format!("unknown preset '{other}'"))),
            },
            Some(Defects::Table(table)) => {
                let mut pairs = Vec::new();
                for (k, &v) in table {
                    let l = defect_l(k)
                        .ok_or_else(|| CliError::manifest(format!("basis.defects.{k}"), "not an orbital angular momentum"))?;
                    pairs.push((l, v));
                }
                Ok(QuantumDefects::from_pairs(pairs))
            }
        }
    }

    pub fn basis_spec(&self) -> CliResult<BasisSpec> {
        let b = &self.basis;
        BasisSpec::new(
            *required(&b.n_min, "basis.n_min")?,
            *required(&b.n_max, "basis.n_max")?,
            *required(&b.l_max, "basis.l_max")?,
            self.defects()?,
        )
        .map_err(|e| CliError::manifest("basis", e))
    }

    pub fn register(&self) -> CliResult<RegisterSpec> {
        let r = required(&self.register, "register")?;
        let orbitals = r
            .orbitals
            .iter()
            .map(|o| label(o, "register.orbitals"))
            .collect::<CliResult<Vec<_>>>()?;
        let marked = match &r.marked {
            Some(m) => {
                let m = label(m, "register.marked")?;
                Some(
                    orbitals
                        .iter()
                        .position(|&o| o == m)
                        .ok_or_else(|| CliError::manifest("register.marked", format!("{m} is not a register orbital")))?,
                )
            }
            None => None,
        };
        RegisterSpec::new(orbitals, marked).map_err(|e| CliError::manifest("register", e))
    }

    pub fn phase_reference_time(&self) -> CliResult<f64> {
        match self.register.as_ref().and_then(|r| r.phase_reference_time.as_ref()) {
            Some(q) => q.atomic("register.phase_reference_time"),
            None => Ok(0.0),
        }
    }

    /// Register indices of the ensemble members.
    pub fn ensemble_bits(&self, register: &RegisterSpec) -> CliResult<Vec<usize>> {
        match self.register.as_ref().and_then(|r| r.ensemble.as_ref()) {
            None => Ok(EnsembleProblem::interior_bits(register)),
            Some(list) => list
                .iter()
                .map(|s| {
                    let l = label(s, "register.ensemble")?;
                    register
                        .orbitals
                        .iter()
                        .position(|&o| o == l)
                        .ok_or_else(|| CliError::manifest("register.ensemble", format!("{l} is not a register orbital")))
                })
                .collect(),
        }
    }

    fn pulse(&self) -> CliResult<&PulseSection> {
        required(&self.pulse, "pulse")
    }

    /// Guess field on the run grid.
    pub fn guess(&self, dir: &Path) -> CliResult<PulseGrid> {
        let p = self.pulse()?;
        if p.shape == "file" {
            let file = dir.join(required(&p.file, "pulse.file")?);
            return read_field(&file);
        }
        let duration = required(&p.duration, "pulse.duration")?.atomic("pulse.duration")?;
        let dt = required(&p.dt, "pulse.dt")?.atomic("pulse.dt")?;
        let grid = PulseGrid::covering(duration, dt).map_err(|e| CliError::manifest("pulse.duration", e))?;
        match p.shape.as_str() {
            "zero" => Ok(grid),
            "half-cycle" => {
                let peak = required(&p.peak, "pulse.peak")?.atomic("pulse.peak")?;
                let width = required(&p.width, "pulse.width")?.atomic("pulse.width")?;
                let t_peak = required(&p.t_peak, "pulse.t_peak")?.atomic("pulse.t_peak")?;
                half_cycle_pulse(peak, width, t_peak, &grid).map_err(|e| CliError::manifest("pulse", e))
            }
            other => Err(CliError::manifest("pulse.shape", format!("unknown shape '{other}'"))),
        }
    }

    pub fn penalty(&self, grid: &PulseGrid) -> CliResult<PenaltySchedule> {
        let o = &self.oct;
        PenaltySchedule::new(o.penalty, o.edge_multiplier, o.ramp_fraction, grid).map_err(|e| CliError::manifest("oct", e))
    }

    /// Husimi window: the manifest value, else a quarter of the guess
    /// half-cycle width, else 1/32 of the field duration.
    pub fn husimi_sigma(&self, field: &PulseGrid) -> CliResult<f64> {
        if let Some(q) = &self.analyze.husimi_sigma {
            return q.atomic("analyze.husimi_sigma");
        }
        if let Some(PulseSection { shape, width: Some(w), .. }) = &self.pulse {
            if shape == "half-cycle" {
                return Ok(w.atomic("pulse.width")? / 4.0);
            }
        }
        Ok(field.duration() / 32.0)
    }
}

impl Loaded {
    pub fn resolve(&self, path: &Path) -> PathBuf {
        self.dir.join(path)
    }

    /// Load the basis file named in the manifest or build it from the spec.
    pub fn hamiltonian(&self) -> CliResult<HamiltonianData> {
        let m = &self.manifest;
        if let Some(file) = &m.basis.hamiltonian {
            let path = self.resolve(file);
            return load_hamiltonian(&path).context(|| format!("loading {}", path.display()));
        }
        let spec = m.basis_spec()?;
        let points = m.basis.grid_points.unwrap_or(RadialGrid::DEFAULT_POINTS);
        let grid = RadialGrid::for_n_max(spec.n_max, points).map_err(|e| CliError::manifest("basis.grid_points", e))?;
        build_hamiltonian_with(&spec, &grid).context(|| "building the basis".into())
    }

    pub fn guess(&self) -> CliResult<PulseGrid> {
        self.manifest.guess(&self.dir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: &str = "schema_version = 1\n[basis]\nn_min = 5\nn_max = 8\nl_max = 3\n";

    fn parse(text: &str) -> CliResult<RunManifest> {
        RunManifest::parse(text, Path::new("test.toml"))
    }

    #[test]
    fn defaults_fill_optional_sections() {
        let m = parse(MIN).unwrap();
        assert_eq!(m.oct, OctSection::default());
        assert_eq!(m.defects().unwrap(), QuantumDefects::hydrogenic());
        assert_eq!(m.phase_reference_time().unwrap(), 0.0);
        assert_eq!(m.basis_spec().unwrap().labels().len(), 4 * 3);
    }

    #[test]
    fn defect_tables_accept_letters_and_numbers() {
        let m = parse(&format!("{MIN}defects = {{ s = 4.05, 1 = 3.59 }}\n")).unwrap();
        let d = m.defects().unwrap();
        assert_eq!(d.get(0), 4.05);
        assert_eq!(d.get(1), 3.59);
        assert_eq!(d.get(2), 0.0);
        let bad = parse(&format!("{MIN}defects = {{ j = 1.0 }}\n")).unwrap();
        assert!(matches!(bad.defects(), Err(CliError::Manifest { key, .. }) if key == "basis.defects.j"));
        let preset = parse(&format!("{MIN}defects = \"sodium\"\n")).unwrap();
        assert!(preset.defects().is_err());
    }

    #[test]
    fn schema_version_is_checked() {
        let err = parse(&MIN.replace("schema_version = 1", "schema_version = 2")).unwrap_err();
        assert!(matches!(err, CliError::Manifest { key, .. } if key == "schema_version"));
        assert!(matches!(parse("[basis]\n"), Err(CliError::ManifestSyntax { .. })));
    }

    #[test]
    fn register_keys_are_validated() {
        let text = format!("{MIN}[register]\norbitals = [\"5p\", \"6p\"]\nmarked = \"7p\"\n");
        let err = parse(&text).unwrap().register().unwrap_err();
        assert!(matches!(err, CliError::Manifest { key, .. } if key == "register.marked"));
        let text = format!("{MIN}[register]\norbitals = [\"5p\", \"6p\", \"7p\"]\n");
        let m = parse(&text).unwrap();
        assert_eq!(m.ensemble_bits(&m.register().unwrap()).unwrap(), vec![1]);
    }

    #[test]
    fn quantities_take_units_or_atomic_numbers() {
        assert_eq!(Quantity::Atomic(3.0).atomic("k").unwrap(), 3.0);
        let fs = Quantity::Text("10 fs".into()).atomic("k").unwrap();
        assert!((fs - 413.41373335).abs() < 1e-6);
        assert!(Quantity::Text("3 furlongs".into()).atomic("k").is_err());
    }
}
