// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use log::info;
use rydberg_oct_core::atomic::save_hamiltonian;
use rydberg_oct_core::oct::{decode_test, optimize, optimize_ensemble, DecodeRow, EnsembleProblem, OctProblem};
use rydberg_oct_core::propagator::{propagate_with_absorber, Absorber, Record, WavePacket};
use rydberg_oct_core::pulses::{husimi, linspace, spectrum};
use rydberg_oct_core::register::{encode_with_reference, readout, Readout};
use rydberg_oct_core::units::au_to_kv_per_cm;
use rydberg_oct_core::{HamiltonianData, IterationRecord, PulseGrid, RegisterSpec, StateLabel, ZEigensystem};
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult, Context};
use crate::io::{read_field, write_field, write_json, write_rows};
use crate::manifest::{Loaded, RunManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Basis,
    Propagate,
    Optimize,
    OptimizeUniversal,
    Analyze,
    DecodeTest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Basis => "basis",
            Command::Propagate => "propagate",
            Command::Optimize => "optimize",
            Command::OptimizeUniversal => "optimize-universal",
            Command::Analyze => "analyze",
            Command::DecodeTest => "decode-test",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub manifest: PathBuf,
    /// Overrides the manifest's `output_dir`.
    pub out: Option<PathBuf>,
    /// Field CSV for `analyze` and `decode-test`; overrides `analyze.field`.
    pub field: Option<PathBuf>,
}

/// Run one command and write its files. Returns the summary that was also
/// written to `summary.json`.
pub fn run(inv: &Invocation) -> CliResult<Value> {
    let loaded = RunManifest::load(&inv.manifest)?;
    let out = match (&inv.out, &loaded.manifest.output_dir) {
        (Some(dir), _) => dir.clone(),
        (None, Some(dir)) => loaded.resolve(dir),
        (None, None) => return Err(CliError::Usage("no output directory: pass --out or set output_dir".into())),
    };
    std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    let mut report = Report::new(&out);
    match inv.command {
        Command::Basis => cmd_basis(&loaded, &mut report)?,
        Command::Propagate => cmd_propagate(&loaded, &mut report)?,
        Command::Optimize => cmd_optimize(&loaded, &mut report)?,
        Command::OptimizeUniversal => cmd_optimize_universal(&loaded, &mut report)?,
        Command::Analyze => cmd_analyze(&loaded, inv.field.as_deref(), &mut report)?,
        Command::DecodeTest => cmd_decode_test(&loaded, inv.field.as_deref(), &mut report)?,
    }
    let summary = json!({
        "tool": "rydberg-oct",
        "version": env!("CARGO_PKG_VERSION"),
        "command": inv.command.name(),
        "manifest": loaded.manifest,
        "parameters": Value::Object(report.parameters),
        "metrics": Value::Object(report.metrics),
        "files": report.files,
    });
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

struct Report {
    dir: PathBuf,
    parameters: Map<String, Value>,
    metrics: Map<String, Value>,
    files: Vec<String>,
}

impl Report {
    fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), parameters: Map::new(), metrics: Map::new(), files: Vec::new() }
    }

    fn file(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.parameters.insert(key.into(), value.into());
    }

    fn metric(&mut self, key: &str, value: impl Into<Value>) {
        self.metrics.insert(key.into(), value.into());
    }

    fn grid_params(&mut self, h: &HamiltonianData, field: &PulseGrid) {
        self.param("basis_states", h.dim());
        self.param("dt", field.dt);
        self.param("t0", field.t0);
        self.param("duration", field.duration());
        self.param("steps", field.steps());
    }
}

pub fn readout_json(r: &Readout) -> Value {
    let populations: Map<String, Value> =
        r.labels.iter().zip(&r.populations).map(|(l, &p)| (l.to_string(), json!(p))).collect();
    json!({
        "populations": populations,
        "decoded": r.decoded_label().to_string(),
        "leaked": r.leaked,
    })
}

pub fn decode_json(rows: &[DecodeRow]) -> Value {
    Value::Array(
        rows.iter()
            .map(|row| {
                let mut v = readout_json(&row.readout);
                v["marked"] = json!(row.marked.to_string());
                v["success"] = json!(row.success);
                v
            })
            .collect(),
    )
}

/// Population left on the edge shells of the basis.
fn boundary_population(psi: &WavePacket, h: &HamiltonianData) -> f64 {
    h.boundary_indices().iter().map(|&i| psi.population(i)).sum()
}

fn boundary_labels(h: &HamiltonianData) -> Vec<StateLabel> {
    h.boundary_indices().iter().map(|&i| h.labels[i]).collect()
}

fn field_metrics(report: &mut Report, field: &PulseGrid) {
    let peak = field.peak();
    report.metric("field_peak", peak);
    report.metric("field_peak_kv_per_cm", au_to_kv_per_cm(peak));
    let ratio = |e: f64| if peak > 0.0 { e.abs() / peak } else { 0.0 };
    report.metric("field_start_over_peak", ratio(field.samples[0]));
    report.metric("field_end_over_peak", ratio(*field.samples.last().unwrap()));
}

fn history_metrics(report: &mut Report, history: &[IterationRecord], violation: Option<usize>) {
    report.metric("iterations", history.len());
    report.metric("monotone", violation.is_none());
    report.metric("monotonicity_violation", violation);
    let worst = history.iter().map(|r| r.delta3.abs()).fold(0.0, f64::max);
    report.metric("max_abs_delta3", worst);
}

fn marked_register(loaded: &Loaded) -> CliResult<RegisterSpec> {
    let reg = loaded.manifest.register()?;
    if reg.marked.is_none() {
        return Err(CliError::manifest("register.marked", "this command needs a marked bit"));
    }
    Ok(reg)
}

fn cmd_basis(loaded: &Loaded, report: &mut Report) -> CliResult<()> {
    let h = loaded.hamiltonian()?;
    let path = report.file("hamiltonian.txt");
    save_hamiltonian(&h, &path).context(|| format!("writing {}", path.display()))?;
    report.param("basis_states", h.dim());
    report.metric("states", h.dim());
    report.metric("lowest_energy", h.energies.min());
    report.metric("highest_energy", h.energies.max());
    report.metric("max_abs_dipole", h.z.amax());
    report.metric("nonzero_dipoles", h.z.iter().filter(|&&v| v != 0.0).count());
    report.metric("boundary_states", h.boundary_indices().len());
    info!("{} states written to {}", h.dim(), path.display());
    Ok(())
}

fn cmd_propagate(loaded: &Loaded, report: &mut Report) -> CliResult<()> {
    let m = &loaded.manifest;
    let h = loaded.hamiltonian()?;
    let reg = m.register()?;
    let t_ref = m.phase_reference_time()?;
    let field = loaded.guess()?;
    report.grid_params(&h, &field);
    report.param("phase_reference_time", t_ref);
    let zsys = ZEigensystem::new(&h).context(|| "dipole eigensystem".into())?;
    let psi0 = encode_with_reference(&reg, &h, t_ref).context(|| "encoding the register".into())?;
    let strength = m.propagate.absorber_strength;
    let absorber = if strength > 0.0 {
        Some(Absorber::new(&h, &boundary_labels(&h), strength).map_err(|e| CliError::manifest("propagate.absorber_strength", e))?)
    } else {
        None
    };
    let every = m.propagate.record_every.max(1);
    let traj = propagate_with_absorber(&psi0, &field, &h, &zsys, Record::Every(every), absorber.as_ref());

    let mut header = vec!["time".to_string()];
    header.extend(h.labels.iter().map(|l| l.to_string()));
    let rows = traj.states.iter().map(|s| {
        let mut row = vec![s.time];
        row.extend(s.populations());
        row
    });
    write_rows(&report.file("trajectory.csv"), &header, rows)?;
    write_field(&report.file("field.csv"), &field)?;
    let end = &traj.final_state;
    let r = readout(end, &reg, &h).context(|| "readout".into())?;
    write_json(&report.file("readout.json"), &readout_json(&r))?;

    if let Some(k) = reg.marked {
        report.metric("marked_population", r.populations[k]);
        report.metric("decodes_marked", r.decodes(k));
    }
    report.metric("decoded", r.decoded_label().to_string());
    report.metric("leaked", r.leaked);
    report.metric("boundary_population", boundary_population(end, &h));
    report.metric("norm", end.norm());
    Ok(())
}

fn cmd_optimize(loaded: &Loaded, report: &mut Report) -> CliResult<()> {
    let m = &loaded.manifest;
    let h = loaded.hamiltonian()?;
    let reg = marked_register(loaded)?;
    let t_ref = m.phase_reference_time()?;
    let guess = loaded.guess()?;
    let penalty = m.penalty(&guess)?;
    report.grid_params(&h, &guess);
    report.param("phase_reference_time", t_ref);
    let psi0 = encode_with_reference(&reg, &h, t_ref).context(|| "encoding the register".into())?;
    let target = reg.marked_label().unwrap();
    let problem = OctProblem::new(&h, psi0, target, guess, penalty)
        .map_err(|e| CliError::manifest("oct", e))?
        .with_iterations(m.oct.max_iterations, m.oct.tolerance);
    let result = optimize(&problem).context(|| format!("optimizing toward {target}"))?;

    write_field(&report.file("field.csv"), &result.field)?;
    write_field(&report.file("guess_field.csv"), &result.guess)?;
    let header: Vec<String> =
        ["iteration", "J", "yield", "Y", "fluence", "delta1", "delta3"].iter().map(|s| s.to_string()).collect();
    let rows = result
        .history
        .iter()
        .map(|r| (r.iteration, r.functional, r.yield_sum, r.cost, r.fluence, r.delta1, r.delta3));
    write_rows(&report.file("history.csv"), &header, rows)?;
    let r = readout(&result.final_state, &reg, &h).context(|| "readout".into())?;
    write_json(&report.file("readout.json"), &readout_json(&r))?;

    report.metric("target", target.to_string());
    report.metric("guess_yield", result.guess_yield);
    report.metric("final_yield", result.final_yield());
    report.metric("converged", result.converged);
    history_metrics(report, &result.history, result.monotonicity_violation);
    report.metric("decoded", r.decoded_label().to_string());
    report.metric("decodes_marked", r.decodes(reg.marked.unwrap()));
    report.metric("leaked", r.leaked);
    report.metric("boundary_population", boundary_population(&result.final_state, &h));
    field_metrics(report, &result.field);
    info!("yield {:.4} -> {:.4} in {} iterations", result.guess_yield, result.final_yield(), result.iterations());
    Ok(())
}

fn cmd_optimize_universal(loaded: &Loaded, report: &mut Report) -> CliResult<()> {
    let m = &loaded.manifest;
    let h = loaded.hamiltonian()?;
    let reg = m.register()?.with_marked(None).map_err(|e| CliError::manifest("register", e))?;
    let bits = m.ensemble_bits(&reg)?;
    let t_ref = m.phase_reference_time()?;
    let guess = loaded.guess()?;
    let penalty = m.penalty(&guess)?;
    report.grid_params(&h, &guess);
    report.param("phase_reference_time", t_ref);
    let problem = EnsembleProblem::for_register(&h, &reg, &bits, t_ref, guess, penalty)
        .map_err(|e| CliError::manifest("register.ensemble", e))?
        .with_iterations(m.oct.max_iterations, m.oct.tolerance);
    let members: Vec<String> = problem.members.iter().map(|mb| mb.target.to_string()).collect();
    report.param("members", members.clone());
    report.param("excluded", problem.excluded.iter().map(|l| l.to_string()).collect::<Vec<_>>());
    let result = optimize_ensemble(&problem).context(|| "optimizing the ensemble".into())?;

    write_field(&report.file("field.csv"), &result.field)?;
    write_field(&report.file("guess_field.csv"), &result.guess)?;
    let mut header: Vec<String> = ["iteration", "J", "yield_sum", "product_fidelity", "Y", "fluence", "delta1", "delta3"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(members.iter().map(|l| format!("yield_{l}")));
    let rows = result.history.iter().map(|r| {
        let mut row = vec![
            r.iteration as f64,
            r.functional,
            r.yield_sum,
            r.product_fidelity(),
            r.cost,
            r.fluence,
            r.delta1,
            r.delta3,
        ];
        row.extend(&r.member_yields);
        row
    });
    write_rows(&report.file("history.csv"), &header, rows)?;

    let all: Vec<usize> = (0..reg.len()).collect();
    let table = decode_test(&result.field, &reg, &all, t_ref, &h).context(|| "decode test".into())?;
    write_json(&report.file("decode.json"), &decode_json(&table))?;

    let guess_yields: Map<String, Value> = members.iter().cloned().zip(result.guess_yields.iter().map(|&y| json!(y))).collect();
    let final_yields: Map<String, Value> = members.iter().cloned().zip(result.final_yields().iter().map(|&y| json!(y))).collect();
    report.metric("guess_yields", guess_yields);
    report.metric("final_yields", final_yields);
    report.metric("product_fidelity", result.final_yields().iter().product::<f64>());
    report.metric("decode_accuracy", result.decode_accuracy);
    report.metric("members", result.final_states.len());
    report.metric(
        "register_decodes",
        table.iter().filter(|r| r.success).count(),
    );
    report.metric("converged", result.converged);
    history_metrics(report, &result.history, result.monotonicity_violation);
    let boundary: Vec<f64> = result.final_states.iter().map(|s| boundary_population(s, &h)).collect();
    report.metric("boundary_population", boundary.iter().cloned().fold(0.0, f64::max));
    field_metrics(report, &result.field);
    info!("decode accuracy {}/{}", result.decode_accuracy, result.final_states.len());
    Ok(())
}

fn field_path(loaded: &Loaded, flag: Option<&Path>) -> CliResult<PathBuf> {
    match (flag, &loaded.manifest.analyze.field) {
        (Some(p), _) => Ok(p.to_path_buf()),
        (None, Some(p)) => Ok(loaded.resolve(p)),
        (None, None) => Err(CliError::manifest("analyze.field", "missing (or pass --field)")),
    }
}

/// Energies of the basis states and their dipole-allowed transitions, without
/// solving for radial functions.
fn transitions(loaded: &Loaded) -> CliResult<Vec<(f64, String)>> {
    let m = &loaded.manifest;
    let levels: Vec<(StateLabel, f64)> = if let Some(file) = &m.basis.hamiltonian {
        let h = loaded.hamiltonian().map_err(|e| CliError::manifest("basis.hamiltonian", format!("{e} ({})", file.display())))?;
        h.labels.iter().copied().zip(h.energies.iter().copied()).collect()
    } else {
        let spec = m.basis_spec()?;
        spec.labels()
            .into_iter()
            .map(|l| Ok((l, spec.energy(l).map_err(|e| CliError::manifest("basis", e))?)))
            .collect::<CliResult<_>>()?
    };
    let mut out = Vec::new();
    for (i, &(a, ea)) in levels.iter().enumerate() {
        for &(b, eb) in &levels[i + 1..] {
            if a.l.abs_diff(b.l) == 1 {
                let (lo, hi) = if ea < eb { (a, b) } else { (b, a) };
                out.push(((ea - eb).abs(), format!("{lo}-{hi}")));
            }
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(out)
}

fn nearest(gaps: &[(f64, String)], w: f64) -> Option<&(f64, String)> {
    gaps.iter().min_by(|a, b| (a.0 - w).abs().total_cmp(&(b.0 - w).abs()))
}

fn cmd_analyze(loaded: &Loaded, flag: Option<&Path>, report: &mut Report) -> CliResult<()> {
    let m = &loaded.manifest;
    let path = field_path(loaded, flag)?;
    let field = read_field(&path)?;
    let gaps = transitions(loaded)?;
    let spec = spectrum(&field);
    report.param("dt", field.dt);
    report.param("samples", field.len());
    report.param("fft_len", spec.fft_len);
    report.param("bin_width", spec.bin_width());

    let header: Vec<String> =
        ["frequency", "magnitude", "nearest_gap", "gap_distance", "transition"].iter().map(|s| s.to_string()).collect();
    let rows = spec.frequencies.iter().zip(&spec.magnitudes).map(|(&w, &mag)| match nearest(&gaps, w) {
        Some((g, name)) => (w, mag, *g, (w - g).abs(), name.clone()),
        None => (w, mag, f64::NAN, f64::NAN, String::new()),
    });
    write_rows(&report.file("spectrum.csv"), &header, rows)?;

    let sigma = m.husimi_sigma(&field)?;
    let a = &m.analyze;
    if a.frequency_count < 2 || !(a.frequency_max > 0.0) {
        return Err(CliError::manifest("analyze.frequency_count", "need at least two frequencies up to a positive maximum"));
    }
    let freqs = linspace(0.0, a.frequency_max, a.frequency_count);
    let map = husimi(&field, sigma, a.time_stride.max(1), &freqs).map_err(|e| CliError::manifest("analyze.husimi_sigma", e))?;
    report.param("husimi_sigma", sigma);
    let mut header = vec!["time\\frequency".to_string()];
    header.extend(map.frequencies.iter().map(|w| w.to_string()));
    let rows = map.times.iter().zip(&map.intensity).map(|(&t, row)| {
        let mut r = vec![t];
        r.extend(row);
        r
    });
    write_rows(&report.file("husimi.csv"), &header, rows)?;

    let bin = spec.bin_width();
    let peaks: Vec<Value> = spec
        .peaks(a.peaks)
        .into_iter()
        .map(|k| {
            let w = spec.frequencies[k];
            let near = nearest(&gaps, w);
            json!({
                "frequency": w,
                "magnitude": spec.magnitudes[k],
                "nearest_transition": near.map(|n| n.1.clone()),
                "nearest_gap": near.map(|n| n.0),
                "distance_in_bins": near.map(|n| (w - n.0).abs() / bin),
            })
        })
        .collect();
    report.metric("peaks", peaks);
    report.metric("energy", spec.energy());
    report.metric("husimi_max", map.max_intensity());
    Ok(())
}

fn cmd_decode_test(loaded: &Loaded, flag: Option<&Path>, report: &mut Report) -> CliResult<()> {
    let m = &loaded.manifest;
    let field = read_field(&field_path(loaded, flag)?)?;
    let h = loaded.hamiltonian()?;
    let reg = m.register()?;
    let t_ref = m.phase_reference_time()?;
    report.grid_params(&h, &field);
    report.param("phase_reference_time", t_ref);
    let all: Vec<usize> = (0..reg.len()).collect();
    let table = decode_test(&field, &reg, &all, t_ref, &h).context(|| "decode test".into())?;
    write_json(&report.file("decode.json"), &decode_json(&table))?;
    report.metric("successes", table.iter().filter(|r| r.success).count());
    report.metric("bits", table.len());
    let per_bit: Map<String, Value> = table.iter().map(|r| (r.marked.to_string(), json!(r.success))).collect();
    report.metric("success", per_bit);
    Ok(())
}
