// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

//! One shared field for several independent register copies.

use std::collections::BTreeSet;

use num_complex::Complex64;

use super::krotov::{self, summed_increment, IterationRecord, Member};
use super::penalty::PenaltySchedule;
use super::single::{DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE};
use crate::atomic::{HamiltonianData, StateLabel};
use crate::error::{Error, Result};
use crate::propagator::{propagate, Amplitudes, PulseGrid, Record, SplitOperator, WavePacket, ZEigensystem};
use crate::register::{encode_with_reference, readout, Readout, RegisterSpec};

#[derive(Debug, Clone)]
pub struct EnsembleMember {
    pub psi0: WavePacket,
    pub target: StateLabel,
}

#[derive(Debug, Clone)]
pub struct EnsembleProblem<'a> {
    pub hamiltonian: &'a HamiltonianData,
    pub members: Vec<EnsembleMember>,
    pub penalty: PenaltySchedule,
    pub guess: PulseGrid,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Register the members were encoded from, used for the decode count.
    pub register: Option<RegisterSpec>,
    /// Register bits left out of the ensemble.
    pub excluded: Vec<StateLabel>,
}

impl<'a> EnsembleProblem<'a> {
    pub fn new(
        hamiltonian: &'a HamiltonianData,
        members: Vec<EnsembleMember>,
        guess: PulseGrid,
        penalty: PenaltySchedule,
    ) -> Result<Self> {
        let p = Self {
            hamiltonian,
            members,
            penalty,
            guess,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            tolerance: DEFAULT_TOLERANCE,
            register: None,
            excluded: Vec::new(),
        };
        p.validate()?;
        Ok(p)
    }

    /// One member per entry of `bits`, each the register with that bit flipped
    /// and targeting the flipped orbital.
    pub fn for_register(
        hamiltonian: &'a HamiltonianData,
        register: &RegisterSpec,
        bits: &[usize],
        phase_reference_time: f64,
        guess: PulseGrid,
        penalty: PenaltySchedule,
    ) -> Result<Self> {
        let mut members = Vec::with_capacity(bits.len());
        for &b in bits {
            let spec = register.with_marked(Some(b))?;
            members.push(EnsembleMember {
                psi0: encode_with_reference(&spec, hamiltonian, phase_reference_time)?,
                target: register.orbitals[b],
            });
        }
        let excluded = (0..register.len())
            .filter(|i| !bits.contains(i))
            .map(|i| register.orbitals[i])
            .collect();
        let mut p = Self::new(hamiltonian, members, guess, penalty)?;
        p.register = Some(register.with_marked(None)?);
        p.excluded = excluded;
        p.validate()?;
        Ok(p)
    }

    /// Bits `1..len-1` of the register: the outer two are left out.
    pub fn interior_bits(register: &RegisterSpec) -> Vec<usize> {
        (1..register.len().saturating_sub(1)).collect()
    }

    pub fn with_iterations(mut self, max_iterations: usize, tolerance: f64) -> Self {
        self.max_iterations = max_iterations;
        self.tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::InvalidProblem("ensemble has no members".into()));
        }
        let mut seen = BTreeSet::new();
        for m in &self.members {
            self.hamiltonian.require_index(m.target)?;
            if m.psi0.dim() != self.hamiltonian.dim() {
                return Err(Error::InvalidProblem(format!("member targeting {} has the wrong dimension", m.target)));
            }
            if !seen.insert(m.target) {
                return Err(Error::InvalidProblem(format!("target {} appears twice in the ensemble", m.target)));
            }
            if let Some(reg) = &self.register {
                if !reg.orbitals.contains(&m.target) {
                    return Err(Error::InvalidProblem(format!("target {} is not a register bit", m.target)));
                }
            }
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidProblem("tolerance must be non-negative".into()));
        }
        self.penalty.check_grid(&self.guess)
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub field: PulseGrid,
    pub guess: PulseGrid,
    pub guess_yields: Vec<f64>,
    pub history: Vec<IterationRecord>,
    pub final_states: Vec<WavePacket>,
    pub converged: bool,
    pub monotonicity_violation: Option<usize>,
    /// Readout of every member against the register, when one was given.
    pub readouts: Vec<Readout>,
    /// Members whose own bit strictly dominates their readout.
    pub decode_accuracy: usize,
}

impl EnsembleResult {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    pub fn final_yields(&self) -> &[f64] {
        self.history.last().map_or(&self.guess_yields, |r| &r.member_yields)
    }

    pub fn product_fidelity_history(&self) -> Vec<f64> {
        self.history.iter().map(IterationRecord::product_fidelity).collect()
    }
}

/// Shared field correction at one grid time from every member's costate and state.
///
/// The matrix elements are taken after a free half step of `dt / 2`, where the
/// split step applies its dipole factor; `dt = 0` gives the plain
/// `(1/ℓ) Σ_i Im⟨λ_i|z|ψ_i⟩`.
pub fn ensemble_update(
    costates: &[Amplitudes],
    states: &[Amplitudes],
    ell: f64,
    dt: f64,
    h: &HamiltonianData,
    zsys: &ZEigensystem,
) -> Result<f64> {
    if costates.is_empty() {
        return Err(Error::InvalidProblem("ensemble has no members".into()));
    }
    if costates.len() != states.len() {
        return Err(Error::InvalidProblem(format!(
            "{} costates for {} states",
            costates.len(),
            states.len()
        )));
    }
    if !(ell > 0.0) {
        return Err(Error::InvalidProblem(format!("penalty must be positive, got {ell}")));
    }
    let op = SplitOperator::new(h, zsys);
    let dim = h.dim();
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    let to_eig = |v: &Amplitudes, buf: &mut Vec<Complex64>| -> Result<Vec<Complex64>> {
        if v.len() != dim {
            return Err(Error::InvalidProblem("member vector has the wrong dimension".into()));
        }
        buf.copy_from_slice(v.as_slice());
        op.free(buf, 0.5 * dt);
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        zsys.to_eigenbasis(buf, &mut out);
        Ok(out)
    };
    let mut lam = Vec::with_capacity(costates.len());
    let mut psi = Vec::with_capacity(states.len());
    for (l, s) in costates.iter().zip(states) {
        lam.push(to_eig(l, &mut buf)?);
        psi.push(to_eig(s, &mut buf)?);
    }
    let pairs: Vec<(&[Complex64], &[Complex64])> = lam.iter().zip(&psi).map(|(l, p)| (l.as_slice(), p.as_slice())).collect();
    Ok(summed_increment(zsys, &pairs, ell))
}

pub fn optimize_ensemble(problem: &EnsembleProblem) -> Result<EnsembleResult> {
    problem.validate()?;
    let h = problem.hamiltonian;
    let members: Vec<Member> = problem
        .members
        .iter()
        .map(|m| Ok(Member { psi0: m.psi0.clone(), target: h.require_index(m.target)? }))
        .collect::<Result<_>>()?;
    let run = krotov::run(h, &members, &problem.guess, &problem.penalty, problem.max_iterations, problem.tolerance)?;

    let mut readouts = Vec::new();
    let mut decode_accuracy = 0;
    if let Some(reg) = &problem.register {
        for (m, psi) in problem.members.iter().zip(&run.final_states) {
            let r = readout(psi, reg, h)?;
            let bit = reg.orbitals.iter().position(|&o| o == m.target).unwrap();
            if r.decodes(bit) {
                decode_accuracy += 1;
            }
            readouts.push(r);
        }
    }
    Ok(EnsembleResult {
        field: run.field,
        guess: run.guess,
        guess_yields: run.guess_yields,
        history: run.history,
        final_states: run.final_states,
        converged: run.converged,
        monotonicity_violation: run.monotonicity_violation,
        readouts,
        decode_accuracy,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeRow {
    pub marked: StateLabel,
    pub readout: Readout,
    pub success: bool,
}

/// Propagate the register with each of `bits` flipped under `field` and read it out.
pub fn decode_test(
    field: &PulseGrid,
    register: &RegisterSpec,
    bits: &[usize],
    phase_reference_time: f64,
    h: &HamiltonianData,
) -> Result<Vec<DecodeRow>> {
    let zsys = ZEigensystem::new(h)?;
    bits.iter()
        .map(|&b| {
            let spec = register.with_marked(Some(b))?;
            let psi0 = encode_with_reference(&spec, h, phase_reference_time)?;
            let traj = propagate(&psi0, field, h, &zsys, Record::FinalOnly);
            let r = readout(&traj.final_state, &spec, h)?;
            Ok(DecodeRow { marked: register.orbitals[b], success: r.decodes(b), readout: r })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atomic::{build_hamiltonian_with, BasisSpec, QuantumDefects, RadialGrid};
    use crate::oct::krotov::backward_propagate;
    use crate::oct::single::{optimize, OctProblem};
    use crate::pulses::half_cycle_pulse;
    use std::sync::OnceLock;

    fn h() -> &'static HamiltonianData {
        static H: OnceLock<HamiltonianData> = OnceLock::new();
        H.get_or_init(|| {
            let spec = BasisSpec::new(10, 14, 4, QuantumDefects::cesium()).unwrap();
            build_hamiltonian_with(&spec, &RadialGrid::for_n_max(14, 6000).unwrap()).unwrap()
        })
    }

    fn register() -> RegisterSpec {
        RegisterSpec::series(10, 14, 1, None).unwrap()
    }

    fn guess() -> PulseGrid {
        let grid = PulseGrid::covering(4.0e4, 100.0).unwrap();
        half_cycle_pulse(4e-6, 5.0e3, 2.5e3, &grid).unwrap()
    }

    fn problem(bits: &[usize], iterations: usize) -> EnsembleProblem<'static> {
        let g = guess();
        let penalty = PenaltySchedule::new(1e7, 1000.0, 0.05, &g).unwrap();
        EnsembleProblem::for_register(h(), &register(), bits, 0.0, g, penalty)
            .unwrap()
            .with_iterations(iterations, 0.0)
    }

    fn member_pair(bit: usize, field: &PulseGrid) -> (Vec<Amplitudes>, Vec<Amplitudes>) {
        let zsys = ZEigensystem::new(h()).unwrap();
        let spec = register().with_marked(Some(bit)).unwrap();
        let psi0 = encode_with_reference(&spec, h(), 0.0).unwrap();
        let traj = propagate(&psi0, field, h(), &zsys, Record::EveryStep);
        let target = h().require_index(spec.orbitals[bit]).unwrap();
        let lam = backward_propagate(&krotov::costate_terminal(&traj.final_state, target), field, h(), &zsys);
        (lam, traj.states.into_iter().map(|s| s.amplitudes).collect())
    }

    #[test]
    fn empty_ensemble_is_rejected() {
        let zsys = ZEigensystem::new(h()).unwrap();
        assert!(ensemble_update(&[], &[], 1.0, 1.0, h(), &zsys).is_err());
        let g = guess();
        let penalty = PenaltySchedule::with_defaults(&g).unwrap();
        assert!(EnsembleProblem::new(h(), vec![], g, penalty).is_err());
    }

    #[test]
    fn duplicate_targets_are_rejected() {
        let g = guess();
        let penalty = PenaltySchedule::with_defaults(&g).unwrap();
        assert!(EnsembleProblem::for_register(h(), &register(), &[1, 1], 0.0, g, penalty).is_err());
    }

    #[test]
    fn opposite_members_cancel() {
        let zsys = ZEigensystem::new(h()).unwrap();
        let (lam, psi) = member_pair(2, &guess());
        let j = 30;
        let single = ensemble_update(&[lam[j].clone()], &[psi[j].clone()], 1e7, 100.0, h(), &zsys).unwrap();
        assert!(single.abs() > 0.0);
        let both = ensemble_update(&[lam[j].clone(), -&lam[j]], &[psi[j].clone(), psi[j].clone()], 1e7, 100.0, h(), &zsys)
            .unwrap();
        assert_eq!(both, 0.0);
    }

    #[test]
    fn four_members_sum_their_increments() {
        let zsys = ZEigensystem::new(h()).unwrap();
        let g = guess();
        let pairs: Vec<_> = (0..4).map(|b| member_pair(b, &g)).collect();
        for j in [0, 17, 200, g.steps()] {
            let lam: Vec<_> = pairs.iter().map(|(l, _)| l[j].clone()).collect();
            let psi: Vec<_> = pairs.iter().map(|(_, p)| p[j].clone()).collect();
            let joint = ensemble_update(&lam, &psi, 1e7, 100.0, h(), &zsys).unwrap();
            let separate: f64 = pairs
                .iter()
                .map(|(l, p)| ensemble_update(&[l[j].clone()], &[p[j].clone()], 1e7, 100.0, h(), &zsys).unwrap())
                .sum();
            assert!((joint - separate).abs() <= 1e-12 * separate.abs().max(1e-300), "{joint} vs {separate}");
        }
    }

    #[test]
    fn single_member_matches_single_target_run_bitwise() {
        let p = problem(&[2], 8);
        let ens = optimize_ensemble(&p).unwrap();
        let spec = register().with_marked(Some(2)).unwrap();
        let single = OctProblem::new(
            h(),
            encode_with_reference(&spec, h(), 0.0).unwrap(),
            spec.orbitals[2],
            p.guess.clone(),
            p.penalty.clone(),
        )
        .unwrap()
        .with_iterations(8, 0.0);
        let one = optimize(&single).unwrap();
        assert_eq!(ens.field.samples, one.field.samples);
        assert_eq!(ens.history, one.history);
        assert_eq!(ens.final_states[0].amplitudes, one.final_state.amplitudes);
    }

    #[test]
    fn identical_members_act_like_a_scaled_penalty() {
        let g = guess();
        let penalty = PenaltySchedule::new(1e7, 1000.0, 0.05, &g).unwrap();
        let spec = register().with_marked(Some(1)).unwrap();
        let member = Member {
            psi0: encode_with_reference(&spec, h(), 0.0).unwrap(),
            target: h().require_index(spec.orbitals[1]).unwrap(),
        };
        let pair = krotov::run(h(), &[member.clone(), member.clone()], &g, &penalty, 5, 0.0).unwrap();
        let mut half = penalty.clone();
        half.values.iter_mut().for_each(|v| *v /= 2.0);
        let one = krotov::run(h(), &[member], &g, &half, 5, 0.0).unwrap();
        let peak = one.field.peak();
        for (a, b) in pair.field.samples.iter().zip(&one.field.samples) {
            assert!((a - b).abs() <= 1e-12 * peak);
        }
    }

    #[test]
    fn zero_iterations_report_the_guess() {
        let r = optimize_ensemble(&problem(&[1, 2, 3], 0)).unwrap();
        assert!(r.history.is_empty());
        assert_eq!(r.field.samples, guess().samples);
        assert_eq!(r.final_yields().len(), 3);
        assert!(r.final_yields().iter().all(|y| (0.0..=1.0).contains(y)));
        assert!(r.decode_accuracy <= 3);
    }

    #[test]
    fn summed_objective_is_monotone_with_shared_cost() {
        let r = optimize_ensemble(&problem(&[1, 2, 3], 12)).unwrap();
        let mut previous: f64 = r.guess_yields.iter().sum();
        for rec in &r.history {
            assert!(rec.functional >= previous - 1e-9);
            assert!((rec.functional - (rec.yield_sum - rec.cost)).abs() < 1e-15);
            assert!(rec.delta3.abs() <= 1e-10);
            previous = rec.functional;
        }
        assert!(r.history.last().unwrap().yield_sum > r.guess_yields.iter().sum::<f64>());
        assert_eq!(r.product_fidelity_history().len(), 12);
    }

    #[test]
    fn members_replay_alone_under_the_final_field() {
        let p = problem(&[1, 3], 6);
        let r = optimize_ensemble(&p).unwrap();
        let zsys = ZEigensystem::new(h()).unwrap();
        for (m, end) in p.members.iter().zip(&r.final_states) {
            let replay = propagate(&m.psi0, &r.field, h(), &zsys, Record::FinalOnly).final_state;
            assert!((&replay.amplitudes - &end.amplitudes).camax() < 1e-10);
        }
    }

    #[test]
    fn zero_field_decodes_nothing() {
        let field = PulseGrid::zeros(0.0, 100.0, 100).unwrap();
        let rows = decode_test(&field, &register(), &[0, 1, 2, 3, 4], 0.0, h()).unwrap();
        assert_eq!(rows.len(), 5);
        for row in rows {
            assert!(!row.success);
            assert!(row.readout.populations.iter().all(|p| (p - 0.2).abs() < 1e-12));
        }
    }

    #[test]
    fn interior_bits_drop_the_outer_pair() {
        assert_eq!(EnsembleProblem::interior_bits(&register()), vec![1, 2, 3]);
        let p = problem(&[1, 2, 3], 0);
        assert_eq!(p.excluded, vec![register().orbitals[0], register().orbitals[4]]);
    }
}
