// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

use super::krotov::{self, IterationRecord, Member};
use super::penalty::{evaluate_cost, PenaltySchedule};
use crate::atomic::{HamiltonianData, StateLabel};
use crate::error::{Error, Result};
use crate::propagator::{PulseGrid, WavePacket};

pub const DEFAULT_MAX_ITERATIONS: usize = 200;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Drive `psi0` into the target orbital by time `T = guess.t_end()`.
#[derive(Debug, Clone)]
pub struct OctProblem<'a> {
    pub hamiltonian: &'a HamiltonianData,
    pub psi0: WavePacket,
    pub target: StateLabel,
    pub penalty: PenaltySchedule,
    pub guess: PulseGrid,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl<'a> OctProblem<'a> {
    pub fn new(
        hamiltonian: &'a HamiltonianData,
        psi0: WavePacket,
        target: StateLabel,
        guess: PulseGrid,
        penalty: PenaltySchedule,
    ) -> Result<Self> {
        let p = Self {
            hamiltonian,
            psi0,
            target,
            penalty,
            guess,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            tolerance: DEFAULT_TOLERANCE,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_iterations(mut self, max_iterations: usize, tolerance: f64) -> Self {
        self.max_iterations = max_iterations;
        self.tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.hamiltonian.require_index(self.target)?;
        if self.psi0.dim() != self.hamiltonian.dim() {
            return Err(Error::InvalidProblem(format!(
                "initial state has {} amplitudes, basis has {}",
                self.psi0.dim(),
                self.hamiltonian.dim()
            )));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidProblem("tolerance must be non-negative".into()));
        }
        self.penalty.check_grid(&self.guess)
    }
}

#[derive(Debug, Clone)]
pub struct OctResult {
    pub field: PulseGrid,
    pub guess: PulseGrid,
    pub guess_yield: f64,
    pub history: Vec<IterationRecord>,
    pub final_state: WavePacket,
    pub converged: bool,
    pub monotonicity_violation: Option<usize>,
}

impl OctResult {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    pub fn final_yield(&self) -> f64 {
        self.history.last().map_or(self.guess_yield, |r| r.yield_sum)
    }
}

/// `|⟨a_k|ψ(T)⟩|² − Y`.
pub fn evaluate_functional(psi_end: &WavePacket, field: &PulseGrid, penalty: &PenaltySchedule, target: usize) -> Result<f64> {
    if target >= psi_end.dim() {
        return Err(Error::InvalidProblem(format!("target index {target} outside the basis")));
    }
    Ok(psi_end.population(target) - evaluate_cost(field, penalty)?)
}

pub fn optimize(problem: &OctProblem) -> Result<OctResult> {
    problem.validate()?;
    let member = Member {
        psi0: problem.psi0.clone(),
        target: problem.hamiltonian.require_index(problem.target)?,
    };
    let run = krotov::run(
        problem.hamiltonian,
        &[member],
        &problem.guess,
        &problem.penalty,
        problem.max_iterations,
        problem.tolerance,
    )?;
    Ok(OctResult {
        field: run.field,
        guess: run.guess,
        guess_yield: run.guess_yields[0],
        history: run.history,
        final_state: run.final_states.into_iter().next().unwrap(),
        converged: run.converged,
        monotonicity_violation: run.monotonicity_violation,
    })
}
