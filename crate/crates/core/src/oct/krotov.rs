// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

//! Krotov iteration with immediate feedback, shared by the single-target and
//! ensemble optimizers.
//!
//! Each iteration:
//!
//! 1. sets every member's costate at T to `P_k ψ(T)` and propagates it
//!    backward under the current field `E^k`;
//! 2. sweeps forward from the initial states, and at every step `j` first
//!    corrects the field, `E^{k+1}_j = E^k_j + (1/ℓ_j) Σ_i Im⟨λ_i|z|ψ_i⟩`, then
//!    advances every member one split step under the corrected value.
//!
//! The dipole matrix element is evaluated where the step's dipole factor
//! acts, i.e. after the leading `exp(-i H₀ dt/2)`. With that choice the
//! first-order change of the target overlap is exactly `Σ_j 2 dt ΔE_j Im⟨λ|z|ψ⟩`,
//! so the update is a discrete ascent step and not just a continuum one.
//!
//! The monotone functional for an additive update is the target yield minus
//! the ℓ-weighted fluence of the *change* in the field, so that is what the
//! history reports as `functional` and `cost`; the fluence of the whole field
//! is reported separately.

use log::warn;
use nalgebra::DVector;
use num_complex::Complex64;

use super::penalty::{evaluate_cost, PenaltySchedule};
use crate::atomic::HamiltonianData;
use crate::error::{Error, Result};
use crate::propagator::{propagate_backward, Amplitudes, PulseGrid, SplitOperator, WavePacket, ZEigensystem};

/// Allowed decrease of the functional between iterations before it is flagged.
pub const MONOTONICITY_SLACK: f64 = 1e-9;
/// Amplitude of the smooth bump added to a guess field that gives exactly zero target overlap.
pub const STALL_BUMP: f64 = 1e-10;

/// One independent wave packet driven by the shared field.
#[derive(Debug, Clone)]
pub struct Member {
    pub psi0: WavePacket,
    /// Basis index of the target orbital.
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Σ yields − cost.
    pub functional: f64,
    pub yield_sum: f64,
    pub member_yields: Vec<f64>,
    /// ℓ-weighted fluence of this iteration's field change.
    pub cost: f64,
    /// ℓ-weighted fluence of the whole field.
    pub fluence: f64,
    /// Σ_i |⟨a_i|Δψ_i(T)⟩|², never negative.
    pub delta1: f64,
    /// Discrete costate-equation residual; zero up to rounding.
    pub delta3: f64,
}

impl IterationRecord {
    pub fn product_fidelity(&self) -> f64 {
        self.member_yields.iter().product()
    }
}

#[derive(Debug, Clone)]
pub struct KrotovRun {
    pub field: PulseGrid,
    /// Guess field actually used (differs from the input only after the stall guard).
    pub guess: PulseGrid,
    pub guess_yields: Vec<f64>,
    pub history: Vec<IterationRecord>,
    pub final_states: Vec<WavePacket>,
    pub converged: bool,
    /// First iteration whose functional fell by more than [`MONOTONICITY_SLACK`].
    pub monotonicity_violation: Option<usize>,
}

/// `λ(T) = ⟨a|ψ(T)⟩ |a⟩`, deliberately not normalized.
pub fn costate_terminal(psi_end: &WavePacket, target: usize) -> WavePacket {
    let mut a = DVector::zeros(psi_end.dim());
    a[target] = psi_end.amplitudes[target];
    WavePacket::new(a, psi_end.time)
}

/// Costate at every grid time, integrating `λ̇ = -i H^k λ` backward with the
/// exact inverses of the forward split steps.
pub fn backward_propagate(
    costate_end: &WavePacket,
    field: &PulseGrid,
    h: &HamiltonianData,
    zsys: &ZEigensystem,
) -> Vec<Amplitudes> {
    propagate_backward(costate_end, field, h, zsys)
}

/// `(1/ℓ) Σ_i Im⟨λ_i|z|ψ_i⟩` for member vectors already in the dipole eigenbasis.
pub(crate) fn summed_increment(zsys: &ZEigensystem, pairs: &[(&[Complex64], &[Complex64])], ell: f64) -> f64 {
    let sum: f64 = pairs.iter().map(|(lam, psi)| zsys.matrix_element(lam, psi).im).sum();
    sum / ell
}

fn forward_all(op: &mut SplitOperator, psi0: &Amplitudes, field: &PulseGrid) -> Vec<Amplitudes> {
    let mut v = psi0.clone();
    let mut out = Vec::with_capacity(field.len());
    out.push(v.clone());
    for j in 0..field.steps() {
        op.step(v.as_mut_slice(), field.samples[j], field.dt);
        out.push(v.clone());
    }
    out
}

/// Forward sweep with immediate feedback. Returns the new field and the
/// members' trajectories under it.
pub(crate) fn sweep(
    h: &HamiltonianData,
    zsys: &ZEigensystem,
    psi0: &[&Amplitudes],
    costates: &[Vec<Amplitudes>],
    old: &PulseGrid,
    penalty: &PenaltySchedule,
) -> (PulseGrid, Vec<Vec<Amplitudes>>) {
    let dim = h.dim();
    let steps = old.steps();
    let dt = old.dt;
    let mut ops: Vec<SplitOperator> = psi0.iter().map(|_| SplitOperator::new(h, zsys)).collect();
    let mut states: Vec<Amplitudes> = psi0.iter().map(|&p| p.clone()).collect();
    let mut trajs: Vec<Vec<Amplitudes>> = states
        .iter()
        .map(|s| {
            let mut t = Vec::with_capacity(steps + 1);
            t.push(s.clone());
            t
        })
        .collect();
    let zero = Complex64::new(0.0, 0.0);
    let mut lam_half = vec![zero; dim];
    let mut lam_eig: Vec<Vec<Complex64>> = psi0.iter().map(|_| vec![zero; dim]).collect();
    let mut psi_eig: Vec<Vec<Complex64>> = psi0.iter().map(|_| vec![zero; dim]).collect();
    let mut samples = old.samples.clone();

    for j in 0..steps {
        for i in 0..states.len() {
            let p = ops[i].begin_step(states[i].as_mut_slice(), dt);
            psi_eig[i].copy_from_slice(p);
            lam_half.copy_from_slice(costates[i][j].as_slice());
            ops[i].free(&mut lam_half, 0.5 * dt);
            zsys.to_eigenbasis(&lam_half, &mut lam_eig[i]);
        }
        let pairs: Vec<(&[Complex64], &[Complex64])> =
            lam_eig.iter().zip(&psi_eig).map(|(l, p)| (l.as_slice(), p.as_slice())).collect();
        samples[j] = old.samples[j] + summed_increment(zsys, &pairs, penalty.values[j]);
        for i in 0..states.len() {
            ops[i].finish_step(states[i].as_mut_slice(), samples[j], dt);
            trajs[i].push(states[i].clone());
        }
    }

    // The last sample drives no step; give it the same correction at t = T.
    for i in 0..states.len() {
        zsys.to_eigenbasis(costates[i][steps].as_slice(), &mut lam_eig[i]);
        zsys.to_eigenbasis(states[i].as_slice(), &mut psi_eig[i]);
    }
    let pairs: Vec<(&[Complex64], &[Complex64])> =
        lam_eig.iter().zip(&psi_eig).map(|(l, p)| (l.as_slice(), p.as_slice())).collect();
    samples[steps] = old.samples[steps] + summed_increment(zsys, &pairs, penalty.values[steps]);

    let field = PulseGrid { t0: old.t0, dt, samples };
    (field, trajs)
}

/// Single-member forward sweep: the new field and ψ^{k+1} at every grid time.
pub fn forward_update_sweep(
    psi0: &WavePacket,
    costates: &[Amplitudes],
    old: &PulseGrid,
    penalty: &PenaltySchedule,
    h: &HamiltonianData,
    zsys: &ZEigensystem,
) -> Result<(PulseGrid, Vec<WavePacket>)> {
    penalty.check_grid(old)?;
    if costates.len() != old.len() {
        return Err(Error::GridMismatch(format!(
            "costate trajectory has {} points, field has {}",
            costates.len(),
            old.len()
        )));
    }
    let costates = vec![costates.to_vec()];
    let (field, mut trajs) = sweep(h, zsys, &[&psi0.amplitudes], &costates, old, penalty);
    let states = trajs
        .pop()
        .unwrap()
        .into_iter()
        .enumerate()
        .map(|(j, a)| WavePacket::new(a, old.time(j)))
        .collect();
    Ok((field, states))
}

/// `2 Re Σ_j [⟨λ_{j+1}| U_j^k Δψ_j⟩ − ⟨λ_j|Δψ_j⟩]`: the discrete form of
/// `2 Re ∫ [⟨λ̇|Δψ⟩ − i⟨λ|H^k|Δψ⟩] dt`. It vanishes when the costate was
/// propagated with exact inverses of the forward steps.
fn discrete_delta3(
    op: &mut SplitOperator,
    old_traj: &[Amplitudes],
    new_traj: &[Amplitudes],
    costate: &[Amplitudes],
    old_field: &PulseGrid,
) -> f64 {
    let mut acc = 0.0;
    for j in 0..old_field.steps() {
        let diff = &new_traj[j] - &old_traj[j];
        let mut stepped = diff.clone();
        op.step(stepped.as_mut_slice(), old_field.samples[j], old_field.dt);
        acc += (costate[j + 1].dotc(&stepped) - costate[j].dotc(&diff)).re;
    }
    2.0 * acc
}

fn smooth_bump(grid: &PulseGrid) -> Vec<f64> {
    let span = grid.duration();
    grid.times()
        .into_iter()
        .map(|t| STALL_BUMP * (std::f64::consts::PI * (t - grid.t0) / span).sin().powi(2))
        .collect()
}

pub(crate) fn run(
    h: &HamiltonianData,
    members: &[Member],
    guess: &PulseGrid,
    penalty: &PenaltySchedule,
    max_iterations: usize,
    tolerance: f64,
) -> Result<KrotovRun> {
    if members.is_empty() {
        return Err(Error::InvalidProblem("no members to optimize".into()));
    }
    for m in members {
        if m.psi0.dim() != h.dim() || m.target >= h.dim() {
            return Err(Error::InvalidProblem("member state or target does not fit the basis".into()));
        }
    }
    penalty.check_grid(guess)?;
    let zsys = ZEigensystem::new(h)?;
    let mut op = SplitOperator::new(h, &zsys);
    let steps = guess.steps();

    let mut field = guess.clone();
    let mut trajs: Vec<Vec<Amplitudes>> =
        members.iter().map(|m| forward_all(&mut op, &m.psi0.amplitudes, &field)).collect();

    let stalled = members
        .iter()
        .zip(&trajs)
        .any(|(m, t)| t[steps][m.target] == Complex64::new(0.0, 0.0));
    if stalled {
        warn!("target overlap is exactly zero under the guess field; adding a {STALL_BUMP:e} a.u. bump");
        let bump = smooth_bump(&field);
        for (s, b) in field.samples.iter_mut().zip(bump) {
            *s += b;
        }
        trajs = members.iter().map(|m| forward_all(&mut op, &m.psi0.amplitudes, &field)).collect();
    }
    let guess_used = field.clone();

    let yields_of = |trajs: &[Vec<Amplitudes>]| -> Vec<f64> {
        members.iter().zip(trajs).map(|(m, t)| t[steps][m.target].norm_sqr()).collect()
    };
    let guess_yields = yields_of(&trajs);
    let mut previous = guess_yields.iter().sum::<f64>();

    let mut history = Vec::new();
    let mut converged = false;
    let mut violation = None;
    let psi0: Vec<&Amplitudes> = members.iter().map(|m| &m.psi0.amplitudes).collect();

    for iteration in 1..=max_iterations {
        let costates: Vec<Vec<Amplitudes>> = members
            .iter()
            .zip(&trajs)
            .map(|(m, t)| {
                let end = WavePacket::new(t[steps].clone(), field.t_end());
                backward_propagate(&costate_terminal(&end, m.target), &field, h, &zsys)
            })
            .collect();

        let (new_field, new_trajs) = sweep(h, &zsys, &psi0, &costates, &field, penalty);

        let mut delta3 = 0.0;
        let mut delta1 = 0.0;
        for (i, m) in members.iter().enumerate() {
            delta3 += discrete_delta3(&mut op, &trajs[i], &new_trajs[i], &costates[i], &field);
            delta1 += (new_trajs[i][steps][m.target] - trajs[i][steps][m.target]).norm_sqr();
        }

        let change = PulseGrid {
            t0: field.t0,
            dt: field.dt,
            samples: new_field.samples.iter().zip(&field.samples).map(|(a, b)| a - b).collect(),
        };
        let cost = evaluate_cost(&change, penalty)?;
        let fluence = evaluate_cost(&new_field, penalty)?;
        let member_yields = yields_of(&new_trajs);
        let yield_sum: f64 = member_yields.iter().sum();
        let functional = yield_sum - cost;

        if functional < previous - MONOTONICITY_SLACK && violation.is_none() {
            warn!("functional decreased at iteration {iteration}: {previous} -> {functional}");
            violation = Some(iteration);
        }
        history.push(IterationRecord {
            iteration,
            functional,
            yield_sum,
            member_yields,
            cost,
            fluence,
            delta1,
            delta3,
        });

        field = new_field;
        trajs = new_trajs;
        if (functional - previous).abs() < tolerance {
            converged = true;
            break;
        }
        previous = functional;
    }

    let final_states = trajs
        .into_iter()
        .map(|mut t| WavePacket::new(t.pop().unwrap(), field.t_end()))
        .collect();
    Ok(KrotovRun {
        field,
        guess: guess_used,
        guess_yields,
        history,
        final_states,
        converged,
        monotonicity_violation: violation,
    })
}
