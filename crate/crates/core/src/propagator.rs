// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

//! Second-order split-operator propagation in the energy eigenbasis.
//!
//! One step of length `dt` under a field held at `E` is
//!
//! ```text
//! exp(-i H₀ dt/2) · exp(-i E z dt) · exp(-i H₀ dt/2)
//! ```
//!
//! H₀ is diagonal, and the dipole factor is applied exactly through the
//! cached eigendecomposition `z = U diag(w) Uᵀ`. Every factor is unitary, so
//! a step with `-dt` is the exact inverse of a step with `dt`.
//!
//! The field is piecewise constant: step `j` covers `[t_j, t_j + dt)` and uses
//! the sample `E(t_j)`. A pulse of `len` samples therefore drives `len - 1`
//! steps and its last sample only marks the end time.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::atomic::{HamiltonianData, StateLabel};
use crate::error::{Error, Result};

pub type Amplitudes = DVector<Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    pub amplitudes: Amplitudes,
    pub time: f64,
}

impl WavePacket {
    pub fn new(amplitudes: Amplitudes, time: f64) -> Self {
        Self { amplitudes, time }
    }

    /// All population in basis state `index`.
    pub fn basis_state(dim: usize, index: usize, time: f64) -> Self {
        let mut a = DVector::zeros(dim);
        a[index] = Complex64::new(1.0, 0.0);
        Self::new(a, time)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn population(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// ⟨self|other⟩
    pub fn overlap(&self, other: &WavePacket) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// Uniformly sampled real control field on `[t0, t0 + (len - 1) dt]`, atomic units.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseGrid {
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl PulseGrid {
    pub fn new(t0: f64, dt: f64, samples: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite() && t0.is_finite()) {
            return Err(Error::InvalidPulse(format!("time step must be positive, got {dt}")));
        }
        if samples.len() < 2 {
            return Err(Error::InvalidPulse(format!("need at least 2 samples, got {}", samples.len())));
        }
        if let Some(j) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidPulse(format!("sample {j} is not finite")));
        }
        Ok(Self { t0, dt, samples })
    }

    /// Zero field with `steps` propagation steps spanning `[t0, t0 + steps dt]`.
    pub fn zeros(t0: f64, dt: f64, steps: usize) -> Result<Self> {
        Self::new(t0, dt, vec![0.0; steps + 1])
    }

    /// Grid covering `[0, duration]` with step close to `dt` (adjusted to divide evenly).
    pub fn covering(duration: f64, dt: f64) -> Result<Self> {
        if !(duration > 0.0 && dt > 0.0) {
            return Err(Error::InvalidPulse(format!("bad duration {duration} or step {dt}")));
        }
        let steps = (duration / dt).round().max(1.0) as usize;
        Self::zeros(0.0, duration / steps as f64, steps)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0 + self.dt * j as f64
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.len() - 1)
    }

    pub fn duration(&self) -> f64 {
        self.t_end() - self.t0
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.time(j)).collect()
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn same_grid(&self, other: &PulseGrid) -> bool {
        self.len() == other.len() && self.t0 == other.t0 && self.dt == other.dt
    }
}

/// Eigendecomposition `z = U diag(w) Uᵀ`, computed once per Hamiltonian.
#[derive(Debug, Clone)]
pub struct ZEigensystem {
    pub eigenvalues: DVector<f64>,
    /// Columns are eigenvectors.
    pub eigenvectors: DMatrix<f64>,
}

impl ZEigensystem {
    pub fn new(h: &HamiltonianData) -> Result<Self> {
        let eig = SymmetricEigen::try_new(h.z.clone(), f64::EPSILON, 0)
            .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?;
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite dipole eigenvalue".into()));
        }
        Ok(Self { eigenvalues: eig.eigenvalues, eigenvectors: eig.eigenvectors })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// max |U diag(w) Uᵀ - z|
    pub fn reconstruction_error(&self, z: &DMatrix<f64>) -> f64 {
        let u = &self.eigenvectors;
        let rebuilt = u * DMatrix::from_diagonal(&self.eigenvalues) * u.transpose();
        (rebuilt - z).amax()
    }

    /// max |UᵀU - I|
    pub fn orthogonality_error(&self) -> f64 {
        let u = &self.eigenvectors;
        (u.transpose() * u - DMatrix::identity(self.dim(), self.dim())).amax()
    }

    /// `out = Uᵀ v`
    pub fn to_eigenbasis(&self, v: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim();
        let u = self.eigenvectors.as_slice();
        for (k, o) in out.iter_mut().enumerate() {
            let col = &u[k * n..(k + 1) * n];
            let (mut re, mut im) = (0.0, 0.0);
            for (&uik, c) in col.iter().zip(v) {
                re += uik * c.re;
                im += uik * c.im;
            }
            *o = Complex64::new(re, im);
        }
    }

    /// `out = U c`
    pub fn from_eigenbasis(&self, c: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim();
        let u = self.eigenvectors.as_slice();
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        for (k, ck) in c.iter().enumerate() {
            let col = &u[k * n..(k + 1) * n];
            for (o, &uik) in out.iter_mut().zip(col) {
                o.re += uik * ck.re;
                o.im += uik * ck.im;
            }
        }
    }

    /// `⟨a| z |b⟩` for vectors already in the dipole eigenbasis.
    pub fn matrix_element(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter()
            .zip(b)
            .zip(self.eigenvalues.iter())
            .map(|((x, y), &w)| x.conj() * y * w)
            .sum()
    }
}

/// Split-operator stepper bound to one Hamiltonian and its dipole eigensystem.
#[derive(Debug, Clone)]
pub struct SplitOperator<'a> {
    energies: &'a DVector<f64>,
    zsys: &'a ZEigensystem,
    scratch: Vec<Complex64>,
}

impl<'a> SplitOperator<'a> {
    pub fn new(h: &'a HamiltonianData, zsys: &'a ZEigensystem) -> Self {
        assert_eq!(h.dim(), zsys.dim(), "dipole eigensystem does not belong to this Hamiltonian");
        Self { energies: &h.energies, zsys, scratch: vec![Complex64::new(0.0, 0.0); h.dim()] }
    }

    pub fn zsys(&self) -> &ZEigensystem {
        self.zsys
    }

    /// Multiply by `exp(-i H₀ tau)`.
    pub fn free(&self, v: &mut [Complex64], tau: f64) {
        for (c, &e) in v.iter_mut().zip(self.energies.iter()) {
            *c *= Complex64::from_polar(1.0, -e * tau);
        }
    }

    /// Apply `exp(-i field z tau)` to `v`, which is left in the energy basis.
    pub fn kick(&mut self, v: &mut [Complex64], field: f64, tau: f64) {
        self.zsys.to_eigenbasis(v, &mut self.scratch);
        self.kick_eigenbasis(field, tau);
        self.zsys.from_eigenbasis(&self.scratch, v);
    }

    fn kick_eigenbasis(&mut self, field: f64, tau: f64) {
        for (c, &w) in self.scratch.iter_mut().zip(self.zsys.eigenvalues.iter()) {
            *c *= Complex64::from_polar(1.0, -field * w * tau);
        }
    }

    /// One symmetric split step in place; `dt < 0` inverts a `|dt|` step.
    pub fn step(&mut self, v: &mut [Complex64], field: f64, dt: f64) {
        self.free(v, 0.5 * dt);
        self.kick(v, field, dt);
        self.free(v, 0.5 * dt);
    }

    /// Half-free-evolve, then return `Uᵀ v` so a caller can inspect the state
    /// where the dipole factor acts before finishing the step with
    /// [`finish_step`](Self::finish_step).
    pub fn begin_step(&mut self, v: &mut [Complex64], dt: f64) -> &mut [Complex64] {
        self.free(v, 0.5 * dt);
        self.zsys.to_eigenbasis(v, &mut self.scratch);
        &mut self.scratch
    }

    pub fn finish_step(&mut self, v: &mut [Complex64], field: f64, dt: f64) {
        self.kick_eigenbasis(field, dt);
        self.zsys.from_eigenbasis(&self.scratch, v);
        self.free(v, 0.5 * dt);
    }
}

/// `exp(-i H₀ dt/2) exp(-i E z dt) exp(-i H₀ dt/2) ψ`.
pub fn split_step(
    psi: &WavePacket,
    e_field: f64,
    dt: f64,
    h: &HamiltonianData,
    zsys: &ZEigensystem,
) -> WavePacket {
    let mut out = psi.clone();
    SplitOperator::new(h, zsys).step(out.amplitudes.as_mut_slice(), e_field, dt);
    out.time += dt;
    out
}

/// Which states a propagation keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Record {
    EveryStep,
    /// Initial state and every k-th step (plus the final state).
    Every(usize),
    FinalOnly,
}

impl Record {
    fn keeps(self, step: usize, last: usize) -> bool {
        match self {
            Record::EveryStep => true,
            Record::Every(k) => step.is_multiple_of(k.max(1)) || step == last,
            Record::FinalOnly => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<WavePacket>,
    pub final_state: WavePacket,
}

/// Population removal on boundary states applied after each step.
#[derive(Debug, Clone)]
pub struct Absorber {
    pub indices: Vec<usize>,
    pub strength: f64,
}

impl Absorber {
    pub fn new(h: &HamiltonianData, labels: &[StateLabel], strength: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&strength) {
            return Err(Error::InvalidPulse(format!("absorber strength {strength} outside [0, 1]")));
        }
        let indices = labels.iter().map(|&l| h.require_index(l)).collect::<Result<_>>()?;
        Ok(Self { indices, strength })
    }

    fn apply(&self, v: &mut [Complex64]) {
        let keep = 1.0 - self.strength;
        for &i in &self.indices {
            v[i] *= keep;
        }
    }
}

/// Scale amplitudes on `boundary` states by `1 - strength`.
pub fn apply_absorber_mask(
    psi: &WavePacket,
    h: &HamiltonianData,
    boundary: &[StateLabel],
    strength: f64,
) -> Result<WavePacket> {
    let absorber = Absorber::new(h, boundary, strength)?;
    let mut out = psi.clone();
    absorber.apply(out.amplitudes.as_mut_slice());
    Ok(out)
}

/// Propagate `psi0` through every step of `pulse`.
pub fn propagate(
    psi0: &WavePacket,
    pulse: &PulseGrid,
    h: &HamiltonianData,
    zsys: &ZEigensystem,
    record: Record,
) -> Trajectory {
    propagate_with_absorber(psi0, pulse, h, zsys, record, None)
}

pub fn propagate_with_absorber(
    psi0: &WavePacket,
    pulse: &PulseGrid,
    h: &HamiltonianData,
    zsys: &ZEigensystem,
    record: Record,
    absorber: Option<&Absorber>,
) -> Trajectory {
    let mut op = SplitOperator::new(h, zsys);
    let mut v = psi0.amplitudes.clone();
    let steps = pulse.steps();
    let mut states = Vec::new();
    if record != Record::FinalOnly {
        states.push(WavePacket::new(v.clone(), pulse.t0));
    }
    for j in 0..steps {
        op.step(v.as_mut_slice(), pulse.samples[j], pulse.dt);
        if let Some(a) = absorber {
            a.apply(v.as_mut_slice());
        }
        if record.keeps(j + 1, steps) {
            states.push(WavePacket::new(v.clone(), pulse.time(j + 1)));
        }
    }
    Trajectory { states, final_state: WavePacket::new(v, pulse.t_end()) }
}

/// Undo [`propagate`]: apply the inverse steps from `t_end` back to `t0`.
///
/// Returns the state at every grid time, index `j` holding time `t_j`.
pub fn propagate_backward(
    psi_end: &WavePacket,
    pulse: &PulseGrid,
    h: &HamiltonianData,
    zsys: &ZEigensystem,
) -> Vec<Amplitudes> {
    let mut op = SplitOperator::new(h, zsys);
    let steps = pulse.steps();
    let mut out = vec![psi_end.amplitudes.clone(); steps + 1];
    let mut v = psi_end.amplitudes.clone();
    for j in (0..steps).rev() {
        op.step(v.as_mut_slice(), pulse.samples[j], -pulse.dt);
        out[j].copy_from(&v);
    }
    out
}
