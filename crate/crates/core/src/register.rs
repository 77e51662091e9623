// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

//! Phase-coded wave-packet data register.
//!
//! N orbitals share equal amplitude `1/√N`; the marked bit carries the
//! opposite sign.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::atomic::{HamiltonianData, StateLabel};
use crate::error::{Error, Result};
use crate::propagator::WavePacket;

/// Population gap below which two register populations count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterSpec {
    pub orbitals: Vec<StateLabel>,
    pub marked: Option<usize>,
}

impl RegisterSpec {
    pub fn new(orbitals: Vec<StateLabel>, marked: Option<usize>) -> Result<Self> {
        if orbitals.is_empty() {
            return Err(Error::InvalidRegister("register has no orbitals".into()));
        }
        for (i, a) in orbitals.iter().enumerate() {
            if orbitals[..i].contains(a) {
                return Err(Error::InvalidRegister(format!("orbital {a} listed twice")));
            }
        }
        if let Some(m) = marked {
            if m >= orbitals.len() {
                return Err(Error::InvalidRegister(format!(
                    "marked index {m} out of range for {} orbitals",
                    orbitals.len()
                )));
            }
        }
        Ok(Self { orbitals, marked })
    }

    /// `n_lo l .. n_hi l`, e.g. 24p..29p.
    pub fn series(n_lo: u32, n_hi: u32, l: u32, marked: Option<StateLabel>) -> Result<Self> {
        let orbitals = (n_lo..=n_hi).map(|n| StateLabel::new(n, l)).collect::<Result<Vec<_>>>()?;
        let marked = match marked {
            Some(m) => Some(
                orbitals
                    .iter()
                    .position(|&o| o == m)
                    .ok_or_else(|| Error::InvalidRegister(format!("marked bit {m} not in register")))?,
            ),
            None => None,
        };
        Self::new(orbitals, marked)
    }

    pub fn len(&self) -> usize {
        self.orbitals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbitals.is_empty()
    }

    pub fn with_marked(&self, marked: Option<usize>) -> Result<Self> {
        Self::new(self.orbitals.clone(), marked)
    }

    pub fn marked_label(&self) -> Option<StateLabel> {
        self.marked.map(|m| self.orbitals[m])
    }

    pub fn indices(&self, h: &HamiltonianData) -> Result<Vec<usize>> {
        self.orbitals.iter().map(|&o| h.require_index(o)).collect()
    }
}

/// Register state at t = 0.
pub fn encode(spec: &RegisterSpec, h: &HamiltonianData) -> Result<WavePacket> {
    let indices = spec.indices(h)?;
    let amp = 1.0 / (spec.len() as f64).sqrt();
    let mut a = DVector::from_element(h.dim(), Complex64::new(0.0, 0.0));
    for (k, &i) in indices.iter().enumerate() {
        let sign = if spec.marked == Some(k) { -1.0 } else { 1.0 };
        a[i] = Complex64::new(sign * amp, 0.0);
    }
    Ok(WavePacket::new(a, 0.0))
}

/// State at t = 0 that evolves field-free into the register pattern at `reference_time`.
pub fn encode_with_reference(
    spec: &RegisterSpec,
    h: &HamiltonianData,
    reference_time: f64,
) -> Result<WavePacket> {
    let mut psi = encode(spec, h)?;
    if reference_time != 0.0 {
        for (c, &e) in psi.amplitudes.iter_mut().zip(h.energies.iter()) {
            *c *= Complex64::from_polar(1.0, e * reference_time);
        }
    }
    Ok(psi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Readout {
    pub labels: Vec<StateLabel>,
    pub populations: Vec<f64>,
    /// Argmax of `populations`, lowest index on ties.
    pub decoded: usize,
    /// `1 - Σ populations`, clamped to [0, 1].
    pub leaked: f64,
}

impl Readout {
    pub fn decoded_label(&self) -> StateLabel {
        self.labels[self.decoded]
    }

    /// True when bit `marked` strictly dominates every other register population.
    pub fn decodes(&self, marked: usize) -> bool {
        let p = self.populations[marked];
        self.populations
            .iter()
            .enumerate()
            .all(|(i, &q)| i == marked || p > q + TIE_TOLERANCE)
    }
}

pub fn readout(psi: &WavePacket, spec: &RegisterSpec, h: &HamiltonianData) -> Result<Readout> {
    let indices = spec.indices(h)?;
    let populations: Vec<f64> = indices.iter().map(|&i| psi.population(i)).collect();
    let mut decoded = 0;
    for (i, &p) in populations.iter().enumerate() {
        if p > populations[decoded] {
            decoded = i;
        }
    }
    let total: f64 = populations.iter().sum();
    Ok(Readout {
        labels: spec.orbitals.clone(),
        populations,
        decoded,
        leaked: (1.0 - total).clamp(0.0, 1.0),
    })
}
