// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

//! Optimal control of Rydberg wave-packet registers.
//!
//! All quantities are in atomic units unless a function name says otherwise.
//! The pieces, in the order a run uses them:
//!
//! * [`atomic`] builds the essential-state basis: quantum-defect energies and
//!   dipole matrix elements from Numerov radial functions.
//! * [`propagator`] advances wave packets with a symmetric split-operator step.
//! * [`register`] encodes the phase-marked register and reads it out.
//! * [`oct`] runs Krotov iterations for one target or an ensemble of targets.
//! * [`pulses`] makes guess pulses and analyzes fields.

// `!(x > 0.0)` is used deliberately so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atomic;
pub mod error;
pub mod oct;
pub mod propagator;
pub mod pulses;
pub mod register;
pub mod units;

pub use atomic::{BasisSpec, HamiltonianData, QuantumDefects, StateLabel};
pub use error::{Error, Result};
pub use oct::{EnsembleProblem, EnsembleResult, IterationRecord, OctProblem, OctResult, PenaltySchedule};
pub use propagator::{PulseGrid, WavePacket, ZEigensystem};
pub use pulses::{HusimiMap, SpectrumData};
pub use register::{Readout, RegisterSpec};
