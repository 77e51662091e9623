// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

//! Krotov optimal control of the register field.

pub mod ensemble;
pub mod krotov;
pub mod penalty;
pub mod single;

pub use ensemble::{decode_test, ensemble_update, optimize_ensemble, DecodeRow, EnsembleMember, EnsembleProblem, EnsembleResult};
pub use krotov::{backward_propagate, costate_terminal, forward_update_sweep, IterationRecord, MONOTONICITY_SLACK, STALL_BUMP};
pub use penalty::{evaluate_cost, PenaltySchedule};
pub use single::{evaluate_functional, optimize, OctProblem, OctResult};
