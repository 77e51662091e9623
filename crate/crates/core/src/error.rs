// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::atomic::StateLabel;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid basis: {0}")]
    InvalidSpec(String),

    #[error("radial grid too small for {label}: tail decay exponent {decay:.2} at r_max = {r_max:.1}")]
    GridExtent { label: StateLabel, r_max: f64, decay: f64 },

    #[error("radial solver did not converge for {label}: {reason}")]
    Convergence { label: StateLabel, reason: String },

    #[error("state {0} is not in the basis")]
    UnknownLabel(StateLabel),

    #[error("malformed hamiltonian file, line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("hamiltonian validation failed: {0}")]
    Validation(String),

    #[error("eigensolver failure: {0}")]
    Numeric(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid register: {0}")]
    InvalidRegister(String),

    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    #[error("invalid optimization problem: {0}")]
    InvalidProblem(String),

    #[error("unknown unit '{0}'")]
    UnknownUnit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
