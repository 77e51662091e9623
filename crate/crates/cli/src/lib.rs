// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

//! Manifest-driven runs of the `rydberg-oct-core` workflows.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;

pub use commands::{run, Command, Invocation};
pub use error::{CliError, CliResult};
pub use manifest::{Loaded, RunManifest};
