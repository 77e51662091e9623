// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures for the benchmarks.

use rydberg_oct_core::atomic::{build_hamiltonian, StateLabel};
use rydberg_oct_core::propagator::PulseGrid;
use rydberg_oct_core::pulses::half_cycle_pulse;
use rydberg_oct_core::units::{fs_to_au, kv_per_cm_to_au, ps_to_au};
use rydberg_oct_core::{BasisSpec, HamiltonianData, QuantumDefects, RegisterSpec};

/// Cesium-like basis with n in [21, 31] and l below `l_max`.
pub fn register_basis(l_max: u32) -> HamiltonianData {
    build_hamiltonian(&BasisSpec::new(21, 31, l_max, QuantumDefects::cesium()).unwrap()).unwrap()
}

pub fn register() -> RegisterSpec {
    RegisterSpec::series(24, 29, 1, Some(StateLabel::new(26, 1).unwrap())).unwrap()
}

/// 1 kV/cm half-cycle pulse peaking at 0.5 ps in a window of `ps` picoseconds.
pub fn guess(ps: f64) -> PulseGrid {
    let grid = PulseGrid::covering(ps_to_au(ps), fs_to_au(10.0)).unwrap();
    half_cycle_pulse(kv_per_cm_to_au(1.0), ps_to_au(1.0), ps_to_au(0.5), &grid).unwrap()
}
