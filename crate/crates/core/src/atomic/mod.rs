// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

//! Restricted-basis atomic structure for an alkali Rydberg electron.
//!
//! Energies follow the quantum-defect formula `E = -1 / (2 (n - δ_l)^2)`.
//! Radial wavefunctions come from a Numerov solver on a square-root mesh
//! in a Coulomb potential with a short-range core term whose strength is
//! tuned per state so that the eigenvalue lands on the defect energy with
//! the hydrogenic node count `n - l - 1`. Dipole matrix elements are taken
//! between these functions with the m = 0 angular factor.

mod grid;
mod hamiltonian;
mod io;
mod radial;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use grid::RadialGrid;
pub use hamiltonian::{
    angular_factor, build_hamiltonian, build_hamiltonian_with, dipole_matrix_element,
    HamiltonianData,
};
pub use io::{load_hamiltonian, read_hamiltonian, save_hamiltonian, write_hamiltonian};
pub use radial::{solve_radial, RadialSolution, CORE_RADIUS};

const L_LETTERS: &[u8] = b"spdfghiklmnoqrtuvwxyz";

/// An (n, l) orbital with m = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateLabel {
    pub n: u32,
    pub l: u32,
}

impl StateLabel {
    pub fn new(n: u32, l: u32) -> Result<Self> {
        if n == 0 || l >= n {
            return Err(Error::InvalidSpec(format!("invalid orbital n={n}, l={l}")));
        }
        Ok(Self { n, l })
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match L_LETTERS.get(self.l as usize) {
            Some(&c) => write!(f, "{}{}", self.n, c as char),
            None => write!(f, "{}l{}", self.n, self.l),
        }
    }
}

impl FromStr for StateLabel {
    type Err = Error;

    /// Accepts spectroscopic labels (`26p`, `31v`) or `26l25` for large l.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidSpec(format!("cannot parse state label '{s}'"));
        let digits = s.find(|c: char| !c.is_ascii_digit()).ok_or_else(bad)?;
        let n: u32 = s[..digits].parse().map_err(|_| bad())?;
        let rest = &s[digits..];
        let l = if rest.len() == 1 {
            L_LETTERS.iter().position(|&c| c == rest.as_bytes()[0]).ok_or_else(bad)? as u32
        } else if let Some(num) = rest.strip_prefix('l') {
            num.parse().map_err(|_| bad())?
        } else {
            return Err(bad());
        };
        StateLabel::new(n, l)
    }
}

/// Quantum defects δ_l keyed by l; absent entries are zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuantumDefects(BTreeMap<u32, f64>);

impl QuantumDefects {
    pub fn hydrogenic() -> Self {
        Self::default()
    }

    /// Cesium-like preset: δ_s = 4.05, δ_p = 3.59, δ_d = 2.47, δ_f = 0.033.
    pub fn cesium() -> Self {
        Self::from_pairs([(0, 4.05), (1, 3.59), (2, 2.47), (3, 0.033)])
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, f64)>) -> Self {
        Self(pairs.into_iter().collect())
    }

    pub fn get(&self, l: u32) -> f64 {
        self.0.get(&l).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.0.iter().map(|(&l, &d)| (l, d))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec {
    pub n_min: u32,
    pub n_max: u32,
    /// Exclusive upper bound on l.
    pub l_max: u32,
    pub quantum_defects: QuantumDefects,
}

impl BasisSpec {
    pub fn new(n_min: u32, n_max: u32, l_max: u32, quantum_defects: QuantumDefects) -> Result<Self> {
        let spec = Self { n_min, n_max, l_max, quantum_defects };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min < 1 || self.n_max < self.n_min {
            return Err(Error::InvalidSpec(format!(
                "need 1 <= n_min <= n_max, got n_min={}, n_max={}",
                self.n_min, self.n_max
            )));
        }
        if self.l_max < 1 {
            return Err(Error::InvalidSpec("l_max must be at least 1".into()));
        }
        for (l, d) in self.quantum_defects.iter() {
            if !d.is_finite() || d < 0.0 || d >= self.n_min as f64 {
                return Err(Error::InvalidSpec(format!(
                    "quantum defect for l={l} is {d}; need 0 <= δ < n_min = {}",
                    self.n_min
                )));
            }
        }
        Ok(())
    }

    /// Basis states ordered by (n, l).
    pub fn labels(&self) -> Vec<StateLabel> {
        (self.n_min..=self.n_max)
            .flat_map(|n| (0..n.min(self.l_max)).map(move |l| StateLabel { n, l }))
            .collect()
    }

    pub fn energy(&self, label: StateLabel) -> Result<f64> {
        quantum_defect_energy(label.n, label.l, &self.quantum_defects)
    }

    /// States on the edge of the truncated basis: n = n_min, n = n_max, l = l_max - 1.
    pub fn boundary_labels(&self) -> Vec<StateLabel> {
        self.labels()
            .into_iter()
            .filter(|s| s.n == self.n_min || s.n == self.n_max || s.l + 1 == self.l_max)
            .collect()
    }
}

/// Rydberg energy of (n, l) in Hartree.
pub fn quantum_defect_energy(n: u32, l: u32, defects: &QuantumDefects) -> Result<f64> {
    let n_eff = n as f64 - defects.get(l);
    if n_eff <= 0.0 {
        return Err(Error::InvalidSpec(format!(
            "n={n} does not exceed the l={l} quantum defect {}",
            defects.get(l)
        )));
    }
    Ok(-0.5 / (n_eff * n_eff))
}
