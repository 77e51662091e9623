// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::radial::{solve_radial, RadialSolution};
use super::{BasisSpec, QuantumDefects, RadialGrid, StateLabel};
use crate::error::{Error, Result};

/// Field-free energies and the z dipole matrix in the energy eigenbasis.
///
/// `H(t) = diag(energies) + E(t) z`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianData {
    pub spec: Option<BasisSpec>,
    pub labels: Vec<StateLabel>,
    pub energies: DVector<f64>,
    pub z: DMatrix<f64>,
    pub provenance: String,
}

const SYMMETRY_TOL: f64 = 1e-12;
/// Largest allowed gap between a solver eigenvalue and the defect energy.
const ENERGY_TOL: f64 = 1e-8;

impl HamiltonianData {
    /// Assemble from parts. Checks shapes, finiteness, bound energies and
    /// symmetry of z but not the dipole selection rule (see [`validate`](Self::validate)).
    pub fn new(
        labels: Vec<StateLabel>,
        energies: DVector<f64>,
        z: DMatrix<f64>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 || energies.len() != n || z.nrows() != n || z.ncols() != n {
            return Err(Error::Validation(format!(
                "{} labels, {} energies, {}x{} dipole matrix",
                n,
                energies.len(),
                z.nrows(),
                z.ncols()
            )));
        }
        for (label, &e) in labels.iter().zip(energies.iter()) {
            if !(e.is_finite() && e < 0.0) {
                return Err(Error::Validation(format!("energy of {label} is {e}, must be negative")));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (z[(i, j)], z[(j, i)]);
                if !a.is_finite() {
                    return Err(Error::Validation(format!(
                        "<{}|z|{}> is not finite",
                        labels[i], labels[j]
                    )));
                }
                if (a - b).abs() > SYMMETRY_TOL * a.abs().max(b.abs()) {
                    return Err(Error::Validation(format!(
                        "<{}|z|{}> = {a} but <{}|z|{}> = {b}",
                        labels[i], labels[j], labels[j], labels[i]
                    )));
                }
            }
        }
        Ok(Self { spec: None, labels, energies, z, provenance: provenance.into() })
    }

    /// Full check: everything in [`new`](Self::new) plus the Δl = ±1 rule and
    /// label/energy consistency with the basis spec when one is attached.
    pub fn validate(&self) -> Result<()> {
        let checked = Self::new(self.labels.clone(), self.energies.clone(), self.z.clone(), "")?;
        drop(checked);
        if let Some(spec) = &self.spec {
            if spec.labels() != self.labels {
                return Err(Error::Validation("labels do not match the basis spec".into()));
            }
        }
        for (i, a) in self.labels.iter().enumerate() {
            for (j, b) in self.labels.iter().enumerate() {
                if a.l.abs_diff(b.l) != 1 && self.z[(i, j)] != 0.0 {
                    return Err(Error::Validation(format!(
                        "<{a}|z|{b}> = {} violates the dipole selection rule",
                        self.z[(i, j)]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, label: StateLabel) -> Option<usize> {
        self.labels.iter().position(|&s| s == label)
    }

    pub fn require_index(&self, label: StateLabel) -> Result<usize> {
        self.index_of(label).ok_or(Error::UnknownLabel(label))
    }

    /// Boundary shells of the attached basis spec (empty without a spec).
    pub fn boundary_indices(&self) -> Vec<usize> {
        match &self.spec {
            Some(spec) => spec
                .boundary_labels()
                .into_iter()
                .filter_map(|s| self.index_of(s))
                .collect(),
            None => Vec::new(),
        }
    }
}

/// `<l+1, 0| cos θ |l, 0>` for the lower of the two l values; zero unless |Δl| = 1.
pub fn angular_factor(la: u32, lb: u32) -> f64 {
    if la.abs_diff(lb) != 1 {
        return 0.0;
    }
    let l = la.min(lb) as f64;
    (l + 1.0) / ((2.0 * l + 1.0) * (2.0 * l + 3.0)).sqrt()
}

fn radial_integral(a: &RadialSolution, b: &RadialSolution, grid: &RadialGrid) -> f64 {
    let r = grid.r();
    grid.integrate(|i| a.u[i] * r[i] * b.u[i])
}

/// `<a|z|b>` in atomic units for the model potential.
pub fn dipole_matrix_element(
    a: StateLabel,
    b: StateLabel,
    defects: &QuantumDefects,
    grid: &RadialGrid,
) -> Result<f64> {
    let ang = angular_factor(a.l, b.l);
    if ang == 0.0 {
        return Ok(0.0);
    }
    let ua = solve_radial(a.n, a.l, defects, grid)?;
    let ub = solve_radial(b.n, b.l, defects, grid)?;
    Ok(ang * radial_integral(&ua, &ub, grid))
}

/// Build the Hamiltonian on the default radial grid for the spec.
pub fn build_hamiltonian(spec: &BasisSpec) -> Result<HamiltonianData> {
    let grid = RadialGrid::for_n_max(spec.n_max, RadialGrid::DEFAULT_POINTS)?;
    build_hamiltonian_with(spec, &grid)
}

pub fn build_hamiltonian_with(spec: &BasisSpec, grid: &RadialGrid) -> Result<HamiltonianData> {
    spec.validate()?;
    let labels = spec.labels();
    let defects = &spec.quantum_defects;
    let solutions: Vec<RadialSolution> = labels
        .par_iter()
        .map(|s| solve_radial(s.n, s.l, defects, grid))
        .collect::<Result<_>>()?;

    let mut energies = DVector::zeros(labels.len());
    for (i, (label, sol)) in labels.iter().zip(&solutions).enumerate() {
        let e = spec.energy(*label)?;
        if (sol.energy - e).abs() > ENERGY_TOL {
            return Err(Error::Convergence {
                label: *label,
                reason: format!("eigenvalue {} differs from defect energy {e}", sol.energy),
            });
        }
        energies[i] = e;
    }

    let n = labels.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| labels[i].l.abs_diff(labels[j].l) == 1)
        .collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            angular_factor(labels[i].l, labels[j].l)
                * radial_integral(&solutions[i], &solutions[j], grid)
        })
        .collect();
    let mut z = DMatrix::zeros(n, n);
    for (&(i, j), &v) in pairs.iter().zip(&values) {
        z[(i, j)] = v;
        z[(j, i)] = v;
    }

    let provenance = format!(
        "generated: quantum-defect model potential, {}-point sqrt mesh to r = {:.1}",
        grid.len(),
        grid.r_max()
    );
    let mut data = HamiltonianData::new(labels, energies, z, provenance)?;
    data.spec = Some(spec.clone());
    Ok(data)
}
