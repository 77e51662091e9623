// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};

/// Square-root radial mesh: `x = sqrt(r)` is uniform.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    x0: f64,
    dx: f64,
    r: Vec<f64>,
}

impl RadialGrid {
    pub const DEFAULT_POINTS: usize = 20_000;
    pub const DEFAULT_R_MIN: f64 = 1e-4;

    pub fn sqrt_mesh(r_min: f64, r_max: f64, points: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && points >= 16) {
            return Err(Error::InvalidSpec(format!(
                "bad radial grid r_min={r_min}, r_max={r_max}, points={points}"
            )));
        }
        let x0 = r_min.sqrt();
        let dx = (r_max.sqrt() - x0) / (points - 1) as f64;
        let r = (0..points)
            .map(|i| {
                let x = x0 + dx * i as f64;
                x * x
            })
            .collect();
        Ok(Self { x0, dx, r })
    }

    /// Default mesh for a basis reaching `n_max`: r up to `3 n_max² + 50` bohr.
    pub fn for_n_max(n_max: u32, points: usize) -> Result<Self> {
        let n2 = (n_max as f64).powi(2);
        Self::sqrt_mesh(Self::DEFAULT_R_MIN, 3.0 * n2 + 50.0, points)
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + self.dx * i as f64
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Trapezoid rule over the (nonuniform) r values.
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        let mut acc = 0.0;
        let mut prev = f(0);
        for i in 1..self.r.len() {
            let cur = f(i);
            acc += 0.5 * (prev + cur) * (self.r[i] - self.r[i - 1]);
            prev = cur;
        }
        acc
    }
}
