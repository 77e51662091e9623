// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::propagator::PulseGrid;

/// Time-dependent fluence penalty `ℓ(t) = ℓ₀ (1 + (M - 1) w(t))`.
///
/// `w` is 1 at both ends of the window, falls to 0 along cos² ramps of width
/// `ramp_fraction · T`, and is 0 on the plateau between them.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySchedule {
    pub base: f64,
    pub edge_multiplier: f64,
    pub ramp_fraction: f64,
    pub values: Vec<f64>,
}

impl PenaltySchedule {
    pub const DEFAULT_BASE: f64 = 1e10;
    pub const DEFAULT_EDGE_MULTIPLIER: f64 = 1000.0;
    pub const DEFAULT_RAMP_FRACTION: f64 = 0.05;

    pub fn new(base: f64, edge_multiplier: f64, ramp_fraction: f64, grid: &PulseGrid) -> Result<Self> {
        if !(base > 0.0 && base.is_finite()) {
            return Err(Error::InvalidProblem(format!("penalty must be positive, got {base}")));
        }
        if !(edge_multiplier >= 1.0 && edge_multiplier.is_finite()) {
            return Err(Error::InvalidProblem(format!(
                "edge multiplier must be at least 1, got {edge_multiplier}"
            )));
        }
        if !(ramp_fraction > 0.0 && ramp_fraction < 0.5) {
            return Err(Error::InvalidProblem(format!(
                "ramp fraction must lie in (0, 0.5), got {ramp_fraction}"
            )));
        }
        let span = grid.duration();
        let ramp = ramp_fraction * span;
        let values = grid
            .times()
            .into_iter()
            .map(|t| {
                let edge = (t - grid.t0).min(grid.t_end() - t).max(0.0);
                let w = if edge < ramp { (FRAC_PI_2 * edge / ramp).cos().powi(2) } else { 0.0 };
                base * (1.0 + (edge_multiplier - 1.0) * w)
            })
            .collect();
        Ok(Self { base, edge_multiplier, ramp_fraction, values })
    }

    pub fn with_defaults(grid: &PulseGrid) -> Result<Self> {
        Self::new(Self::DEFAULT_BASE, Self::DEFAULT_EDGE_MULTIPLIER, Self::DEFAULT_RAMP_FRACTION, grid)
    }

    /// Same penalty at every sample.
    pub fn constant(base: f64, grid: &PulseGrid) -> Result<Self> {
        if !(base > 0.0) {
            return Err(Error::InvalidProblem(format!("penalty must be positive, got {base}")));
        }
        Ok(Self { base, edge_multiplier: 1.0, ramp_fraction: 0.0, values: vec![base; grid.len()] })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_grid(&self, grid: &PulseGrid) -> Result<()> {
        if self.values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "penalty has {} samples, field has {}",
                self.values.len(),
                grid.len()
            )));
        }
        Ok(())
    }
}

/// `Y = Σ_j ℓ(t_j) E(t_j)² dt` over the propagation steps (left-endpoint rule).
pub fn evaluate_cost(field: &PulseGrid, penalty: &PenaltySchedule) -> Result<f64> {
    penalty.check_grid(field)?;
    Ok(field.samples[..field.steps()]
        .iter()
        .zip(&penalty.values)
        .map(|(e, l)| l * e * e)
        .sum::<f64>()
        * field.dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> PulseGrid {
        PulseGrid::zeros(0.0, 413.41, 800).unwrap()
    }

    #[test]
    fn schedule_shape() {
        let g = grid();
        let p = PenaltySchedule::with_defaults(&g).unwrap();
        let l0 = p.base;
        assert_eq!(p.values[0], 1000.0 * l0);
        assert!((p.values[800] - 1000.0 * l0).abs() < 1e-6 * l0);
        assert!(p.values.iter().all(|&v| v >= l0));
        assert_eq!(p.values[400], l0);
        // ramps are 40 steps wide and monotone
        assert!(p.values[..=40].windows(2).all(|w| w[1] <= w[0]));
        assert!(p.values[760..].windows(2).all(|w| w[1] >= w[0]));
        assert!(p.values[41..760].iter().all(|&v| v == l0));
        for w in p.values.windows(2) {
            assert!((w[1] - w[0]).abs() < 0.1 * 1000.0 * l0);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = grid();
        assert!(PenaltySchedule::new(0.0, 1000.0, 0.05, &g).is_err());
        assert!(PenaltySchedule::new(1.0, 0.5, 0.05, &g).is_err());
        assert!(PenaltySchedule::new(1.0, 10.0, 0.5, &g).is_err());
        assert!(PenaltySchedule::new(1.0, 10.0, 0.0, &g).is_err());
    }

    #[test]
    fn cost_closed_forms() {
        let g = grid();
        let p = PenaltySchedule::constant(3.0, &g).unwrap();
        assert_eq!(evaluate_cost(&g, &p).unwrap(), 0.0);
        let e = PulseGrid::new(0.0, g.dt, vec![2e-3; g.len()]).unwrap();
        let y = evaluate_cost(&e, &p).unwrap();
        let t = g.duration();
        assert!((y - 3.0 * 4e-6 * t).abs() < 1e-12 * y);
        let e2 = PulseGrid::new(0.0, g.dt, vec![4e-3; g.len()]).unwrap();
        assert!((evaluate_cost(&e2, &p).unwrap() - 4.0 * y).abs() < 1e-12 * y);
        let short = PulseGrid::zeros(0.0, g.dt, 10).unwrap();
        assert!(matches!(evaluate_cost(&short, &p), Err(Error::GridMismatch(_))));
    }
}
