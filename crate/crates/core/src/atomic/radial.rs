// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

//! Numerov shooting on the square-root mesh.
//!
//! With `r = x²` and `u(r) = sqrt(2x) y(x)`, the radial equation
//! `u'' = [2(V - E) + l(l+1)/r²] u` becomes `y'' = G(x) y` with
//!
//! ```text
//! G(x) = 8 x² (V(x²) - E) + (2l + 3/2)(2l + 1/2) / x²
//! ```
//!
//! which Numerov integrates on the uniform x grid. The model potential is
//! `V(r) = -(1 + c exp(-r / CORE_RADIUS)) / r`.

use super::{quantum_defect_energy, QuantumDefects, RadialGrid, StateLabel};
use crate::error::{Error, Result};

/// Range of the short-range core term, bohr.
pub const CORE_RADIUS: f64 = 1.0;

/// Smallest WKB decay exponent between the outer turning point and r_max.
const MIN_TAIL_DECAY: f64 = 7.0;
const RESCALE: f64 = 1e150;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone)]
pub struct RadialSolution {
    pub label: StateLabel,
    /// Eigenvalue found by shooting, Hartree.
    pub energy: f64,
    /// Strength of the core term that places the eigenvalue on the defect energy.
    pub core_strength: f64,
    /// `u(r) = r R(r)` on the grid, normalized to ∫u² dr = 1 and positive near the origin.
    pub u: Vec<f64>,
    pub nodes: usize,
}

impl RadialSolution {
    pub fn expectation_r(&self, grid: &RadialGrid) -> f64 {
        grid.integrate(|i| self.u[i] * self.u[i] * grid.r()[i])
    }
}

/// `G(x_i) = base_i + c core_i - E slope_i`.
struct Coefficients<'g> {
    grid: &'g RadialGrid,
    base: Vec<f64>,
    core: Vec<f64>,
    slope: Vec<f64>,
    h2_12: f64,
    start: usize,
}

impl<'g> Coefficients<'g> {
    fn new(grid: &'g RadialGrid, l: u32) -> Self {
        let centrifugal = (2.0 * l as f64 + 1.5) * (2.0 * l as f64 + 0.5);
        let n = grid.len();
        let mut base = Vec::with_capacity(n);
        let mut core = Vec::with_capacity(n);
        let mut slope = Vec::with_capacity(n);
        for (i, &r) in grid.r().iter().enumerate() {
            let x = grid.x(i);
            base.push(-8.0 + centrifugal / (x * x));
            core.push(-8.0 * (-r / CORE_RADIUS).exp());
            slope.push(8.0 * r);
        }
        let h2_12 = grid.dx() * grid.dx() / 12.0;
        // Numerov needs h²G/12 well below one; inside that the power law is exact enough.
        let start = base.iter().position(|&b| b * h2_12 < 0.1).unwrap_or(0);
        Self { grid, base, core, slope, h2_12, start: start.min(n - 3) }
    }

    #[inline]
    fn g(&self, i: usize, c: f64, e: f64) -> f64 {
        self.base[i] + c * self.core[i] - e * self.slope[i]
    }

    #[inline]
    fn f(&self, i: usize, c: f64, e: f64) -> f64 {
        1.0 - self.h2_12 * self.g(i, c, e)
    }

    /// Small-r series `u = r^(l+1) (1 + a1 r + a2 r²)` expressed in y.
    fn power_law(&self, i: usize, l: u32, c: f64, e: f64) -> f64 {
        let r = self.grid.r()[i];
        let lf = l as f64;
        let z = 1.0 + c;
        let a1 = -z / (lf + 1.0);
        let a2 = (2.0 * z * z / (lf + 1.0) + 2.0 * (c - e)) / (2.0 * (2.0 * lf + 3.0));
        self.grid.x(i).powf(2.0 * lf + 1.5) * (1.0 + r * (a1 + r * a2))
    }

    /// Outward solution on `[0, stop]` (zero below the start index).
    fn outward(&self, l: u32, c: f64, e: f64, stop: usize) -> Vec<f64> {
        let mut y = vec![0.0; stop + 1];
        let s = self.start;
        y[s] = self.power_law(s, l, c, e);
        y[s + 1] = self.power_law(s + 1, l, c, e);
        if y[s] == 0.0 && y[s + 1] == 0.0 {
            y[s + 1] = f64::MIN_POSITIVE;
        }
        let mut f_prev = self.f(s, c, e);
        let mut f_cur = self.f(s + 1, c, e);
        for i in s + 1..stop {
            let f_next = self.f(i + 1, c, e);
            y[i + 1] = ((12.0 - 10.0 * f_cur) * y[i] - f_prev * y[i - 1]) / f_next;
            if y[i + 1].abs() > RESCALE {
                y[..=i + 1].iter_mut().for_each(|v| *v /= RESCALE);
            }
            f_prev = f_cur;
            f_cur = f_next;
        }
        y
    }

    /// Number of sign changes of the outward solution over the whole grid.
    fn nodes(&self, l: u32, c: f64, e: f64) -> usize {
        let n = self.grid.len();
        let s = self.start;
        let (mut y0, mut y1) = (self.power_law(s, l, c, e), self.power_law(s + 1, l, c, e));
        if y0 == 0.0 && y1 == 0.0 {
            y1 = f64::MIN_POSITIVE;
        }
        let mut f_prev = self.f(s, c, e);
        let mut f_cur = self.f(s + 1, c, e);
        let mut count = 0;
        for i in s + 1..n - 1 {
            let f_next = self.f(i + 1, c, e);
            let mut y2 = ((12.0 - 10.0 * f_cur) * y1 - f_prev * y0) / f_next;
            if y2.abs() > RESCALE {
                y1 /= RESCALE;
                y2 /= RESCALE;
            }
            if (y2 < 0.0 && y1 > 0.0) || (y2 > 0.0 && y1 < 0.0) {
                count += 1;
            }
            y0 = y1;
            y1 = y2;
            f_prev = f_cur;
            f_cur = f_next;
        }
        count
    }

    /// Inward solution on `[stop, N-1]`, decaying to zero at r_max.
    fn inward(&self, c: f64, e: f64, stop: usize) -> Vec<f64> {
        let n = self.grid.len();
        let mut y = vec![0.0; n];
        y[n - 1] = 0.0;
        y[n - 2] = 1e-30;
        let mut f_next = self.f(n - 1, c, e);
        let mut f_cur = self.f(n - 2, c, e);
        for i in (stop + 1..n - 1).rev() {
            let f_prev = self.f(i - 1, c, e);
            y[i - 1] = ((12.0 - 10.0 * f_cur) * y[i] - f_next * y[i + 1]) / f_prev;
            if y[i - 1].abs() > RESCALE {
                y[i - 1..].iter_mut().for_each(|v| *v /= RESCALE);
            }
            f_next = f_cur;
            f_cur = f_prev;
        }
        y
    }

    /// Last classically allowed grid index.
    fn outer_turning_point(&self, c: f64, e: f64) -> Option<usize> {
        (self.start..self.grid.len()).rev().find(|&i| self.g(i, c, e) < 0.0)
    }
}

fn bisect(mut lo: f64, mut hi: f64, rel_tol: f64, mut above: impl FnMut(f64) -> bool) -> f64 {
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * mid.abs().max(f64::MIN_POSITIVE) || mid == lo || mid == hi {
            break;
        }
        if above(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvalue with `target` nodes for a fixed core strength.
fn find_energy(
    coef: &Coefficients,
    label: StateLabel,
    c: f64,
    target: usize,
    estimate: f64,
) -> Result<f64> {
    let l = label.l;
    let fail = |reason: &str| Error::Convergence { label, reason: reason.to_string() };
    let mut lo = 1.2 * estimate;
    let mut tries = 0;
    while coef.nodes(l, c, lo) > target {
        lo *= 1.5;
        tries += 1;
        if tries > 80 {
            return Err(fail("no lower energy bracket"));
        }
    }
    let mut hi = 0.8 * estimate;
    tries = 0;
    while coef.nodes(l, c, hi) <= target {
        hi *= 0.7;
        tries += 1;
        if tries > 80 {
            return Err(fail("no upper energy bracket"));
        }
    }
    Ok(bisect(lo, hi, 1e-15, |e| coef.nodes(l, c, e) > target))
}

/// Core strength placing the eigenvalue with `target` nodes at `energy`.
fn find_core_strength(coef: &Coefficients, label: StateLabel, target: usize, energy: f64) -> Result<f64> {
    let l = label.l;
    if coef.nodes(l, 0.0, energy) > target {
        return Err(Error::Convergence {
            label,
            reason: "defect energy lies above the Coulomb level".into(),
        });
    }
    let mut hi = 1.0;
    let mut tries = 0;
    while coef.nodes(l, hi, energy) <= target {
        hi *= 2.0;
        tries += 1;
        if tries > 30 {
            return Err(Error::Convergence { label, reason: "no core-strength bracket".into() });
        }
    }
    Ok(bisect(0.0, hi, 1e-14, |c| coef.nodes(l, c, energy) > target))
}

fn tail_decay(coef: &Coefficients, l: u32, c: f64, e: f64, turning: usize) -> f64 {
    let grid = coef.grid;
    let r = grid.r();
    let kappa = |i: usize| {
        let ri = r[i];
        let v = -(1.0 + c * (-ri / CORE_RADIUS).exp()) / ri + (l * (l + 1)) as f64 / (2.0 * ri * ri);
        (2.0 * (v - e)).max(0.0).sqrt()
    };
    (turning + 1..grid.len()).map(|i| 0.5 * (kappa(i) + kappa(i - 1)) * (r[i] - r[i - 1])).sum()
}

/// Solve for the (n, l) radial function on `grid`.
///
/// The eigenvalue is checked against the quantum-defect energy; for δ_l = 0 the
/// potential is pure Coulomb.
pub fn solve_radial(n: u32, l: u32, defects: &QuantumDefects, grid: &RadialGrid) -> Result<RadialSolution> {
    let label = StateLabel::new(n, l)?;
    let target_energy = quantum_defect_energy(n, l, defects)?;
    let target_nodes = (n - l - 1) as usize;
    let coef = Coefficients::new(grid, l);

    let classical = coef.outer_turning_point(0.0, target_energy);
    let turning = match classical {
        Some(t) if t + 2 < grid.len() => t,
        _ => {
            return Err(Error::GridExtent { label, r_max: grid.r_max(), decay: 0.0 });
        }
    };
    let decay = tail_decay(&coef, l, 0.0, target_energy, turning);
    if decay < MIN_TAIL_DECAY {
        return Err(Error::GridExtent { label, r_max: grid.r_max(), decay });
    }

    let core_strength = if defects.get(l) == 0.0 {
        0.0
    } else {
        find_core_strength(&coef, label, target_nodes, target_energy)?
    };
    let energy = find_energy(&coef, label, core_strength, target_nodes, target_energy)?;

    let m = coef.outer_turning_point(core_strength, energy).unwrap_or(turning);
    let out = coef.outward(l, core_strength, energy, m);
    let inw = coef.inward(core_strength, energy, m);
    if out[m] == 0.0 || inw[m] == 0.0 {
        return Err(Error::Convergence { label, reason: "zero at matching point".into() });
    }
    let scale = out[m] / inw[m];
    let mut u: Vec<f64> = (0..grid.len())
        .map(|i| {
            let y = if i <= m { out[i] } else { inw[i] * scale };
            y * (2.0 * grid.x(i)).sqrt()
        })
        .collect();
    let norm = grid.integrate(|i| u[i] * u[i]).sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::Convergence { label, reason: "wavefunction not normalizable".into() });
    }
    u.iter_mut().for_each(|v| *v /= norm);

    let nodes = count_nodes(&u);
    if nodes != target_nodes {
        return Err(Error::Convergence {
            label,
            reason: format!("found {nodes} nodes, expected {target_nodes}"),
        });
    }
    Ok(RadialSolution { label, energy, core_strength, u, nodes })
}

/// Sign changes, ignoring the numerically negligible far tail.
fn count_nodes(u: &[f64]) -> usize {
    let peak = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = peak * 1e-9;
    let mut last_sign = 0.0;
    let mut nodes = 0;
    for &v in u {
        if v.abs() <= floor {
            continue;
        }
        let s = v.signum();
        if last_sign != 0.0 && s != last_sign {
            nodes += 1;
        }
        last_sign = s;
    }
    nodes
}
