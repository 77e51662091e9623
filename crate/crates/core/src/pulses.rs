// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

//! Guess pulses and time-frequency analysis of control fields.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::propagator::PulseGrid;

/// sin² half-cycle lobe of full width `width` centred on `t_peak`, sampled on `grid`.
pub fn half_cycle_pulse(peak: f64, width: f64, t_peak: f64, grid: &PulseGrid) -> Result<PulseGrid> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidPulse(format!("half-cycle width must be positive, got {width}")));
    }
    let samples = grid
        .times()
        .into_iter()
        .map(|t| {
            if (t - t_peak).abs() <= 0.5 * width {
                peak * (PI * (t - t_peak + 0.5 * width) / width).sin().powi(2)
            } else {
                0.0
            }
        })
        .collect();
    PulseGrid::new(grid.t0, grid.dt, samples)
}

/// One-sided amplitude spectrum `|∫ E(t) e^{-iωt} dt|` on the DFT grid.
#[derive(Debug, Clone)]
pub struct SpectrumData {
    /// Angular frequencies `2πk / (N dt)`, atomic units.
    pub frequencies: Vec<f64>,
    /// `dt |DFT_k|`
    pub magnitudes: Vec<f64>,
    pub fft_len: usize,
    pub dt: f64,
}

impl SpectrumData {
    /// `(1 / (N dt)) Σ_k w_k |M_k|²` with `w = 1` at DC and Nyquist and 2
    /// elsewhere. Equals `Σ_j E_j² dt` (Parseval).
    pub fn energy(&self) -> f64 {
        let n = self.fft_len;
        let last = self.magnitudes.len() - 1;
        let sum: f64 = self
            .magnitudes
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let w = if k == 0 || (k == last && n.is_multiple_of(2)) { 1.0 } else { 2.0 };
                w * m * m
            })
            .sum();
        sum / (n as f64 * self.dt)
    }

    pub fn bin_width(&self) -> f64 {
        2.0 * PI / (self.fft_len as f64 * self.dt)
    }

    /// Index of the largest magnitude, skipping DC when `skip_dc`.
    pub fn peak_index(&self, skip_dc: bool) -> usize {
        let start = usize::from(skip_dc);
        (start..self.magnitudes.len())
            .max_by(|&a, &b| self.magnitudes[a].total_cmp(&self.magnitudes[b]))
            .unwrap_or(0)
    }

    /// Indices of local maxima, strongest first.
    pub fn peaks(&self, count: usize) -> Vec<usize> {
        let m = &self.magnitudes;
        let mut idx: Vec<usize> = (1..m.len().saturating_sub(1))
            .filter(|&k| m[k] > m[k - 1] && m[k] >= m[k + 1])
            .collect();
        idx.sort_by(|&a, &b| m[b].total_cmp(&m[a]));
        idx.truncate(count);
        idx
    }
}

/// Default zero padding: next power of two at or above 4× the sample count.
pub fn spectrum(pulse: &PulseGrid) -> SpectrumData {
    spectrum_padded(pulse, (4 * pulse.len()).next_power_of_two())
}

pub fn spectrum_padded(pulse: &PulseGrid, fft_len: usize) -> SpectrumData {
    let n = fft_len.max(pulse.len());
    let mut buf: Vec<Complex64> = pulse
        .samples
        .iter()
        .map(|&e| Complex64::new(e, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(n)
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let frequencies = (0..=half).map(|k| 2.0 * PI * k as f64 / (n as f64 * pulse.dt)).collect();
    let magnitudes = buf[..=half].iter().map(|c| c.norm() * pulse.dt).collect();
    SpectrumData { frequencies, magnitudes, fft_len: n, dt: pulse.dt }
}

/// Gaussian-windowed time-frequency intensity of a field.
#[derive(Debug, Clone)]
pub struct HusimiMap {
    pub times: Vec<f64>,
    pub frequencies: Vec<f64>,
    /// `intensity[i][k]` at `times[i]`, `frequencies[k]`.
    pub intensity: Vec<Vec<f64>>,
    pub sigma: f64,
}

impl HusimiMap {
    /// Frequency of the strongest bin at each time centre.
    pub fn ridge(&self) -> Vec<f64> {
        self.intensity
            .iter()
            .map(|row| {
                let k = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap_or(0);
                self.frequencies[k]
            })
            .collect()
    }

    pub fn max_intensity(&self) -> f64 {
        self.intensity.iter().flatten().fold(0.0, |m, &v| m.max(v))
    }
}

pub fn linspace(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|k| start + (end - start) * k as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// `Q(t, ω) = |Σ_j E(t_j) g(t_j - t) e^{-iω t_j} dt|²` with a Gaussian window of
/// standard deviation `sigma`, evaluated at every `time_stride`-th sample.
/// The window is cut at ±8σ.
pub fn husimi(pulse: &PulseGrid, sigma: f64, time_stride: usize, frequencies: &[f64]) -> Result<HusimiMap> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidPulse(format!("Husimi window must be positive, got {sigma}")));
    }
    let stride = time_stride.max(1);
    let centers: Vec<usize> = (0..pulse.len()).step_by(stride).collect();
    let reach = (8.0 * sigma / pulse.dt).ceil() as usize;
    let intensity = centers
        .par_iter()
        .map(|&c| {
            let lo = c.saturating_sub(reach);
            let hi = (c + reach).min(pulse.len() - 1);
            let tc = pulse.time(c);
            let windowed: Vec<(f64, f64)> = (lo..=hi)
                .map(|j| {
                    let t = pulse.time(j);
                    let g = (-(t - tc).powi(2) / (2.0 * sigma * sigma)).exp();
                    (t, pulse.samples[j] * g * pulse.dt)
                })
                .collect();
            frequencies
                .iter()
                .map(|&w| {
                    let s: Complex64 =
                        windowed.iter().map(|&(t, a)| Complex64::from_polar(a, -w * t)).sum();
                    s.norm_sqr()
                })
                .collect()
        })
        .collect();
    Ok(HusimiMap {
        times: centers.iter().map(|&c| pulse.time(c)).collect(),
        frequencies: frequencies.to_vec(),
        intensity,
        sigma,
    })
}
