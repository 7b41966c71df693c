//! Uniform time/frequency grids and the unitary Fourier pair between them.
//!
//! The transform convention is
//!
//! ```text
//! Ψ(ω) = (2π)^{-1/2} Σ ψ(t) e^{+iωt} Δt
//! ψ(t) = (2π)^{-1/2} Σ Ψ(ω) e^{-iωt} Δω
//! ```
//!
//! With `Δω · Δt · N = 2π` this pair is exactly unitary on the grid, so
//! `Σ|ψ|²Δt = Σ|Ψ|²Δω` holds to rounding. The `+iωt` kernel makes
//! `1/(a − iω)` the spectrum of the causal decay `e^{−at}Θ(t)`.
//!
//! Frequencies are always stored zero-centred and increasing:
//! `ω_k = (k − N/2)·Δω`, `k = 0..N`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::wavepacket::{SpectralWavepacket, TemporalWavepacket};

/// Smallest accepted number of samples.
pub const MIN_SAMPLES: usize = 16;

/// Default sample count.
pub const DEFAULT_SAMPLES: usize = 1 << 16;

/// Default time span in units of `1/Γp`.
pub const DEFAULT_SPAN_FACTOR: f64 = 120.0;

/// Fraction of the span placed before the herald time on default grids.
pub const DEFAULT_LEAD_FRACTION: f64 = 0.1;

/// A uniform time grid and its conjugate angular-frequency grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisPair {
    n_samples: usize,
    time_step: f64,
    time_origin: f64,
}

impl AxisPair {
    pub fn new(n_samples: usize, time_span: f64, time_origin: f64) -> Result<Self> {
        make_axis_pair(n_samples, time_span, time_origin)
    }

    /// Default grid for a photon of bandwidth `gamma_p` heralded at `herald_time`.
    ///
    /// The origin sits roughly 10% of the span before the herald time and is
    /// snapped so the herald time coincides with a sample.
    pub fn default_for(gamma_p: f64, herald_time: f64) -> Result<Self> {
        Self::with_span_factor(DEFAULT_SAMPLES, DEFAULT_SPAN_FACTOR, gamma_p, herald_time)
    }

    /// Grid of `n_samples` spanning `span_factor / gamma_p`, herald time on a sample.
    pub fn with_span_factor(
        n_samples: usize,
        span_factor: f64,
        gamma_p: f64,
        herald_time: f64,
    ) -> Result<Self> {
        if !(gamma_p > 0.0 && gamma_p.is_finite()) {
            return Err(invalid(format!("gamma_p must be positive, got {gamma_p}")));
        }
        if !(span_factor > 0.0 && span_factor.is_finite()) {
            return Err(invalid(format!("span factor must be positive, got {span_factor}")));
        }
        let span = span_factor / gamma_p;
        let lead = (DEFAULT_LEAD_FRACTION * n_samples as f64).round();
        let origin = herald_time - lead * (span / n_samples as f64);
        make_axis_pair(n_samples, span, origin)
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn time_step(&self) -> f64 {
        self.time_step
    }

    pub fn time_origin(&self) -> f64 {
        self.time_origin
    }

    pub fn time_span(&self) -> f64 {
        self.time_step * self.n_samples as f64
    }

    pub fn frequency_step(&self) -> f64 {
        2.0 * PI / (self.n_samples as f64 * self.time_step)
    }

    /// Lowest stored frequency, `−π/Δt`.
    pub fn frequency_min(&self) -> f64 {
        -((self.n_samples / 2) as f64) * self.frequency_step()
    }

    pub fn time(&self, index: usize) -> f64 {
        self.time_origin + index as f64 * self.time_step
    }

    pub fn frequency(&self, index: usize) -> f64 {
        (index as f64 - (self.n_samples / 2) as f64) * self.frequency_step()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples).map(|i| self.time(i)).collect()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n_samples).map(|k| self.frequency(k)).collect()
    }

    /// Index of the first sample with `t ≥ time`, tolerant to rounding at
    /// exact sample positions. Returns `n_samples` past the end of the grid.
    pub fn first_index_at_or_after(&self, time: f64) -> usize {
        let pos = (time - self.time_origin) / self.time_step;
        let idx = (pos - 1e-9).ceil();
        if idx <= 0.0 {
            0
        } else {
            (idx as usize).min(self.n_samples)
        }
    }

    /// Index of a sample lying exactly at `time` (within 1e-9 of a step).
    pub fn exact_index(&self, time: f64) -> Option<usize> {
        let pos = (time - self.time_origin) / self.time_step;
        let nearest = pos.round();
        if (pos - nearest).abs() < 1e-9 && nearest >= 0.0 && (nearest as usize) < self.n_samples {
            Some(nearest as usize)
        } else {
            None
        }
    }

    pub fn contains_time(&self, time: f64) -> bool {
        time >= self.time_origin && time < self.time_origin + self.time_span()
    }

    /// Whether `omega` lies inside the stored frequency band.
    pub fn contains_frequency(&self, omega: f64) -> bool {
        let half = (self.n_samples / 2) as f64 * self.frequency_step();
        omega >= -half && omega < half
    }

    pub(crate) fn ensure_same(&self, other: &AxisPair) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }

    /// The same grid with all times divided and all rates multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        make_axis_pair(
            self.n_samples,
            self.time_span() / factor,
            self.time_origin / factor,
        )
    }
}

/// Build a grid of `n_samples` points covering `time_span` from `time_origin`.
pub fn make_axis_pair(n_samples: usize, time_span: f64, time_origin: f64) -> Result<AxisPair> {
    if n_samples < MIN_SAMPLES || !n_samples.is_power_of_two() {
        return Err(invalid(format!(
            "n_samples must be a power of two >= {MIN_SAMPLES}, got {n_samples}"
        )));
    }
    if !(time_span > 0.0 && time_span.is_finite()) {
        return Err(invalid(format!("time_span must be positive, got {time_span}")));
    }
    if !time_origin.is_finite() {
        return Err(invalid("time_origin must be finite"));
    }
    Ok(AxisPair {
        n_samples,
        time_step: time_span / n_samples as f64,
        time_origin,
    })
}

/// Planned forward/inverse transforms for one grid.
///
/// Planning is the expensive part of a transform, so pipelines that transform
/// many packets on the same grid should build one of these and reuse it.
#[derive(Clone)]
pub struct FourierPair {
    axes: AxisPair,
    kernel_plus: Arc<dyn Fft<f64>>,
    kernel_minus: Arc<dyn Fft<f64>>,
    // Δt/√(2π)·e^{iω_k t_origin}
    forward_twiddle: Vec<Complex64>,
    // Δω/√(2π)·e^{−iω_k t_origin}
    inverse_twiddle: Vec<Complex64>,
}

impl fmt::Debug for FourierPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierPair").field("axes", &self.axes).finish()
    }
}

impl FourierPair {
    pub fn new(axes: AxisPair) -> Self {
        let n = axes.n_samples();
        let mut planner = FftPlanner::new();
        let kernel_plus = planner.plan_fft_inverse(n);
        let kernel_minus = planner.plan_fft_forward(n);
        let norm = 1.0 / (2.0 * PI).sqrt();
        let t0 = axes.time_origin();
        let forward_twiddle = (0..n)
            .map(|k| Complex64::from_polar(axes.time_step() * norm, axes.frequency(k) * t0))
            .collect();
        let inverse_twiddle = (0..n)
            .map(|k| Complex64::from_polar(axes.frequency_step() * norm, -axes.frequency(k) * t0))
            .collect();
        Self {
            axes,
            kernel_plus,
            kernel_minus,
            forward_twiddle,
            inverse_twiddle,
        }
    }

    pub fn axes(&self) -> &AxisPair {
        &self.axes
    }

    /// Time → frequency.
    pub fn forward(&self, psi: &TemporalWavepacket) -> Result<SpectralWavepacket> {
        self.axes.ensure_same(psi.axes())?;
        let mut buf: Vec<Complex64> = psi
            .samples()
            .iter()
            .enumerate()
            .map(|(n, &z)| if n % 2 == 0 { z } else { -z })
            .collect();
        self.kernel_plus.process(&mut buf);
        for (z, w) in buf.iter_mut().zip(&self.forward_twiddle) {
            *z *= w;
        }
        SpectralWavepacket::new(self.axes, buf)
    }

    /// Frequency → time.
    pub fn inverse(&self, spectrum: &SpectralWavepacket) -> Result<TemporalWavepacket> {
        self.axes.ensure_same(spectrum.axes())?;
        let mut buf: Vec<Complex64> = spectrum
            .samples()
            .iter()
            .zip(&self.inverse_twiddle)
            .map(|(z, w)| z * w)
            .collect();
        self.kernel_minus.process(&mut buf);
        for (n, z) in buf.iter_mut().enumerate() {
            if n % 2 == 1 {
                *z = -*z;
            }
        }
        TemporalWavepacket::new(self.axes, buf)
    }
}

/// One-shot forward transform. Plans a fresh FFT on every call.
pub fn forward_transform(psi: &TemporalWavepacket) -> Result<SpectralWavepacket> {
    FourierPair::new(*psi.axes()).forward(psi)
}

/// One-shot inverse transform. Plans a fresh FFT on every call.
pub fn inverse_transform(spectrum: &SpectralWavepacket) -> Result<TemporalWavepacket> {
    FourierPair::new(*spectrum.axes()).inverse(spectrum)
}
