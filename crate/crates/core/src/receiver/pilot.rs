//! Self-referenced pilot recovery: tone isolation, amplitude normalization,
//! counter-rotation of the quantum band, and transmittance tracking.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::QuadraturePair;
use crate::stats::moving_average;

use super::calibration::CalibrationRecord;
use super::detect::BasebandTrace;
use super::spectrum::{bin_freq, brickwall, brickwall_reflect, fft, wrap_freq};

/// Minimum ratio of the pilot peak to the median spectral power.
pub const PILOT_PEAK_THRESHOLD: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PilotFilter {
    /// Expected pilot offset above the quantum band center, Hz.
    pub guard_hz: f64,
    /// Width of the brick-wall pilot filter, Hz.
    pub bandwidth_hz: f64,
    /// Restrict the peak search to `(center, span)`; the whole band if `None`.
    pub search: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PilotRecovery {
    /// Interpolated pilot tone frequency in the trace, Hz.
    pub tone_freq_hz: f64,
    /// Carrier offset of the quantum band, `tone − guard`, Hz.
    pub beat_freq_hz: f64,
    pub guard_hz: f64,
    /// Peak-to-median power ratio of the tone.
    pub peak_ratio: f64,
    /// Down-converted, filtered pilot (one value per trace sample).
    pub pilot_envelope: Vec<Complex64>,
    /// Unit-modulus phase reference; empty until normalized.
    pub unit_rotor: Vec<Complex64>,
    /// Unwrapped rotor phase; empty until normalized.
    pub phase_traj: Vec<f64>,
}

/// Locates the pilot tone and isolates its complex envelope.
///
/// The peak bin is refined with Jacobsen's three-bin estimator and Candan's
/// bias correction for a rectangular window. The trace is then shifted by
/// the estimate and low-passed to `±bandwidth/2` (on its even extension, so
/// slow drifts across the frame do not wrap into a step).
pub fn extract_pilot(trace: &BasebandTrace, filter: &PilotFilter) -> Result<PilotRecovery> {
    let n = trace.len();
    if n < 4 {
        return Err(Error::EmptyRequest("trace too short for pilot search"));
    }
    let fs = trace.sample_rate_hz;
    if !(filter.bandwidth_hz > 0.0 && filter.bandwidth_hz < fs) {
        return Err(Error::domain(
            "pilot bandwidth_hz",
            filter.bandwidth_hz,
            "must lie in (0, sample rate)",
        ));
    }
    let mut bins = trace.samples.clone();
    fft(&mut bins);
    let power: Vec<f64> = bins.iter().map(|z| z.norm_sqr()).collect();

    let in_window = |k: usize| match filter.search {
        None => true,
        Some((center, span)) => wrap_freq(bin_freq(k, n, fs) - center, fs).abs() <= span / 2.0,
    };
    let peak = (0..n)
        .filter(|&k| in_window(k))
        .max_by(|&a, &b| power[a].total_cmp(&power[b]))
        .ok_or(Error::PilotNotFound {
            ratio: 0.0,
            threshold: PILOT_PEAK_THRESHOLD,
        })?;

    let mut sorted = power.clone();
    let mid = n / 2;
    let median = *sorted.select_nth_unstable_by(mid, f64::total_cmp).1;
    let ratio = if median > 0.0 {
        power[peak] / median
    } else {
        f64::INFINITY
    };
    if !(ratio >= PILOT_PEAK_THRESHOLD) {
        return Err(Error::PilotNotFound {
            ratio,
            threshold: PILOT_PEAK_THRESHOLD,
        });
    }

    let prev = bins[(peak + n - 1) % n];
    let next = bins[(peak + 1) % n];
    let denom = bins[peak] * 2.0 - prev - next;
    let delta = if denom.norm() > 0.0 {
        ((prev - next) / denom).re
    } else {
        0.0
    };
    let x = std::f64::consts::PI / n as f64;
    let delta = (delta * x.tan() / x).clamp(-0.5, 0.5);
    let tone = wrap_freq((peak as f64 + delta) * fs / n as f64, fs);

    let step = -std::f64::consts::TAU * tone / fs;
    let shifted: Vec<Complex64> = trace
        .samples
        .iter()
        .enumerate()
        .map(|(i, z)| z * Complex64::from_polar(1.0, step * i as f64))
        .collect();
    let pilot_envelope = brickwall_reflect(&shifted, fs, filter.bandwidth_hz / 2.0);

    Ok(PilotRecovery {
        tone_freq_hz: tone,
        beat_freq_hz: wrap_freq(tone - filter.guard_hz, fs),
        guard_hz: filter.guard_hz,
        peak_ratio: ratio,
        pilot_envelope,
        unit_rotor: Vec::new(),
        phase_traj: Vec::new(),
    })
}

/// Smooths the envelope over `window` samples and normalizes it to a unit
/// rotor. Fails if the smoothed magnitude drops below a tenth of its median.
pub fn normalize_pilot(mut p: PilotRecovery, window: usize) -> Result<PilotRecovery> {
    if p.pilot_envelope.is_empty() {
        return Err(Error::EmptyRequest("pilot envelope is empty"));
    }
    let smoothed = moving_average(&p.pilot_envelope, window.max(1));
    let mags: Vec<f64> = smoothed.iter().map(|z| z.norm()).collect();
    let mut sorted = mags.clone();
    let mid = sorted.len() / 2;
    let median = *sorted.select_nth_unstable_by(mid, f64::total_cmp).1;
    let threshold = 0.1 * median;
    let min = mags.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > threshold) || !(median > 0.0) {
        return Err(Error::LowPilotPower {
            magnitude: min,
            threshold,
        });
    }
    p.unit_rotor = smoothed.iter().zip(&mags).map(|(z, m)| z / m).collect();
    p.phase_traj = unwrap(&p.unit_rotor.iter().map(|z| z.arg()).collect::<Vec<_>>());
    Ok(p)
}

pub(crate) fn unwrap(phases: &[f64]) -> Vec<f64> {
    let tau = std::f64::consts::TAU;
    let mut out = Vec::with_capacity(phases.len());
    let mut offset = 0.0;
    let mut last: Option<f64> = None;
    for &ph in phases {
        if let Some(prev) = last {
            let d = ph - prev;
            offset -= tau * (d / tau).round();
        }
        out.push(ph + offset);
        last = Some(ph);
    }
    out
}

/// Removes the pilot, counter-rotates by the rotor, shifts the quantum band
/// to 0 Hz, low-passes to the symbol band and takes one sample per symbol.
/// Output is in raw units.
pub fn compensate(trace: &BasebandTrace, p: &PilotRecovery) -> Result<Vec<QuadraturePair>> {
    let n = trace.len();
    if p.unit_rotor.len() != n || p.pilot_envelope.len() != n {
        return Err(Error::LengthMismatch {
            what: "pilot recovery vs trace",
            left: p.unit_rotor.len(),
            right: n,
        });
    }
    let sps = trace.samples_per_symbol()?;
    let fs = trace.sample_rate_hz;
    let tau = std::f64::consts::TAU;
    let derot: Vec<Complex64> = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            let pilot = p.pilot_envelope[i] * Complex64::from_polar(1.0, tau * p.tone_freq_hz * t);
            let shift = Complex64::from_polar(1.0, -tau * (p.tone_freq_hz - p.guard_hz) * t);
            (trace.samples[i] - pilot) * p.unit_rotor[i].conj() * shift
        })
        .collect();
    let lp = brickwall(&derot, fs, trace.symbol_rate_hz / 2.0);
    Ok(lp
        .iter()
        .step_by(sps)
        .map(|z| QuadraturePair::from_complex(*z))
        .collect())
}

/// Transmittance trajectory `MA(|μ|²) / pilot_ref_power`, one value per
/// trace sample.
pub fn estimate_transmittance(
    p: &PilotRecovery,
    cal: Option<&CalibrationRecord>,
    window: usize,
) -> Result<Vec<f64>> {
    let cal = cal.ok_or(Error::CalibrationRequired)?;
    cal.validate()?;
    let power: Vec<f64> = p.pilot_envelope.iter().map(|z| z.norm_sqr()).collect();
    Ok(moving_average(&power, window.max(1))
        .into_iter()
        .map(|v| v / cal.pilot_ref_power)
        .collect())
}

/// Mean envelope power, the quantity stored as `pilot_ref_power`.
pub fn pilot_power(p: &PilotRecovery) -> f64 {
    p.pilot_envelope.iter().map(|z| z.norm_sqr()).sum::<f64>() / p.pilot_envelope.len() as f64
}
