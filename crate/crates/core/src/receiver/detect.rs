//! Bob's heterodyne detection and complex-baseband trace synthesis.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelOutput, ChannelRealization};
use crate::error::{Error, Result};
use crate::optics::{DetectorParams, QuadraturePair};
use crate::rng::gauss;

use super::spectrum::interpolate;

/// Sampled detector output.
#[derive(Debug, Clone, PartialEq)]
pub struct BasebandTrace {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: f64,
    pub symbol_rate_hz: f64,
}

impl BasebandTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples_per_symbol(&self) -> Result<usize> {
        let r = self.sample_rate_hz / self.symbol_rate_hz;
        let sps = r.round();
        if !(sps >= 1.0) || (r - sps).abs() > 1e-9 * r {
            return Err(Error::domain(
                "sample_rate / symbol_rate",
                r,
                "must be a positive integer",
            ));
        }
        Ok(sps as usize)
    }

    pub fn validate(&self) -> Result<()> {
        self.samples_per_symbol()?;
        if let Some(z) = self.samples.iter().find(|z| !z.is_finite()) {
            return Err(Error::domain("trace sample", z.re, "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceiverParams {
    pub det: DetectorParams,
    pub samples_per_symbol: usize,
    /// Offset of the pilot tone from the quantum band center, Hz.
    pub pilot_guard_hz: f64,
    /// Scale from SNU to the digitizer's raw units.
    pub raw_gain: f64,
}

impl ReceiverParams {
    pub fn validate(&self, symbol_rate_hz: f64) -> Result<()> {
        self.det.validate()?;
        if self.samples_per_symbol < 2 {
            return Err(Error::domain(
                "samples_per_symbol",
                self.samples_per_symbol as f64,
                "must be >= 2",
            ));
        }
        if !(self.raw_gain > 0.0) {
            return Err(Error::domain("raw_gain", self.raw_gain, "must be > 0"));
        }
        let fs = symbol_rate_hz * self.samples_per_symbol as f64;
        let guard = self.pilot_guard_hz.abs();
        if !(guard > symbol_rate_hz / 2.0 && guard < fs / 2.0) {
            return Err(Error::domain(
                "pilot_guard_hz",
                self.pilot_guard_hz,
                "must clear the quantum band and stay below Nyquist",
            ));
        }
        Ok(())
    }

    pub fn sample_rate_hz(&self, symbol_rate_hz: f64) -> f64 {
        symbol_rate_hz * self.samples_per_symbol as f64
    }
}

/// Detects the channel output.
///
/// The quantum envelope is band-limited to the symbol rate, scaled by
/// `√(η/2)` and rotated by the carrier phase (with the offset ramp inside
/// each symbol). White detector noise of `sps·(1 − η/2 + ν)` per quadrature
/// per sample is added, which becomes `1 − η/2 + ν` per symbol after
/// low-pass filtering. The pilot appears at `guard` Hz above the quantum
/// band center with amplitude `√η·|pilot|`.
pub fn bob_detect<R: Rng + ?Sized>(
    out: &ChannelOutput,
    real: &ChannelRealization,
    rx: &ReceiverParams,
    rng: &mut R,
) -> Result<BasebandTrace> {
    let n = real.len();
    if n == 0 {
        return Err(Error::EmptyRequest("empty channel output"));
    }
    for (what, len) in [
        ("envelope vs channel", out.envelope.len()),
        ("pilot vs channel", out.pilot.len()),
    ] {
        if len != n {
            return Err(Error::LengthMismatch {
                what,
                left: len,
                right: n,
            });
        }
    }
    let symbol_rate = real.symbol_rate_hz;
    rx.validate(symbol_rate)?;
    let sps = rx.samples_per_symbol;
    let fs = rx.sample_rate_hz(symbol_rate);

    let env: Vec<Complex64> = out.envelope.iter().map(|q| q.to_complex()).collect();
    let fine = interpolate(&env, sps);
    let phi = real.total_phase();

    let eta = rx.det.efficiency;
    let g_q = (eta / 2.0).sqrt();
    let g_p = eta.sqrt();
    let sigma = (sps as f64 * rx.det.added_variance()).sqrt();
    let tau = std::f64::consts::TAU;

    let mut samples = Vec::with_capacity(n * sps);
    for k in 0..n {
        let f = real.freq_offset[k];
        for m in 0..sps {
            let idx = k * sps + m;
            let ramp = tau * f * m as f64 / fs;
            let rot = Complex64::from_polar(1.0, phi[k] + ramp);
            let quantum = fine[idx] * rot * g_q;
            let noise = Complex64::new(sigma * gauss(rng), sigma * gauss(rng));
            let pilot = out.pilot[k]
                * g_p
                * Complex64::from_polar(1.0, ramp + tau * rx.pilot_guard_hz * idx as f64 / fs);
            samples.push((quantum + noise + pilot) * rx.raw_gain);
        }
    }
    Ok(BasebandTrace {
        samples,
        sample_rate_hz: fs,
        symbol_rate_hz: symbol_rate,
    })
}

/// Trace with the signal input blocked and the LO on: vacuum at the input,
/// no pilot.
pub fn vacuum_trace<R: Rng + ?Sized>(
    rx: &ReceiverParams,
    symbols: usize,
    symbol_rate_hz: f64,
    rng: &mut R,
) -> Result<BasebandTrace> {
    if symbols == 0 {
        return Err(Error::EmptyRequest("vacuum trace length is zero"));
    }
    let envelope: Vec<QuadraturePair> = (0..symbols).map(|_| QuadraturePair::vacuum(rng)).collect();
    let out = ChannelOutput {
        quantum: envelope.clone(),
        pilot: vec![Complex64::new(0.0, 0.0); symbols],
        envelope,
    };
    bob_detect(
        &out,
        &ChannelRealization::identity(symbols, symbol_rate_hz),
        rx,
        rng,
    )
}

/// Trace with the LO off: only electronic noise, `sps·ν` per quadrature
/// per sample.
pub fn electronic_floor_trace<R: Rng + ?Sized>(
    rx: &ReceiverParams,
    symbols: usize,
    symbol_rate_hz: f64,
    rng: &mut R,
) -> Result<BasebandTrace> {
    if symbols == 0 {
        return Err(Error::EmptyRequest("floor trace length is zero"));
    }
    rx.validate(symbol_rate_hz)?;
    let sps = rx.samples_per_symbol;
    let sigma = (sps as f64 * rx.det.electronic_noise).sqrt() * rx.raw_gain;
    let samples = (0..symbols * sps)
        .map(|_| Complex64::new(sigma * gauss(rng), sigma * gauss(rng)))
        .collect();
    Ok(BasebandTrace {
        samples,
        sample_rate_hz: rx.sample_rate_hz(symbol_rate_hz),
        symbol_rate_hz,
    })
}
