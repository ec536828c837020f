//! Free-space fading channel: per-frame transmittance levels with slow
//! intra-frame drift, Wiener carrier phase, and a laser frequency offset.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, Error, Result};
use crate::optics::QuadraturePair;
use crate::rng::gauss;
use crate::stats::{from_db, variance};

/// Per-symbol channel state for one frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelRealization {
    /// Linear transmittance, in (0, 1].
    pub transmittance: Vec<f64>,
    /// Carrier phase in radians (continuous, not wrapped).
    pub phase: Vec<f64>,
    /// Frequency offset between the transmitter laser and Bob's LO, Hz.
    pub freq_offset: Vec<f64>,
    pub symbol_rate_hz: f64,
}

impl ChannelRealization {
    /// A transparent channel: `T = 1`, zero phase, zero offset.
    pub fn identity(len: usize, symbol_rate_hz: f64) -> Self {
        ChannelRealization {
            transmittance: vec![1.0; len],
            phase: vec![0.0; len],
            freq_offset: vec![0.0; len],
            symbol_rate_hz,
        }
    }

    /// Constant transmittance, phase and offset.
    pub fn constant(len: usize, symbol_rate_hz: f64, t: f64, phase: f64, offset_hz: f64) -> Self {
        ChannelRealization {
            transmittance: vec![t; len],
            phase: vec![phase; len],
            freq_offset: vec![offset_hz; len],
            symbol_rate_hz,
        }
    }

    pub fn len(&self) -> usize {
        self.transmittance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transmittance.is_empty()
    }

    /// Total rotation per symbol: `θ_k + 2π Σ_{i<k} f_i / F_s`.
    pub fn total_phase(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let step = std::f64::consts::TAU / self.symbol_rate_hz;
        self.phase
            .iter()
            .zip(&self.freq_offset)
            .map(|(&theta, &f)| {
                let phi = theta + acc;
                acc += step * f;
                phi
            })
            .collect()
    }

    fn check(&self) -> Result<()> {
        let n = self.transmittance.len();
        for (what, len) in [
            ("phase", self.phase.len()),
            ("freq_offset", self.freq_offset.len()),
        ] {
            if len != n {
                return Err(Error::LengthMismatch {
                    what,
                    left: n,
                    right: len,
                });
            }
        }
        if let Some(&t) = self
            .transmittance
            .iter()
            .find(|t| !(**t > 0.0 && **t <= 1.0))
        {
            return Err(Error::domain("transmittance", t, "must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower_db: f64,
    pub probability: f64,
}

/// Transmittance distribution on bins `(lower, lower + width]` in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmittanceHistogram {
    pub bin_width_db: f64,
    pub bins: Vec<HistogramBin>,
    /// Frames that fell outside the binned range.
    #[serde(default)]
    pub excluded: usize,
}

impl TransmittanceHistogram {
    pub fn validate(&self) -> Result<()> {
        if !(self.bin_width_db > 0.0) {
            return Err(Error::domain(
                "bin_width_db",
                self.bin_width_db,
                "must be > 0",
            ));
        }
        if self.bins.is_empty() {
            return Err(Error::EmptyRequest("histogram has no bins"));
        }
        let mut sum = 0.0;
        for b in &self.bins {
            if !(b.probability >= 0.0) || !b.lower_db.is_finite() {
                return Err(Error::domain(
                    "bin probability",
                    b.probability,
                    "must be >= 0",
                ));
            }
            sum += b.probability;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::domain(
                "histogram probability sum",
                sum,
                "must equal 1",
            ));
        }
        Ok(())
    }

    /// Draws a bin by probability, then a level uniformly inside it.
    pub fn sample_db<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = self.bins[self.bins.len() - 1];
        for b in &self.bins {
            acc += b.probability;
            if u < acc {
                chosen = *b;
                break;
            }
        }
        let v: f64 = rng.random();
        chosen.lower_db + self.bin_width_db * (1.0 - v)
    }

    /// Serializes as one `bin_lower_dB,probability` line per bin.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for b in &self.bins {
            let _ = writeln!(s, "{},{}", b.lower_db, b.probability);
        }
        s
    }

    pub fn from_text(text: &str, bin_width_db: f64) -> Result<Self> {
        let mut bins = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse = |field: Option<&str>| -> Result<f64> {
                field
                    .and_then(|f| f.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::Format(format!("histogram line {}: {line:?}", i + 1)))
            };
            let mut parts = line.split(',');
            let lower_db = parse(parts.next())?;
            let probability = parse(parts.next())?;
            if parts.next().is_some() {
                return Err(Error::Format(format!(
                    "histogram line {}: extra fields",
                    i + 1
                )));
            }
            bins.push(HistogramBin {
                lower_db,
                probability,
            });
        }
        let h = TransmittanceHistogram {
            bin_width_db,
            bins,
            excluded: 0,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn read(path: &Path, bin_width_db: f64) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?, bin_width_db)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TurbulenceModel {
    Static { mean_db: f64 },
    LogNormal { mean_db: f64, sigma_db: f64 },
    Histogram(TransmittanceHistogram),
}

impl TurbulenceModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            TurbulenceModel::Static { mean_db } => check_level(*mean_db),
            TurbulenceModel::LogNormal { mean_db, sigma_db } => {
                check_level(*mean_db)?;
                check_non_negative("sigma_db", *sigma_db)
            }
            TurbulenceModel::Histogram(h) => h.validate(),
        }
    }

    /// Draws one frame-level transmittance in dB.
    pub fn sample_level_db<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            TurbulenceModel::Static { mean_db } => *mean_db,
            TurbulenceModel::LogNormal { mean_db, sigma_db } => mean_db + sigma_db * gauss(rng),
            TurbulenceModel::Histogram(h) => h.sample_db(rng),
        }
    }

    fn is_static(&self) -> bool {
        matches!(self, TurbulenceModel::Static { .. })
    }
}

fn check_level(db: f64) -> Result<()> {
    if db.is_finite() && db <= 0.0 {
        Ok(())
    } else {
        Err(Error::domain("mean_db", db, "must be finite and <= 0 dB"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub turbulence: TurbulenceModel,
    /// Combined linewidth of the transmitter laser and Bob's LO, Hz.
    pub linewidth_hz: f64,
    pub freq_offset_hz: f64,
    /// Linear frequency drift within a frame, Hz/s.
    pub freq_drift_hz_per_s: f64,
    /// Range of the intra-frame transmittance drift magnitude, dB.
    /// Ignored for the static model.
    pub drift_db: (f64, f64),
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        self.turbulence.validate()?;
        check_non_negative("linewidth_hz", self.linewidth_hz)?;
        if !self.freq_offset_hz.is_finite() || !self.freq_drift_hz_per_s.is_finite() {
            return Err(Error::domain(
                "freq_offset_hz",
                self.freq_offset_hz,
                "must be finite",
            ));
        }
        let (lo, hi) = self.drift_db;
        if !(0.0 <= lo && lo <= hi && hi < 1.0) {
            return Err(Error::domain("drift_db", hi, "need 0 <= min <= max < 1 dB"));
        }
        Ok(())
    }
}

/// Generates the channel state for one frame.
///
/// Non-static models draw a frame level and a linear drift whose total
/// excursion is uniform in `drift_db` with a random sign, centered on the
/// frame level. The phase is a Wiener process with per-symbol increment
/// variance `2π·linewidth/F_s`, starting from a uniform random angle.
pub fn sample_channel<R: Rng + ?Sized>(
    params: &ChannelParams,
    symbol_rate_hz: f64,
    frame_len: usize,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if frame_len == 0 {
        return Err(Error::EmptyRequest("channel frame length is zero"));
    }
    if !(symbol_rate_hz > 0.0) {
        return Err(Error::domain(
            "symbol_rate_hz",
            symbol_rate_hz,
            "must be > 0",
        ));
    }
    params.validate()?;

    let level = params.turbulence.sample_level_db(rng);
    let drift = if params.turbulence.is_static() {
        0.0
    } else {
        let (lo, hi) = params.drift_db;
        let mag = lo + (hi - lo) * rng.random::<f64>();
        if rng.random::<bool>() {
            mag
        } else {
            -mag
        }
    };
    let span = (frame_len.max(2) - 1) as f64;
    let transmittance = (0..frame_len)
        .map(|k| from_db(level + drift * (k as f64 / span - 0.5)).min(1.0))
        .collect();

    let sigma = (std::f64::consts::TAU * params.linewidth_hz / symbol_rate_hz).sqrt();
    let mut theta = std::f64::consts::TAU * rng.random::<f64>();
    let mut phase = Vec::with_capacity(frame_len);
    for _ in 0..frame_len {
        phase.push(theta);
        theta += sigma * gauss(rng);
    }

    let freq_offset = (0..frame_len)
        .map(|k| params.freq_offset_hz + params.freq_drift_hz_per_s * k as f64 / symbol_rate_hz)
        .collect();

    Ok(ChannelRealization {
        transmittance,
        phase,
        freq_offset,
        symbol_rate_hz,
    })
}

/// What the channel delivers to Bob's detector.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOutput {
    /// `√T e^{jφ} s + √(1−T) v`.
    pub quantum: Vec<QuadraturePair>,
    /// `√T e^{jφ} · pilot_amp`, classical.
    pub pilot: Vec<Complex64>,
    /// `√T s + √(1−T) v` before the carrier rotation.
    pub envelope: Vec<QuadraturePair>,
}

/// Applies loss with vacuum admixture and the carrier rotation.
pub fn apply_channel<R: Rng + ?Sized>(
    signal: &[QuadraturePair],
    pilot_amp: f64,
    real: &ChannelRealization,
    rng: &mut R,
) -> Result<ChannelOutput> {
    real.check()?;
    if signal.len() != real.len() {
        return Err(Error::LengthMismatch {
            what: "signal vs channel realization",
            left: signal.len(),
            right: real.len(),
        });
    }
    let phi = real.total_phase();
    let mut quantum = Vec::with_capacity(signal.len());
    let mut pilot = Vec::with_capacity(signal.len());
    let mut envelope = Vec::with_capacity(signal.len());
    for ((&s, &t), &ph) in signal.iter().zip(&real.transmittance).zip(&phi) {
        let env = if t == 1.0 {
            s
        } else {
            s * t.sqrt() + QuadraturePair::vacuum(rng) * (1.0 - t).sqrt()
        };
        envelope.push(env);
        quantum.push(env.rotate(ph));
        pilot.push(Complex64::from_polar(t.sqrt() * pilot_amp, ph));
    }
    Ok(ChannelOutput {
        quantum,
        pilot,
        envelope,
    })
}

/// Adds Gaussian excess noise of variance `eps` per quadrature.
pub fn add_excess_noise<R: Rng + ?Sized>(
    signal: &mut [QuadraturePair],
    eps: f64,
    rng: &mut R,
) -> Result<()> {
    check_non_negative("excess noise", eps)?;
    if eps == 0.0 {
        return Ok(());
    }
    let s = eps.sqrt();
    for q in signal {
        q.x += s * gauss(rng);
        q.p += s * gauss(rng);
    }
    Ok(())
}

/// Fading-induced excess noise `Var(√η)·(v − 1)`, with the population
/// variance taken over the given transmittance samples. `v` is the total
/// quadrature variance of the state entering the channel.
pub fn fading_noise(transmittances: &[f64], v: f64) -> Result<f64> {
    if transmittances.is_empty() {
        return Err(Error::EmptyRequest(
            "fading_noise needs transmittance samples",
        ));
    }
    check_non_negative("V_A", v)?;
    let roots: Vec<f64> = transmittances.iter().map(|t| t.sqrt()).collect();
    Ok(variance(&roots) * (v - 1.0))
}

/// Bins frame-mean transmittances on `(lo + i·w, lo + (i+1)·w]` over
/// `(lo, hi]`. Frames outside the range are dropped and counted.
pub fn transmittance_histogram(
    frame_means_db: &[f64],
    bin_width_db: f64,
    range: (f64, f64),
) -> Result<TransmittanceHistogram> {
    if frame_means_db.is_empty() {
        return Err(Error::EmptyRequest("no frame transmittances to bin"));
    }
    if !(bin_width_db > 0.0) {
        return Err(Error::domain("bin_width_db", bin_width_db, "must be > 0"));
    }
    let (lo, hi) = range;
    if !(hi > lo) {
        return Err(Error::domain(
            "histogram range",
            hi - lo,
            "upper must exceed lower",
        ));
    }
    let nbins = ((hi - lo) / bin_width_db - 1e-9).ceil().max(1.0) as usize;
    let mut counts = vec![0usize; nbins];
    let mut excluded = 0;
    for &x in frame_means_db {
        match bin_index(x, lo, hi, bin_width_db, nbins) {
            Some(i) => counts[i] += 1,
            None => excluded += 1,
        }
    }
    let kept = frame_means_db.len() - excluded;
    if kept == 0 {
        return Err(Error::Degenerate(format!(
            "all {excluded} frames fall outside ({lo}, {hi}] dB"
        )));
    }
    let bins = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| HistogramBin {
            lower_db: lo + i as f64 * bin_width_db,
            probability: c as f64 / kept as f64,
        })
        .collect();
    Ok(TransmittanceHistogram {
        bin_width_db,
        bins,
        excluded,
    })
}

/// Index of the half-open-below bin `(lower, upper]` containing `x`.
pub(crate) fn bin_index(x: f64, lo: f64, hi: f64, width: f64, nbins: usize) -> Option<usize> {
    if !(x > lo && x <= hi) {
        return None;
    }
    let i = ((x - lo) / width).ceil() as usize;
    Some(i.clamp(1, nbins) - 1)
}
