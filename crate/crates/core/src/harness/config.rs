//! Experiment configuration.
//!
//! Every section has defaults, so an empty file is a valid configuration
//! describing the reference operating point (static −23.4 dB link, 20 GBd,
//! `η₀ = 0.0299`, `η₁ = η₃ = 0.01`). Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, HistogramBin, TransmittanceHistogram, TurbulenceModel};
use crate::error::{Error, Result};
use crate::optics::DetectorParams;
use crate::receiver::{PilotFilter, ReceiverParams};
use crate::security::{Ablation, SecurityConfig};
use crate::transmitter::TransmitterParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub source: SourceSection,
    pub transmitter: TransmitterSection,
    pub channel: ChannelSection,
    pub receiver: ReceiverSection,
    pub security: SecuritySection,
    pub run: RunSection,
    pub report: ReportSection,
    /// Directory that relative paths in the file are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceSection {
    /// Mean photon number of the filtered thermal mode.
    pub n0: f64,
    /// Master seed for every random stream.
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub efficiency: f64,
    pub electronic_noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransmitterSection {
    pub eta0: f64,
    pub eta1: f64,
    pub eta3: f64,
    pub beacon_amplitude: f64,
    pub alice_detector: DetectorSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TurbulenceSection {
    Static {
        mean_db: f64,
    },
    LogNormal {
        mean_db: f64,
        sigma_db: f64,
    },
    /// Inline `[[lower_db, probability], ...]` pairs or a text file of
    /// `lower_db,probability` lines.
    Histogram {
        bin_width_db: f64,
        #[serde(default)]
        bins: Vec<[f64; 2]>,
        #[serde(default)]
        file: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub turbulence: TurbulenceSection,
    pub linewidth_hz: f64,
    pub freq_offset_hz: f64,
    pub freq_drift_hz_per_s: f64,
    pub drift_db: [f64; 2],
    /// Gaussian excess noise added at the channel input, SNU.
    pub excess_noise: f64,
    /// Largest frame delay drawn per frame, symbols.
    pub max_delay_symbols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReceiverSection {
    pub bob_detector: DetectorSection,
    pub samples_per_symbol: usize,
    pub pilot_guard_hz: f64,
    /// Pilot filter width; `f_m / 1000` when absent.
    pub pilot_bandwidth_hz: Option<f64>,
    /// Moving-average length for the phase rotor, samples.
    pub phase_window: usize,
    /// Moving-average length for the transmittance trajectory, samples.
    pub transmittance_window: usize,
    pub raw_gain: f64,
    /// Share of each frame disclosed for synchronization.
    pub sync_fraction: f64,
    pub sync_min_symbols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SecuritySection {
    pub beta: f64,
    pub fer: f64,
    pub f_m_hz: f64,
    pub detector_trusted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub frames: usize,
    pub symbols_per_frame: usize,
    pub output_dir: Option<PathBuf>,
    /// Rerun every frame with the frequency offset and the phase noise
    /// switched off to split the excess noise.
    pub ablations: bool,
    pub calibration_symbols: usize,
    /// Existing calibration record; a fresh one is measured when absent.
    pub calibration: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    pub bin_width_db: f64,
    /// Transmittance range `(lo, hi]` for the key-rate bins, dB.
    pub range_db: [f64; 2],
    pub spectrum_bins: usize,
    /// Frames whose transmittance trajectory is written out.
    pub trace_frames: usize,
    /// Points per written trajectory.
    pub trace_points: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            source: SourceSection::default(),
            transmitter: TransmitterSection::default(),
            channel: ChannelSection::default(),
            receiver: ReceiverSection::default(),
            security: SecuritySection::default(),
            run: RunSection::default(),
            report: ReportSection::default(),
            base_dir: PathBuf::new(),
        }
    }
}

impl Default for SourceSection {
    fn default() -> Self {
        // Puts a modulation variance of 2.973 SNU on the channel.
        SourceSection {
            n0: 4971.07,
            seed: 7,
        }
    }
}

impl Default for TransmitterSection {
    fn default() -> Self {
        TransmitterSection {
            eta0: 0.0299,
            eta1: 0.01,
            eta3: 0.01,
            beacon_amplitude: 1.0e4,
            alice_detector: DetectorSection {
                efficiency: 0.56,
                electronic_noise: 0.34,
            },
        }
    }
}

impl Default for ChannelSection {
    fn default() -> Self {
        ChannelSection {
            turbulence: TurbulenceSection::Static { mean_db: -23.4 },
            linewidth_hz: 100.0,
            freq_offset_hz: 1.1e9,
            freq_drift_hz_per_s: 0.0,
            drift_db: [0.9, 0.99],
            excess_noise: 0.0378,
            max_delay_symbols: 64,
        }
    }
}

impl Default for ReceiverSection {
    fn default() -> Self {
        ReceiverSection {
            bob_detector: DetectorSection {
                efficiency: 0.56,
                electronic_noise: 0.38,
            },
            samples_per_symbol: 2,
            pilot_guard_hz: 15e9,
            pilot_bandwidth_hz: None,
            phase_window: 64,
            transmittance_window: 1024,
            raw_gain: 1.0,
            sync_fraction: 0.01,
            sync_min_symbols: 20_000,
        }
    }
}

impl Default for SecuritySection {
    fn default() -> Self {
        SecuritySection {
            beta: 0.96,
            fer: 0.3,
            f_m_hz: 20e9,
            detector_trusted: true,
        }
    }
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            frames: 100,
            symbols_per_frame: 100_000,
            output_dir: None,
            ablations: true,
            calibration_symbols: 1_000_000,
            calibration: None,
        }
    }
}

impl Default for ReportSection {
    fn default() -> Self {
        ReportSection {
            bin_width_db: 1.0,
            range_db: [-24.0, -16.0],
            spectrum_bins: 512,
            trace_frames: 4,
            trace_points: 256,
        }
    }
}

fn at<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config { .. } => e,
        other => Error::config(path, other.to_string()),
    })
}

fn require(path: &str, ok: bool, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(path, message))
    }
}

impl DetectorSection {
    pub fn params(&self) -> Result<DetectorParams> {
        DetectorParams::new(self.efficiency, self.electronic_noise)
    }
}

impl ExperimentConfig {
    /// Parses TOML text; relative paths resolve against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let value: toml::Value = toml::from_str(text)
            .map_err(|e| Error::config("<document>", e.message().to_string()))?;
        Self::from_value(value, base_dir)
    }

    pub fn from_value(value: toml::Value, base_dir: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&text, &base)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn to_value(&self) -> toml::Value {
        toml::Value::try_from(self).expect("config serializes")
    }

    /// Checks every field, reporting the first failure with its path.
    pub fn validate(&self) -> Result<()> {
        require(
            "source.n0",
            self.source.n0 >= 0.0 && self.source.n0.is_finite(),
            "must be finite and >= 0",
        )?;
        at(
            "transmitter.alice_detector",
            self.transmitter.alice_detector.params(),
        )?;
        at(
            "transmitter",
            self.transmitter_params().and_then(|p| p.validate()),
        )?;
        at(
            "channel",
            self.channel_params(Ablation::Baseline)
                .and_then(|p| p.validate()),
        )?;
        require(
            "channel.excess_noise",
            self.channel.excess_noise >= 0.0 && self.channel.excess_noise.is_finite(),
            "must be finite and >= 0",
        )?;
        at("receiver.bob_detector", self.receiver.bob_detector.params())?;
        at(
            "receiver",
            self.receiver_params()
                .and_then(|r| r.validate(self.security.f_m_hz)),
        )?;
        if let Some(b) = self.receiver.pilot_bandwidth_hz {
            require(
                "receiver.pilot_bandwidth_hz",
                b > 0.0 && b < self.security.f_m_hz,
                "must lie in (0, f_m_hz)",
            )?;
        }
        require(
            "receiver.phase_window",
            self.receiver.phase_window >= 1,
            "must be >= 1",
        )?;
        require(
            "receiver.transmittance_window",
            self.receiver.transmittance_window >= 1,
            "must be >= 1",
        )?;
        require(
            "receiver.sync_fraction",
            self.receiver.sync_fraction > 0.0 && self.receiver.sync_fraction <= 1.0,
            "must lie in (0, 1]",
        )?;
        at(
            "security",
            self.security_config().and_then(|c| c.validate()),
        )?;
        if self.run.frames > 0 {
            require(
                "run.symbols_per_frame",
                self.run.symbols_per_frame > self.channel.max_delay_symbols + 1,
                "must exceed channel.max_delay_symbols + 1",
            )?;
        }
        require(
            "run.calibration_symbols",
            self.run.calibration_symbols >= 2,
            "must be >= 2",
        )?;
        let [lo, hi] = self.report.range_db;
        require(
            "report.range_db",
            hi > lo,
            "upper bound must exceed lower bound",
        )?;
        require(
            "report.bin_width_db",
            self.report.bin_width_db > 0.0,
            "must be > 0",
        )?;
        Ok(())
    }

    pub fn symbol_rate_hz(&self) -> f64 {
        self.security.f_m_hz
    }

    pub fn transmitter_params(&self) -> Result<TransmitterParams> {
        let t = &self.transmitter;
        Ok(TransmitterParams {
            eta0: t.eta0,
            eta1: t.eta1,
            eta3: t.eta3,
            alice_det: t.alice_detector.params()?,
            n0: self.source.n0,
            beacon_amplitude: t.beacon_amplitude,
        })
    }

    pub fn turbulence_model(&self) -> Result<TurbulenceModel> {
        let model = match &self.channel.turbulence {
            TurbulenceSection::Static { mean_db } => TurbulenceModel::Static { mean_db: *mean_db },
            TurbulenceSection::LogNormal { mean_db, sigma_db } => TurbulenceModel::LogNormal {
                mean_db: *mean_db,
                sigma_db: *sigma_db,
            },
            TurbulenceSection::Histogram {
                bin_width_db,
                bins,
                file,
            } => {
                let hist = match (file, bins.is_empty()) {
                    (Some(f), true) => {
                        TransmittanceHistogram::read(&self.base_dir.join(f), *bin_width_db)
                            .map_err(|e| Error::config("channel.turbulence.file", e.to_string()))?
                    }
                    (None, false) => TransmittanceHistogram {
                        bin_width_db: *bin_width_db,
                        bins: bins
                            .iter()
                            .map(|&[lower_db, probability]| HistogramBin {
                                lower_db,
                                probability,
                            })
                            .collect(),
                        excluded: 0,
                    },
                    _ => {
                        return Err(Error::config(
                            "channel.turbulence",
                            "give exactly one of `bins` and `file`",
                        ))
                    }
                };
                TurbulenceModel::Histogram(hist)
            }
        };
        at("channel.turbulence", model.validate())?;
        Ok(model)
    }

    /// Channel parameters with the impairment named by `ablation` removed.
    pub fn channel_params(&self, ablation: Ablation) -> Result<ChannelParams> {
        let c = &self.channel;
        let mut p = ChannelParams {
            turbulence: self.turbulence_model()?,
            linewidth_hz: c.linewidth_hz,
            freq_offset_hz: c.freq_offset_hz,
            freq_drift_hz_per_s: c.freq_drift_hz_per_s,
            drift_db: (c.drift_db[0], c.drift_db[1]),
        };
        match ablation {
            Ablation::Baseline => {}
            Ablation::NoFrequencyOffset => {
                p.freq_offset_hz = 0.0;
                p.freq_drift_hz_per_s = 0.0;
            }
            Ablation::NoPhaseNoise => p.linewidth_hz = 0.0,
        }
        Ok(p)
    }

    pub fn receiver_params(&self) -> Result<ReceiverParams> {
        let r = &self.receiver;
        Ok(ReceiverParams {
            det: r.bob_detector.params()?,
            samples_per_symbol: r.samples_per_symbol,
            pilot_guard_hz: r.pilot_guard_hz,
            raw_gain: r.raw_gain,
        })
    }

    pub fn pilot_filter(&self) -> PilotFilter {
        PilotFilter {
            guard_hz: self.receiver.pilot_guard_hz,
            bandwidth_hz: self
                .receiver
                .pilot_bandwidth_hz
                .unwrap_or(self.security.f_m_hz / 1000.0),
            search: None,
        }
    }

    pub fn security_config(&self) -> Result<SecurityConfig> {
        let s = &self.security;
        Ok(SecurityConfig {
            beta: s.beta,
            fer: s.fer,
            f_m_hz: s.f_m_hz,
            detector_trusted: s.detector_trusted,
            bob_det: self.receiver.bob_detector.params()?,
        })
    }

    /// Copy with a histogram file replaced by its inline bins, so the
    /// result does not depend on `base_dir`.
    pub fn resolved(&self) -> Result<Self> {
        let mut out = self.clone();
        if let TurbulenceSection::Histogram { file: Some(_), .. } = &self.channel.turbulence {
            if let TurbulenceModel::Histogram(h) = self.turbulence_model()? {
                out.channel.turbulence = TurbulenceSection::Histogram {
                    bin_width_db: h.bin_width_db,
                    bins: h.bins.iter().map(|b| [b.lower_db, b.probability]).collect(),
                    file: None,
                };
            }
        }
        Ok(out)
    }

    /// Symbols disclosed for synchronization in each frame.
    pub fn sync_block(&self) -> usize {
        let n = self.run.symbols_per_frame;
        let want = ((n as f64 * self.receiver.sync_fraction).ceil() as usize)
            .max(self.receiver.sync_min_symbols);
        want.min(n.saturating_sub(self.channel.max_delay_symbols))
    }

    /// Nominal mean transmittance in dB: the configured mean, or the
    /// probability-weighted bin center for histograms.
    pub fn nominal_transmittance_db(&self) -> Result<f64> {
        Ok(match self.turbulence_model()? {
            TurbulenceModel::Static { mean_db } | TurbulenceModel::LogNormal { mean_db, .. } => {
                mean_db
            }
            TurbulenceModel::Histogram(h) => {
                let total: f64 = h.bins.iter().map(|b| b.probability).sum();
                h.bins
                    .iter()
                    .map(|b| b.probability * (b.lower_db + h.bin_width_db / 2.0))
                    .sum::<f64>()
                    / total
            }
        })
    }
}
