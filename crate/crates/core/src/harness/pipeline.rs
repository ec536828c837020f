//! Frame-by-frame simulation and analysis.
//!
//! Frame `k` draws from its own random streams, so results do not depend on
//! how frames are spread over workers. Ablation reruns reuse the baseline
//! streams with one impairment switched off.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    add_excess_noise, apply_channel, fading_noise, sample_channel, ChannelRealization,
};
use crate::error::{Error, Result};
use crate::optics::{DetectorParams, QuadraturePair};
use crate::receiver::{
    bob_detect, calibrate_shot_noise, compensate, electronic_floor_trace, estimate_transmittance,
    extract_pilot, frame_synchronize_pairs, normalize_pilot, pilot_power, power_spectrum,
    vacuum_trace, BasebandTrace, CalibrationRecord, PilotFilter,
};
use crate::rng::{SeedTree, Stream};
use crate::security::{estimate_channel_params, key_rate, Ablation, SecurityConfig};
use crate::stats::{mean, to_db};
use crate::trace_io::{load_trace, save_trace};
use crate::transmitter::{
    alice_station, effective_modulation_variance, epsilon_psp, optimal_estimator_alpha,
    TransmitterParams,
};

use super::config::ExperimentConfig;

/// Frame index reserved for the calibration streams.
pub const CALIBRATION_FRAME: u64 = 1 << 40;

/// Quantities derived from one frame by the receiver chain and the
/// security analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DspRecord {
    pub beat_freq_hz: f64,
    pub pilot_peak_ratio: f64,
    pub sync_lag: usize,
    pub sync_peak: f64,
    /// Mean pilot-derived transmittance, dB.
    pub t_pilot_db: f64,
    /// Max minus min of the pilot-derived trajectory, dB.
    pub t_pilot_spread_db: f64,
    /// Fading noise from the normalized pilot trajectory, SNU.
    pub eps_fad: f64,
    pub n_pairs: usize,
    pub v_a: f64,
    pub t_hat: f64,
    pub eps_raw: f64,
    pub eps_hat: f64,
    pub i_ab: f64,
    pub holevo: f64,
    pub skr_bps: f64,
}

/// Simulator ground truth and model predictions for one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub t_true_db: f64,
    pub delay_symbols: usize,
    pub eps_raw_no_freq: Option<f64>,
    pub eps_raw_no_phase: Option<f64>,
    pub eps_model: f64,
    pub skr_model_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame: usize,
    pub dsp: DspRecord,
    pub truth: Option<TruthRecord>,
}

/// Power spectra of one frame as `(frequency, power)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSpectra {
    pub alice_detected: Vec<(f64, f64)>,
    pub bob_detected: Vec<(f64, f64)>,
    pub bob_recovered: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameAnalysis {
    pub record: DspRecord,
    /// Pilot-derived transmittance, one value per symbol.
    pub trajectory: Vec<f64>,
    /// Bob's compensated symbols, SNU.
    pub recovered: Vec<QuadraturePair>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; 0 picks one per core.
    pub workers: usize,
    /// Write every frame's Alice data and Bob trace here.
    pub trace_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<FrameRecord>,
    /// `(frame, trajectory)` for the first `report.trace_frames` frames.
    pub trajectories: Vec<(usize, Vec<f64>)>,
    pub spectra: Option<FrameSpectra>,
}

/// Model quantities fixed by the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint {
    /// `η₀·n₀`.
    pub v_a_equivalent: f64,
    /// Variance of Alice's estimate of the sent quadrature.
    pub v_mod: f64,
    pub eps_psp: f64,
    pub t_nominal_db: f64,
    /// Expected fading noise of the configured drift range.
    pub eps_fad: f64,
    pub eps_model: f64,
    pub skr_model_bps: f64,
}

/// Expected fading noise for a linear dB drift across the frame whose
/// magnitude is uniform on `drift_db`.
pub fn expected_fading_noise(drift_db: (f64, f64), v_mod: f64) -> f64 {
    let (lo, hi) = drift_db;
    let mean_sq = (lo * lo + lo * hi + hi * hi) / 3.0;
    let k = std::f64::consts::LN_10 / 20.0;
    k * k * mean_sq / 12.0 * v_mod
}

pub fn model_point(cfg: &ExperimentConfig) -> Result<ModelPoint> {
    let tx = cfg.transmitter_params()?;
    let v_a_equivalent = tx.equivalent_modulation_variance();
    let eps_psp = epsilon_psp(&tx, v_a_equivalent)?;
    let v_mod = effective_modulation_variance(&tx);
    let t_nominal_db = cfg.nominal_transmittance_db()?;
    let eps_fad = match cfg.channel.turbulence {
        super::config::TurbulenceSection::Static { .. } => 0.0,
        _ => expected_fading_noise((cfg.channel.drift_db[0], cfg.channel.drift_db[1]), v_mod),
    };
    let eps_model = eps_psp + cfg.channel.excess_noise + eps_fad;
    let t = 10f64.powf(t_nominal_db / 10.0);
    let skr_model_bps = key_rate(v_mod, t, eps_model, &cfg.security_config()?)?.skr_bps;
    Ok(ModelPoint {
        v_a_equivalent,
        v_mod,
        eps_psp,
        t_nominal_db,
        eps_fad,
        eps_model,
        skr_model_bps,
    })
}

fn normalized_fading(ts: &[f64], v: f64) -> Result<f64> {
    let m = ts.iter().map(|t| t.sqrt()).sum::<f64>() / ts.len() as f64;
    if !(m > 0.0) {
        return Err(Error::EstimationDegenerate(
            "transmittance trajectory is zero".into(),
        ));
    }
    let norm: Vec<f64> = ts.iter().map(|t| t / (m * m)).collect();
    fading_noise(&norm, v)
}

fn to_complex(qs: &[QuadraturePair]) -> Vec<Complex64> {
    qs.iter().map(|q| q.to_complex()).collect()
}

/// Receiver chain plus security analysis on one frame.
///
/// `alice` holds Alice's estimates of the sent quadratures, SNU.
pub fn analyze_frame(
    cfg: &ExperimentConfig,
    cal: &CalibrationRecord,
    trace: &BasebandTrace,
    alice: &[QuadraturePair],
) -> Result<FrameAnalysis> {
    cal.validate()?;
    trace.validate()?;
    let sps = trace.samples_per_symbol()?;
    let pilot = extract_pilot(trace, &cfg.pilot_filter())?;
    let t_samples = estimate_transmittance(&pilot, Some(cal), cfg.receiver.transmittance_window)?;
    let pilot = normalize_pilot(pilot, cfg.receiver.phase_window)?;
    let inv = 1.0 / cal.sigma_cal;
    let recovered: Vec<QuadraturePair> = compensate(trace, &pilot)?
        .into_iter()
        .map(|q| q * inv)
        .collect();

    let n = recovered.len().min(alice.len());
    let block = cfg.sync_block().min(n);
    let sync = frame_synchronize_pairs(
        &alice[..block],
        &recovered[..n],
        cfg.channel.max_delay_symbols,
    )?;
    let lag = sync.lag;
    let det = DetectorParams {
        efficiency: cfg.receiver.bob_detector.efficiency,
        electronic_noise: cal.electronic_noise_snu,
    };
    let est = estimate_channel_params(&alice[..n - lag], &recovered[lag..n], &det)?;
    let sec = SecurityConfig {
        bob_det: det,
        ..cfg.security_config()?
    };
    let rate = key_rate(est.v_a, est.t_hat, est.epsilon_hat, &sec)?;

    let trajectory: Vec<f64> = t_samples.iter().step_by(sps).copied().collect();
    let (lo, hi) = trajectory
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| {
            (a.min(t), b.max(t))
        });
    let eps_fad = normalized_fading(&trajectory, est.v_a + 1.0)?;

    Ok(FrameAnalysis {
        record: DspRecord {
            beat_freq_hz: pilot.beat_freq_hz,
            pilot_peak_ratio: pilot.peak_ratio,
            sync_lag: lag,
            sync_peak: sync.peak,
            t_pilot_db: to_db(mean(&trajectory)),
            t_pilot_spread_db: to_db(hi) - to_db(lo),
            eps_fad,
            n_pairs: est.n_pairs,
            v_a: est.v_a,
            t_hat: est.t_hat,
            eps_raw: est.epsilon_raw,
            eps_hat: est.epsilon_hat,
            i_ab: rate.i_ab,
            holevo: rate.holevo,
            skr_bps: rate.skr_bps,
        },
        trajectory,
        recovered,
    })
}

struct Plan<'a> {
    cfg: &'a ExperimentConfig,
    cal: &'a CalibrationRecord,
    seeds: SeedTree,
    tx: TransmitterParams,
    alpha: f64,
    model: ModelPoint,
}

struct Transmitted {
    sent: Vec<QuadraturePair>,
    alice: Vec<QuadraturePair>,
    pilot_amp: f64,
}

impl Plan<'_> {
    fn transmit(&self, frame: u64) -> Result<Transmitted> {
        let n = self.cfg.run.symbols_per_frame;
        let out = alice_station(&self.tx, n, &mut self.seeds.stream(frame, Stream::Source))?;
        let mut sent = out.channel_bound;
        add_excess_noise(
            &mut sent,
            self.cfg.channel.excess_noise,
            &mut self.seeds.stream(frame, Stream::ExcessNoise),
        )?;
        let alice = out.alice_measured.iter().map(|q| *q * self.alpha).collect();
        Ok(Transmitted {
            sent,
            alice,
            pilot_amp: out.pilot_amplitude_sent,
        })
    }

    /// Channel and detection; returns the trace, the realization and the
    /// injected frame delay.
    fn receive(
        &self,
        frame: u64,
        tx: &Transmitted,
        ablation: Ablation,
    ) -> Result<(BasebandTrace, ChannelRealization, usize)> {
        let cfg = self.cfg;
        let n = tx.sent.len();
        let mut state = self.seeds.stream(frame, Stream::ChannelState);
        let real = sample_channel(
            &cfg.channel_params(ablation)?,
            cfg.symbol_rate_hz(),
            n,
            &mut state,
        )?;
        let delay = state.random_range(0..=cfg.channel.max_delay_symbols);
        let mut vac = self.seeds.stream(frame, Stream::ChannelVacuum);
        let mut delayed: Vec<QuadraturePair> = (0..delay)
            .map(|_| QuadraturePair::vacuum(&mut vac))
            .collect();
        delayed.extend_from_slice(&tx.sent[..n - delay]);
        let out = apply_channel(&delayed, tx.pilot_amp, &real, &mut vac)?;
        let trace = bob_detect(
            &out,
            &real,
            &cfg.receiver_params()?,
            &mut self.seeds.stream(frame, Stream::BobDetector),
        )?;
        Ok((trace, real, delay))
    }

    fn frame(&self, index: usize, trace_dir: Option<&Path>) -> Result<FrameOutput> {
        let f = index as u64;
        let tx = self.transmit(f)?;
        let (trace, real, delay) = self.receive(f, &tx, Ablation::Baseline)?;
        if let Some(dir) = trace_dir {
            save_trace(
                &bob_trace_path(dir, index),
                trace.sample_rate_hz,
                &trace.samples,
            )?;
            save_trace(
                &alice_trace_path(dir, index),
                self.cfg.symbol_rate_hz(),
                &to_complex(&tx.alice),
            )?;
        }
        let analysis = analyze_frame(self.cfg, self.cal, &trace, &tx.alice)?;
        let spectra =
            (index == 0).then(|| frame_spectra(self.cfg, &trace, &tx.alice, &analysis.recovered));

        let ablated = |kind| -> Result<Option<f64>> {
            if !self.cfg.run.ablations {
                return Ok(None);
            }
            let (t, _, _) = self.receive(f, &tx, kind)?;
            Ok(Some(
                analyze_frame(self.cfg, self.cal, &t, &tx.alice)?
                    .record
                    .eps_raw,
            ))
        };
        let eps_raw_no_freq = ablated(Ablation::NoFrequencyOffset)?;
        let eps_raw_no_phase = ablated(Ablation::NoPhaseNoise)?;

        let t_true = mean(&real.transmittance);
        let eps_fad_true = normalized_fading(&real.transmittance, self.model.v_mod + 1.0)?;
        let eps_model = self.model.eps_psp + self.cfg.channel.excess_noise + eps_fad_true;
        let skr_model_bps = key_rate(
            self.model.v_mod,
            t_true,
            eps_model,
            &self.cfg.security_config()?,
        )?
        .skr_bps;

        Ok(FrameOutput {
            record: FrameRecord {
                frame: index,
                dsp: analysis.record,
                truth: Some(TruthRecord {
                    t_true_db: to_db(t_true),
                    delay_symbols: delay,
                    eps_raw_no_freq,
                    eps_raw_no_phase,
                    eps_model,
                    skr_model_bps,
                }),
            },
            trajectory: (index < self.cfg.report.trace_frames).then_some(analysis.trajectory),
            spectra,
        })
    }
}

struct FrameOutput {
    record: FrameRecord,
    trajectory: Option<Vec<f64>>,
    spectra: Option<FrameSpectra>,
}

fn frame_spectra(
    cfg: &ExperimentConfig,
    trace: &BasebandTrace,
    alice: &[QuadraturePair],
    recovered: &[QuadraturePair],
) -> FrameSpectra {
    let bins = cfg.report.spectrum_bins;
    let fs = cfg.symbol_rate_hz();
    FrameSpectra {
        alice_detected: power_spectrum(&to_complex(alice), fs, bins),
        bob_detected: power_spectrum(&trace.samples, trace.sample_rate_hz, bins),
        bob_recovered: power_spectrum(&to_complex(recovered), fs, bins),
    }
}

pub fn bob_trace_path(dir: &Path, frame: usize) -> PathBuf {
    dir.join(format!("frame_{frame:06}_bob.pspt"))
}

pub fn alice_trace_path(dir: &Path, frame: usize) -> PathBuf {
    dir.join(format!("frame_{frame:06}_alice.pspt"))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Degenerate(format!("worker pool: {e}")))
}

/// Runs `job` on every frame index and merges in frame order. The first
/// failing frame (lowest index) is reported.
fn run_frames<F>(frames: usize, workers: usize, job: F) -> Result<RunOutput>
where
    F: Fn(usize) -> Result<FrameOutput> + Sync,
{
    let results: Vec<Result<FrameOutput>> = pool(workers)?.install(|| {
        (0..frames)
            .into_par_iter()
            .map(|i| job(i).map_err(|e| e.in_frame(i)))
            .collect()
    });
    let mut out = RunOutput {
        records: Vec::with_capacity(frames),
        trajectories: Vec::new(),
        spectra: None,
    };
    for r in results {
        let f = r?;
        if let Some(t) = f.trajectory {
            out.trajectories.push((f.record.frame, t));
        }
        if f.spectra.is_some() {
            out.spectra = f.spectra;
        }
        out.records.push(f.record);
    }
    Ok(out)
}

/// Shot-noise, electronic-noise and pilot reference measurements from a
/// back-to-back (unit transmittance) simulation.
pub fn calibrate(cfg: &ExperimentConfig) -> Result<CalibrationRecord> {
    let seeds = SeedTree::new(cfg.source.seed);
    let rx = cfg.receiver_params()?;
    let fs = cfg.symbol_rate_hz();
    let n = cfg.run.calibration_symbols;
    let mut rng = seeds.stream(CALIBRATION_FRAME, Stream::Calibration);
    let vacuum = vacuum_trace(&rx, n, fs, &mut rng)?;
    let floor = electronic_floor_trace(&rx, n, fs, &mut rng)?;

    let tx = cfg.transmitter_params()?;
    let out = alice_station(&tx, n, &mut seeds.stream(CALIBRATION_FRAME, Stream::Source))?;
    let mut b2b_cfg = cfg.clone();
    b2b_cfg.channel.turbulence = super::config::TurbulenceSection::Static { mean_db: 0.0 };
    let real = sample_channel(
        &b2b_cfg.channel_params(Ablation::Baseline)?,
        fs,
        n,
        &mut seeds.stream(CALIBRATION_FRAME, Stream::ChannelState),
    )?;
    let ch = apply_channel(
        &out.channel_bound,
        out.pilot_amplitude_sent,
        &real,
        &mut seeds.stream(CALIBRATION_FRAME, Stream::ChannelVacuum),
    )?;
    let b2b = bob_detect(
        &ch,
        &real,
        &rx,
        &mut seeds.stream(CALIBRATION_FRAME, Stream::BobDetector),
    )?;
    calibrate_from_traces(&vacuum, Some(&floor), &b2b, &cfg.pilot_filter())
}

/// Calibration from recorded vacuum, electronic-floor and back-to-back
/// traces.
pub fn calibrate_from_traces(
    vacuum: &BasebandTrace,
    floor: Option<&BasebandTrace>,
    b2b: &BasebandTrace,
    filter: &PilotFilter,
) -> Result<CalibrationRecord> {
    let shot = calibrate_shot_noise(vacuum, floor)?;
    let pilot = extract_pilot(b2b, filter)?;
    let rec = CalibrationRecord {
        sigma_cal: shot.sigma_cal,
        pilot_ref_power: pilot_power(&pilot),
        electronic_noise_snu: shot.electronic_noise_snu,
    };
    rec.validate()?;
    Ok(rec)
}

/// Simulates and analyzes `run.frames` frames.
pub fn simulate(
    cfg: &ExperimentConfig,
    cal: &CalibrationRecord,
    opts: &RunOptions,
) -> Result<RunOutput> {
    cfg.validate()?;
    cal.validate()?;
    let tx = cfg.transmitter_params()?;
    let plan = Plan {
        cfg,
        cal,
        seeds: SeedTree::new(cfg.source.seed),
        alpha: optimal_estimator_alpha(&tx)?,
        tx,
        model: model_point(cfg)?,
    };
    if let Some(dir) = &opts.trace_dir {
        std::fs::create_dir_all(dir)?;
    }
    run_frames(cfg.run.frames, opts.workers, |i| {
        plan.frame(i, opts.trace_dir.as_deref())
    })
}

/// Frame indices with a Bob trace in `dir`, ascending.
pub fn list_trace_frames(dir: &Path) -> Result<Vec<usize>> {
    let mut frames = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let name = entry?.file_name();
        let name = name.to_string_lossy();
        if let Some(idx) = name
            .strip_prefix("frame_")
            .and_then(|s| s.strip_suffix("_bob.pspt"))
            .and_then(|s| s.parse::<usize>().ok())
        {
            frames.push(idx);
        }
    }
    frames.sort_unstable();
    Ok(frames)
}

/// Runs the receiver chain on recorded traces. Every Bob trace needs a
/// matching Alice file.
pub fn analyze_traces(
    cfg: &ExperimentConfig,
    cal: Option<&CalibrationRecord>,
    dir: &Path,
    opts: &RunOptions,
) -> Result<RunOutput> {
    cfg.validate()?;
    let cal = cal.ok_or(Error::CalibrationRequired)?;
    cal.validate()?;
    let frames = list_trace_frames(dir)?;
    let symbol_rate = cfg.symbol_rate_hz();
    let expected_fs = symbol_rate * cfg.receiver.samples_per_symbol as f64;
    let job = |slot: usize| -> Result<FrameOutput> {
        let index = frames[slot];
        let bob = load_trace(&bob_trace_path(dir, index))?;
        if bob.sample_rate_hz != expected_fs {
            return Err(Error::Format(format!(
                "trace sample rate {} Hz does not match the configured {} Hz",
                bob.sample_rate_hz, expected_fs
            )));
        }
        let alice_file = load_trace(&alice_trace_path(dir, index))?;
        let alice: Vec<QuadraturePair> = alice_file
            .samples
            .iter()
            .map(|z| QuadraturePair::from_complex(*z))
            .collect();
        let trace = BasebandTrace {
            samples: bob.samples,
            sample_rate_hz: bob.sample_rate_hz,
            symbol_rate_hz: symbol_rate,
        };
        let analysis = analyze_frame(cfg, cal, &trace, &alice)?;
        let spectra = (slot == 0).then(|| frame_spectra(cfg, &trace, &alice, &analysis.recovered));
        Ok(FrameOutput {
            record: FrameRecord {
                frame: index,
                dsp: analysis.record,
                truth: None,
            },
            trajectory: (slot < cfg.report.trace_frames).then_some(analysis.trajectory),
            spectra,
        })
    };
    run_frames(frames.len(), opts.workers, job)
}
