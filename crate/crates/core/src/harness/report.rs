//! Per-frame CSV, JSON summary and figure-data files.
//!
//! Floats are written with `Display`, which round-trips exactly, so every
//! aggregate in the summary can be recomputed bit-for-bit from the CSV.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::DetectorParams;
use crate::receiver::CalibrationRecord;
use crate::security::{
    assemble_noise_budget, average_estimates, key_rate, total_key_rate, Ablation, AblationRun,
    ChannelEstimate, KeyRateBin, KeyRatePoint, KeyRateReport, NoiseBudget, SecurityConfig,
};
use crate::stats::to_db;
use crate::trace_io::TRACE_VERSION;

use super::config::ExperimentConfig;
use super::pipeline::{
    model_point, DspRecord, FrameRecord, FrameSpectra, ModelPoint, RunOutput, TruthRecord,
};

pub const FRAME_COLUMNS: [&str; 23] = [
    "frame",
    "beat_freq_hz",
    "pilot_peak_ratio",
    "sync_lag",
    "sync_peak",
    "t_pilot_db",
    "t_pilot_spread_db",
    "eps_fad",
    "n_pairs",
    "v_a",
    "t_hat",
    "t_hat_db",
    "eps_raw",
    "eps_hat",
    "i_ab",
    "holevo",
    "skr_bps",
    "t_true_db",
    "delay_symbols",
    "eps_raw_no_freq",
    "eps_raw_no_phase",
    "eps_model",
    "skr_model_bps",
];

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn frames_csv(records: &[FrameRecord]) -> String {
    let mut s = FRAME_COLUMNS.join(",");
    s.push('\n');
    for r in records {
        let d = &r.dsp;
        let t = r.truth.as_ref();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.frame,
            d.beat_freq_hz,
            d.pilot_peak_ratio,
            d.sync_lag,
            d.sync_peak,
            d.t_pilot_db,
            d.t_pilot_spread_db,
            d.eps_fad,
            d.n_pairs,
            d.v_a,
            d.t_hat,
            to_db(d.t_hat),
            d.eps_raw,
            d.eps_hat,
            d.i_ab,
            d.holevo,
            d.skr_bps,
            opt(t.map(|t| t.t_true_db)),
            opt(t.map(|t| t.delay_symbols)),
            opt(t.and_then(|t| t.eps_raw_no_freq)),
            opt(t.and_then(|t| t.eps_raw_no_phase)),
            opt(t.map(|t| t.eps_model)),
            opt(t.map(|t| t.skr_model_bps)),
        );
    }
    s
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("frames csv line {line}: {msg}"))
}

/// Parses the output of [`frames_csv`].
pub fn parse_frames_csv(text: &str) -> Result<Vec<FrameRecord>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad(1, "missing header"))?;
    if header != FRAME_COLUMNS.join(",") {
        return Err(bad(1, "unexpected header"));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != FRAME_COLUMNS.len() {
            return Err(bad(n, format!("{} cells", cells.len())));
        }
        let f = |k: usize| -> Result<f64> {
            cells[k]
                .parse()
                .map_err(|e| bad(n, format!("{}: {e}", FRAME_COLUMNS[k])))
        };
        let u = |k: usize| -> Result<usize> {
            cells[k]
                .parse()
                .map_err(|e| bad(n, format!("{}: {e}", FRAME_COLUMNS[k])))
        };
        let of = |k: usize| -> Result<Option<f64>> {
            if cells[k].is_empty() {
                Ok(None)
            } else {
                f(k).map(Some)
            }
        };
        let dsp = DspRecord {
            beat_freq_hz: f(1)?,
            pilot_peak_ratio: f(2)?,
            sync_lag: u(3)?,
            sync_peak: f(4)?,
            t_pilot_db: f(5)?,
            t_pilot_spread_db: f(6)?,
            eps_fad: f(7)?,
            n_pairs: u(8)?,
            v_a: f(9)?,
            t_hat: f(10)?,
            eps_raw: f(12)?,
            eps_hat: f(13)?,
            i_ab: f(14)?,
            holevo: f(15)?,
            skr_bps: f(16)?,
        };
        let truth = if cells[17].is_empty() {
            None
        } else {
            Some(TruthRecord {
                t_true_db: f(17)?,
                delay_symbols: u(18)?,
                eps_raw_no_freq: of(19)?,
                eps_raw_no_phase: of(20)?,
                eps_model: f(21)?,
                skr_model_bps: f(22)?,
            })
        };
        out.push(FrameRecord {
            frame: u(0)?,
            dsp,
            truth,
        });
    }
    Ok(out)
}

/// Frame means over a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub frames: usize,
    pub mean_beat_freq_hz: f64,
    pub mean_t_pilot_db: f64,
    pub mean_eps_fad: f64,
    pub mean_skr_bps: f64,
    /// Estimates averaged over frames.
    pub estimate: ChannelEstimate,
    /// Key rate at the averaged estimates.
    pub rate_at_mean: KeyRatePoint,
    pub mean_t_true_db: Option<f64>,
    pub mean_eps_model: Option<f64>,
    pub mean_skr_model_bps: Option<f64>,
}

/// One transmittance bin of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSummary {
    pub lower_db: f64,
    pub upper_db: f64,
    pub frames: usize,
    pub probability: f64,
    pub mean_t_hat_db: Option<f64>,
    pub budget: Option<NoiseBudget>,
    pub v_a: Option<f64>,
    pub skr_bps: f64,
    pub skr_model_bps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub package: String,
    pub trace_format: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub command: String,
    pub versions: Versions,
    pub seed: u64,
    pub frames: usize,
    pub calibration: CalibrationRecord,
    pub model: ModelPoint,
    pub aggregate: Option<Aggregate>,
    pub noise_budget: Option<NoiseBudget>,
    pub bins: Vec<BinSummary>,
    pub key_rate: KeyRateReport,
    /// Frames whose pilot transmittance falls outside the bin range.
    pub frames_outside_bins: usize,
    pub config: ExperimentConfig,
}

fn mean_of<'a>(rs: impl Iterator<Item = &'a FrameRecord>, f: impl Fn(&FrameRecord) -> f64) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for r in rs {
        s += f(r);
        n += 1;
    }
    s / n as f64
}

fn mean_opt<'a>(rs: &[&'a FrameRecord], f: impl Fn(&TruthRecord) -> Option<f64>) -> Option<f64> {
    let vals: Option<Vec<f64>> = rs.iter().map(|r| r.truth.as_ref().and_then(&f)).collect();
    let vals = vals?;
    if vals.is_empty() {
        return None;
    }
    Some(vals.iter().sum::<f64>() / vals.len() as f64)
}

fn estimate_of(r: &FrameRecord) -> ChannelEstimate {
    ChannelEstimate {
        t_hat: r.dsp.t_hat,
        epsilon_hat: r.dsp.eps_hat,
        epsilon_raw: r.dsp.eps_raw,
        v_a: r.dsp.v_a,
        n_pairs: r.dsp.n_pairs,
        n_frames: 1,
    }
}

fn measured_security(cfg: &ExperimentConfig, cal: &CalibrationRecord) -> Result<SecurityConfig> {
    Ok(SecurityConfig {
        bob_det: DetectorParams {
            efficiency: cfg.receiver.bob_detector.efficiency,
            electronic_noise: cal.electronic_noise_snu,
        },
        ..cfg.security_config()?
    })
}

fn budget_of(rs: &[&FrameRecord], eps_psp: f64) -> Result<NoiseBudget> {
    let mut runs = vec![AblationRun {
        kind: Ablation::Baseline,
        epsilon: mean_of(rs.iter().copied(), |r| r.dsp.eps_raw),
    }];
    for (kind, pick) in [
        (
            Ablation::NoFrequencyOffset,
            (|t: &TruthRecord| t.eps_raw_no_freq) as fn(&TruthRecord) -> Option<f64>,
        ),
        (Ablation::NoPhaseNoise, |t: &TruthRecord| t.eps_raw_no_phase),
    ] {
        if let Some(epsilon) = mean_opt(rs, pick) {
            runs.push(AblationRun { kind, epsilon });
        }
    }
    assemble_noise_budget(
        &runs,
        eps_psp,
        mean_of(rs.iter().copied(), |r| r.dsp.eps_fad),
    )
}

fn aggregate(rs: &[&FrameRecord], sec: &SecurityConfig) -> Result<Option<Aggregate>> {
    let estimates: Vec<ChannelEstimate> = rs.iter().map(|r| estimate_of(r)).collect();
    let Some(estimate) = average_estimates(&estimates) else {
        return Ok(None);
    };
    let rate_at_mean = key_rate(estimate.v_a, estimate.t_hat, estimate.epsilon_hat, sec)?;
    let it = || rs.iter().copied();
    Ok(Some(Aggregate {
        frames: rs.len(),
        mean_beat_freq_hz: mean_of(it(), |r| r.dsp.beat_freq_hz),
        mean_t_pilot_db: mean_of(it(), |r| r.dsp.t_pilot_db),
        mean_eps_fad: mean_of(it(), |r| r.dsp.eps_fad),
        mean_skr_bps: mean_of(it(), |r| r.dsp.skr_bps),
        estimate,
        rate_at_mean,
        mean_t_true_db: mean_opt(rs, |t| Some(t.t_true_db)),
        mean_eps_model: mean_opt(rs, |t| Some(t.eps_model)),
        mean_skr_model_bps: mean_opt(rs, |t| Some(t.skr_model_bps)),
    }))
}

/// Bin index of `db` on `(lo + i·w, lo + (i+1)·w]`.
fn bin_of(db: f64, lo: f64, w: f64, nbins: usize) -> Option<usize> {
    if !(db > lo) {
        return None;
    }
    let i = ((db - lo) / w).ceil() as usize;
    (1..=nbins).contains(&i).then(|| i - 1)
}

/// Builds the summary from per-frame records alone.
pub fn summarize(
    command: &str,
    cfg: &ExperimentConfig,
    cal: &CalibrationRecord,
    records: &[FrameRecord],
) -> Result<RunSummary> {
    let model = model_point(cfg)?;
    let sec = measured_security(cfg, cal)?;
    let all: Vec<&FrameRecord> = records.iter().collect();
    let aggregate_all = aggregate(&all, &sec)?;
    let noise_budget = if all.is_empty() {
        None
    } else {
        Some(budget_of(&all, model.eps_psp)?)
    };

    let [lo, hi] = cfg.report.range_db;
    let w = cfg.report.bin_width_db;
    let nbins = ((hi - lo) / w - 1e-9).ceil().max(1.0) as usize;
    let mut members: Vec<Vec<&FrameRecord>> = vec![Vec::new(); nbins];
    let mut outside = 0;
    for r in records {
        match bin_of(r.dsp.t_pilot_db, lo, w, nbins) {
            Some(i) => members[i].push(r),
            None => outside += 1,
        }
    }
    let total = records.len();
    let mut bins = Vec::with_capacity(nbins);
    for (i, rs) in members.iter().enumerate() {
        let lower_db = lo + i as f64 * w;
        let upper_db = (lower_db + w).min(hi);
        let probability = if total == 0 {
            0.0
        } else {
            rs.len() as f64 / total as f64
        };
        let agg = aggregate(rs, &sec)?;
        bins.push(BinSummary {
            lower_db,
            upper_db,
            frames: rs.len(),
            probability,
            mean_t_hat_db: agg.as_ref().map(|a| to_db(a.estimate.t_hat)),
            budget: if rs.is_empty() {
                None
            } else {
                Some(budget_of(rs, model.eps_psp)?)
            },
            v_a: agg.as_ref().map(|a| a.estimate.v_a),
            skr_bps: agg.as_ref().map(|a| a.rate_at_mean.skr_bps).unwrap_or(0.0),
            skr_model_bps: agg.as_ref().and_then(|a| a.mean_skr_model_bps),
        });
    }
    let key_rate = total_key_rate(
        bins.iter()
            .map(|b| KeyRateBin {
                lower_db: b.lower_db,
                upper_db: b.upper_db,
                probability: b.probability,
                skr_bps: b.skr_bps,
            })
            .collect(),
    )?;

    Ok(RunSummary {
        command: command.to_string(),
        versions: Versions {
            package: env!("CARGO_PKG_VERSION").to_string(),
            trace_format: TRACE_VERSION,
        },
        seed: cfg.source.seed,
        frames: total,
        calibration: *cal,
        model,
        aggregate: aggregate_all,
        noise_budget,
        bins,
        key_rate,
        frames_outside_bins: outside,
        config: cfg.resolved()?,
    })
}

pub fn bins_csv(bins: &[BinSummary]) -> String {
    let mut s = String::from(
        "lower_db,upper_db,frames,probability,t_hat_db,v_a,eps_total,eps_psp,eps_freq,eps_phase,eps_fad,eps_chan,skr_bps,skr_model_bps\n",
    );
    for b in bins {
        let bud = b.budget.as_ref();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            b.lower_db,
            b.upper_db,
            b.frames,
            b.probability,
            opt(b.mean_t_hat_db),
            opt(b.v_a),
            opt(bud.map(|x| x.eps_total)),
            opt(bud.map(|x| x.eps_psp)),
            opt(bud.map(|x| x.eps_freq)),
            opt(bud.map(|x| x.eps_phase)),
            opt(bud.map(|x| x.eps_fad)),
            opt(bud.map(|x| x.eps_chan)),
            b.skr_bps,
            opt(b.skr_model_bps),
        );
    }
    s
}

pub fn spectrum_csv(sp: &FrameSpectra) -> String {
    let mut s = String::from("panel,freq_hz,power_db\n");
    for (panel, pts) in [
        ("alice_detected", &sp.alice_detected),
        ("bob_detected", &sp.bob_detected),
        ("bob_recovered", &sp.bob_recovered),
    ] {
        for (f, p) in pts.iter() {
            let _ = writeln!(s, "{panel},{f},{}", to_db(*p));
        }
    }
    s
}

/// `frame,time_s,t_db`, `points` evenly spaced samples per trajectory.
pub fn trajectory_csv(
    trajectories: &[(usize, Vec<f64>)],
    symbol_rate_hz: f64,
    points: usize,
) -> String {
    let mut s = String::from("frame,time_s,t_db\n");
    for (frame, t) in trajectories {
        if t.is_empty() {
            continue;
        }
        let step = (t.len() / points.max(1)).max(1);
        for (k, v) in t.iter().enumerate().step_by(step) {
            let _ = writeln!(s, "{frame},{},{}", k as f64 / symbol_rate_hz, to_db(*v));
        }
    }
    s
}

/// File names written into the output directory.
pub mod files {
    pub const FRAMES: &str = "frames.csv";
    pub const SUMMARY: &str = "summary.json";
    pub const BINS: &str = "bins.csv";
    pub const SPECTRUM: &str = "spectrum.csv";
    pub const TRAJECTORY: &str = "transmittance_trace.csv";
    pub const CONFIG_ECHO: &str = "config.toml";
    pub const CALIBRATION: &str = "calibration.json";
    pub const TRACES: &str = "traces";
}

/// Writes every report file and returns the summary.
pub fn write_reports(
    dir: &Path,
    command: &str,
    cfg: &ExperimentConfig,
    cal: &CalibrationRecord,
    run: &RunOutput,
) -> Result<RunSummary> {
    std::fs::create_dir_all(dir)?;
    let summary = summarize(command, cfg, cal, &run.records)?;
    std::fs::write(dir.join(files::FRAMES), frames_csv(&run.records))?;
    std::fs::write(
        dir.join(files::SUMMARY),
        serde_json::to_string_pretty(&summary).map_err(|e| Error::Format(e.to_string()))?,
    )?;
    std::fs::write(dir.join(files::BINS), bins_csv(&summary.bins))?;
    if let Some(sp) = &run.spectra {
        std::fs::write(dir.join(files::SPECTRUM), spectrum_csv(sp))?;
    }
    std::fs::write(
        dir.join(files::TRAJECTORY),
        trajectory_csv(
            &run.trajectories,
            cfg.symbol_rate_hz(),
            cfg.report.trace_points,
        ),
    )?;
    std::fs::write(
        dir.join(files::CONFIG_ECHO),
        summary.config.to_toml_string(),
    )?;
    std::fs::write(dir.join(files::CALIBRATION), cal.to_json())?;
    Ok(summary)
}

pub fn read_summary(path: &Path) -> Result<RunSummary> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("summary: {e}")))
}
