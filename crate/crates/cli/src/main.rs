use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use psp_cvqkd::harness::pipeline::{
    analyze_traces, calibrate, calibrate_from_traces, simulate, RunOptions,
};
use psp_cvqkd::harness::report::{files, write_reports, RunSummary};
use psp_cvqkd::harness::sweep::{sweep, sweep_csv, SweepAxis};
use psp_cvqkd::harness::ExperimentConfig;
use psp_cvqkd::receiver::{BasebandTrace, CalibrationRecord};
use psp_cvqkd::trace_io::load_trace;
use psp_cvqkd::{Error, Result};

/// Passive-state-preparation CV-QKD with a local oscillator: simulation,
/// trace analysis, parameter sweeps and calibration.
#[derive(Debug, Parser)]
#[command(name = "psp-cvqkd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML experiment description; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory (overrides `run.output_dir`, default `out`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Master seed (overrides `source.seed`).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    workers: usize,

    /// Write each frame's Alice data and Bob trace under `<out>/traces`.
    #[arg(long, global = true)]
    emit_traces: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate and analyze `run.frames` frames.
    Simulate {
        /// Reuse a calibration record instead of measuring one.
        #[arg(long, value_name = "PATH")]
        calibration: Option<PathBuf>,
    },
    /// Analyze recorded traces.
    Analyze {
        /// Directory with `frame_NNNNNN_{bob,alice}.pspt` files.
        #[arg(long, value_name = "DIR")]
        traces: PathBuf,
        #[arg(long, value_name = "PATH")]
        calibration: Option<PathBuf>,
    },
    /// Evaluate the model (and optionally simulate) along one config axis.
    Sweep {
        /// `path=v1,v2,...` or `path=start:stop:steps`.
        #[arg(long)]
        axis: String,
        /// Also simulate every point.
        #[arg(long)]
        simulate: bool,
    },
    /// Measure shot noise, electronic noise and the pilot reference.
    Calibrate {
        /// Vacuum trace (signal blocked, LO on).
        #[arg(long, value_name = "PATH", requires = "b2b")]
        vacuum: Option<PathBuf>,
        /// Electronic-floor trace (LO off).
        #[arg(long, value_name = "PATH", requires = "vacuum")]
        floor: Option<PathBuf>,
        /// Back-to-back trace with the pilot on.
        #[arg(long, value_name = "PATH", requires = "vacuum")]
        b2b: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.source.seed = seed;
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.run.output_dir.as_ref().map(|d| cfg.base_dir.join(d)))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn read_calibration(path: &Path) -> Result<CalibrationRecord> {
    CalibrationRecord::from_json(&std::fs::read_to_string(path)?)
}

fn configured_calibration(flag: &Option<PathBuf>, cfg: &ExperimentConfig) -> Option<PathBuf> {
    flag.clone()
        .or_else(|| cfg.run.calibration.as_ref().map(|p| cfg.base_dir.join(p)))
}

fn print_summary(s: &RunSummary, dir: &Path) {
    println!("{} frames -> {}", s.frames, dir.display());
    if let Some(a) = &s.aggregate {
        println!(
            "  mean T_pilot {:.3} dB, T_hat {:.3e}, eps_raw {:.4} SNU, V_A {:.4} SNU",
            a.mean_t_pilot_db, a.estimate.t_hat, a.estimate.epsilon_raw, a.estimate.v_a
        );
        println!(
            "  SKR at mean estimates {:.4e} b/s, binned total {:.4e} b/s",
            a.rate_at_mean.skr_bps, s.key_rate.total_bps
        );
    }
    println!(
        "  model: eps {:.4} SNU, SKR {:.4e} b/s at {:.2} dB",
        s.model.eps_model, s.model.skr_model_bps, s.model.t_nominal_db
    );
}

fn baseband(path: &Path, cfg: &ExperimentConfig) -> Result<BasebandTrace> {
    let t = load_trace(path)?;
    Ok(BasebandTrace {
        samples: t.samples,
        sample_rate_hz: t.sample_rate_hz,
        symbol_rate_hz: cfg.symbol_rate_hz(),
    })
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let out = out_dir(cli, &cfg);
    let opts = RunOptions {
        workers: cli.workers,
        trace_dir: cli.emit_traces.then(|| out.join(files::TRACES)),
    };
    match &cli.command {
        Command::Simulate { calibration } => {
            let cal = match configured_calibration(calibration, &cfg) {
                Some(p) => read_calibration(&p)?,
                None => calibrate(&cfg)?,
            };
            let run = simulate(&cfg, &cal, &opts)?;
            let s = write_reports(&out, "simulate", &cfg, &cal, &run)?;
            print_summary(&s, &out);
        }
        Command::Analyze {
            traces,
            calibration,
        } => {
            let cal = configured_calibration(calibration, &cfg)
                .map(|p| read_calibration(&p))
                .transpose()?;
            let run = analyze_traces(&cfg, cal.as_ref(), traces, &opts)?;
            let cal = cal.expect("analysis succeeded with a calibration");
            let s = write_reports(&out, "analyze", &cfg, &cal, &run)?;
            print_summary(&s, &out);
        }
        Command::Sweep { axis, simulate } => {
            let axis: SweepAxis = axis.parse()?;
            let cal = if *simulate {
                Some(calibrate(&cfg)?)
            } else {
                None
            };
            let report = sweep(&cfg, &axis, cal.as_ref(), &opts)?;
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("sweep.csv"), sweep_csv(&report))?;
            std::fs::write(
                out.join("sweep.json"),
                serde_json::to_string_pretty(&report).map_err(|e| Error::Format(e.to_string()))?,
            )?;
            println!(
                "{} points on {}: SKR {:?}, eps_psp {:?}, best {} at {:.4e} b/s",
                report.rows.len(),
                report.axis.path,
                report.skr_trend,
                report.eps_psp_trend,
                report.best_value,
                report.best_skr_bps
            );
        }
        Command::Calibrate { vacuum, floor, b2b } => {
            let cal = match (vacuum, b2b) {
                (Some(v), Some(b)) => {
                    let floor = floor.as_ref().map(|f| baseband(f, &cfg)).transpose()?;
                    calibrate_from_traces(
                        &baseband(v, &cfg)?,
                        floor.as_ref(),
                        &baseband(b, &cfg)?,
                        &cfg.pilot_filter(),
                    )?
                }
                _ => calibrate(&cfg)?,
            };
            std::fs::create_dir_all(&out)?;
            let path = out.join(files::CALIBRATION);
            std::fs::write(&path, cal.to_json())?;
            println!(
                "sigma_cal {:.6}, electronic noise {:.4} SNU, pilot reference {:.6e} -> {}",
                cal.sigma_cal,
                cal.electronic_noise_snu,
                cal.pilot_ref_power,
                path.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
