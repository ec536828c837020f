//! One-dimensional parameter sweeps over any numeric config field.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::receiver::CalibrationRecord;

use super::config::ExperimentConfig;
use super::pipeline::{model_point, simulate, ModelPoint, RunOptions};
use super::report::summarize;

/// `path=v1,v2,...` or `path=start:stop:steps` (inclusive, `steps >= 2`,
/// or `1` for `start` alone).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub path: String,
    pub values: Vec<f64>,
}

fn axis_err(message: impl Into<String>) -> Error {
    Error::config("axis", message)
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (path, rhs) = s
            .split_once('=')
            .ok_or_else(|| axis_err(format!("`{s}` is not of the form path=values")))?;
        let path = path.trim();
        if path.is_empty() {
            return Err(axis_err("empty path"));
        }
        let rhs = rhs.trim();
        let num = |t: &str| -> Result<f64> {
            t.trim()
                .parse::<f64>()
                .map_err(|e| axis_err(format!("`{t}`: {e}")))
        };
        let values = if rhs.contains(':') {
            let parts: Vec<&str> = rhs.split(':').collect();
            if parts.len() != 3 {
                return Err(axis_err("range must be start:stop:steps"));
            }
            let (a, b) = (num(parts[0])?, num(parts[1])?);
            let steps: usize = parts[2]
                .trim()
                .parse()
                .map_err(|e| axis_err(format!("steps `{}`: {e}", parts[2])))?;
            match steps {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..steps)
                    .map(|i| a + (b - a) * i as f64 / (steps - 1) as f64)
                    .collect(),
            }
        } else if rhs.is_empty() {
            Vec::new()
        } else {
            rhs.split(',').map(num).collect::<Result<_>>()?
        };
        if values.is_empty() {
            return Err(axis_err("axis has no values"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(axis_err(format!("non-finite value {v}")));
        }
        Ok(SweepAxis {
            path: path.to_string(),
            values,
        })
    }
}

/// Returns a copy of `cfg` with the numeric field at `path` set to `value`.
pub fn with_field(cfg: &ExperimentConfig, path: &str, value: f64) -> Result<ExperimentConfig> {
    let mut root = cfg.to_value();
    let mut node = &mut root;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        let table = node
            .as_table_mut()
            .ok_or_else(|| axis_err(format!("`{}` is not a table", keys[..i].join("."))))?;
        node = table
            .get_mut(*key)
            .ok_or_else(|| axis_err(format!("no field `{}`", keys[..=i].join("."))))?;
    }
    match node {
        toml::Value::Float(f) => *f = value,
        toml::Value::Integer(n) => {
            if value.fract() != 0.0 || value < 0.0 {
                return Err(axis_err(format!(
                    "`{path}` needs a non-negative integer, got {value}"
                )));
            }
            *n = value as i64;
        }
        _ => return Err(axis_err(format!("`{path}` is not numeric"))),
    }
    ExperimentConfig::from_value(root, &cfg.base_dir)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Increasing,
    Decreasing,
    Constant,
    NonMonotone,
}

/// Trend of a sequence; ties within `tol` count as equal.
pub fn trend(ys: &[f64], tol: f64) -> Trend {
    let (mut up, mut down) = (false, false);
    for w in ys.windows(2) {
        let d = w[1] - w[0];
        if d > tol {
            up = true;
        } else if d < -tol {
            down = true;
        }
    }
    match (up, down) {
        (true, false) => Trend::Increasing,
        (false, true) => Trend::Decreasing,
        (false, false) => Trend::Constant,
        (true, true) => Trend::NonMonotone,
    }
}

/// Simulated aggregates at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulatedPoint {
    pub mean_t_pilot_db: f64,
    pub mean_eps_raw: f64,
    pub skr_at_mean_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub model: ModelPoint,
    pub simulated: Option<SimulatedPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
    pub skr_trend: Trend,
    pub eps_psp_trend: Trend,
    /// Axis value with the largest model key rate.
    pub best_value: f64,
    pub best_skr_bps: f64,
}

/// Evaluates the model at every axis point and, when `cal` is given and
/// `run.frames > 0`, also simulates each point.
pub fn sweep(
    cfg: &ExperimentConfig,
    axis: &SweepAxis,
    cal: Option<&CalibrationRecord>,
    opts: &RunOptions,
) -> Result<SweepReport> {
    if axis.values.is_empty() {
        return Err(axis_err("axis has no values"));
    }
    let mut rows = Vec::with_capacity(axis.values.len());
    for &value in &axis.values {
        let point = with_field(cfg, &axis.path, value)?;
        let model = model_point(&point)?;
        let simulated = match cal {
            Some(cal) if point.run.frames > 0 => {
                let run = simulate(&point, cal, opts)?;
                let s = summarize("sweep", &point, cal, &run.records)?;
                s.aggregate.map(|a| SimulatedPoint {
                    mean_t_pilot_db: a.mean_t_pilot_db,
                    mean_eps_raw: a.estimate.epsilon_raw,
                    skr_at_mean_bps: a.rate_at_mean.skr_bps,
                })
            }
            _ => None,
        };
        rows.push(SweepRow {
            value,
            model,
            simulated,
        });
    }
    let skr: Vec<f64> = rows.iter().map(|r| r.model.skr_model_bps).collect();
    let eps: Vec<f64> = rows.iter().map(|r| r.model.eps_psp).collect();
    let best = rows
        .iter()
        .max_by(|a, b| a.model.skr_model_bps.total_cmp(&b.model.skr_model_bps))
        .expect("axis is non-empty");
    Ok(SweepReport {
        axis: axis.clone(),
        skr_trend: trend(&skr, 1e-9 * skr.iter().cloned().fold(0.0, f64::max)),
        eps_psp_trend: trend(&eps, 1e-15),
        best_value: best.value,
        best_skr_bps: best.model.skr_model_bps,
        rows,
    })
}

pub fn sweep_csv(report: &SweepReport) -> String {
    let mut s = String::from(
        "value,v_a_equivalent,v_mod,eps_psp,t_nominal_db,eps_fad,eps_model,skr_model_bps,sim_t_pilot_db,sim_eps_raw,sim_skr_bps\n",
    );
    for r in &report.rows {
        let m = &r.model;
        let sim = r.simulated.as_ref();
        let cell =
            |f: fn(&SimulatedPoint) -> f64| sim.map(|p| f(p).to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.value,
            m.v_a_equivalent,
            m.v_mod,
            m.eps_psp,
            m.t_nominal_db,
            m.eps_fad,
            m.eps_model,
            m.skr_model_bps,
            cell(|p| p.mean_t_pilot_db),
            cell(|p| p.mean_eps_raw),
            cell(|p| p.skr_at_mean_bps),
        );
    }
    s
}
