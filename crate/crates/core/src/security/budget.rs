//! Excess-noise decomposition from ablation runs.
//!
//! Each ablation reruns the same frames with identical random streams and
//! one impairment switched off. The difference between the baseline and an
//! ablation is attributed to that impairment. `ε_chan` is whatever remains.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    Baseline,
    NoFrequencyOffset,
    NoPhaseNoise,
}

/// Excess-noise estimate of one ablation run, SNU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AblationRun {
    pub kind: Ablation,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget {
    pub eps_psp: f64,
    pub eps_freq: f64,
    pub eps_phase: f64,
    pub eps_chan: f64,
    pub eps_fad: f64,
    pub eps_total: f64,
    pub diagnostics: Vec<String>,
}

impl NoiseBudget {
    pub fn attributed(&self) -> f64 {
        self.eps_psp + self.eps_freq + self.eps_phase + self.eps_fad
    }
}

pub fn assemble_noise_budget(
    runs: &[AblationRun],
    eps_psp: f64,
    eps_fad: f64,
) -> Result<NoiseBudget> {
    let find = |kind| runs.iter().find(|r| r.kind == kind).map(|r| r.epsilon);
    let total = find(Ablation::Baseline).ok_or(Error::MissingBaseline)?;
    let mut diagnostics = Vec::new();
    let mut component = |name: &str, kind| -> f64 {
        match find(kind) {
            None => 0.0,
            Some(eps) => {
                let d = total - eps;
                if d < 0.0 {
                    diagnostics.push(format!("{name}: negative difference {d:.6e} clamped to 0"));
                    0.0
                } else {
                    d
                }
            }
        }
    };
    let eps_freq = component("eps_freq", Ablation::NoFrequencyOffset);
    let eps_phase = component("eps_phase", Ablation::NoPhaseNoise);
    for (name, v) in [("eps_psp", eps_psp), ("eps_fad", eps_fad)] {
        if v < 0.0 {
            diagnostics.push(format!("{name}: negative input {v:.6e}"));
        }
    }
    let mut b = NoiseBudget {
        eps_psp,
        eps_freq,
        eps_phase,
        eps_chan: 0.0,
        eps_fad,
        eps_total: total,
        diagnostics,
    };
    b.eps_chan = total - b.attributed();
    if b.eps_chan < 0.0 {
        b.diagnostics.push(format!(
            "eps_chan residual {:.6e} is negative (estimation noise)",
            b.eps_chan
        ));
    }
    Ok(b)
}
