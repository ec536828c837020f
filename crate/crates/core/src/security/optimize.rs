//! Grid search over the attenuator and source-splitter settings.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::transmitter::{epsilon_psp, TransmitterParams};

use super::gaussian::SecurityConfig;
use super::rate::key_rate;

/// Channel conditions held fixed during the search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPoint {
    pub transmittance: f64,
    /// Excess noise excluding the preparation noise, SNU.
    pub excess_noise: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceOptimum {
    pub eta0: f64,
    pub eta1: f64,
    pub eps_psp: f64,
    pub skr_bps: f64,
}

/// Maximizes the key rate over `eta0 × eta1` at the equivalent modulation
/// variance `fixed.eta0 · fixed.n0`, recomputing `ε_psp` at each point.
/// Ties go to the smaller `eta1`.
pub fn optimize_source_params(
    eta0_grid: &[f64],
    eta1_grid: &[f64],
    fixed: &TransmitterParams,
    channel: ChannelPoint,
    cfg: &SecurityConfig,
) -> Result<SourceOptimum> {
    if eta0_grid.is_empty() || eta1_grid.is_empty() {
        return Err(Error::EmptyRequest("optimization grid is empty"));
    }
    let v_a = fixed.equivalent_modulation_variance();
    let mut best: Option<SourceOptimum> = None;
    for &eta0 in eta0_grid {
        for &eta1 in eta1_grid {
            let p = TransmitterParams {
                eta0,
                eta1,
                ..*fixed
            };
            let eps_psp = epsilon_psp(&p, v_a)?;
            let eps = (channel.excess_noise + eps_psp).max(0.0);
            let skr_bps = key_rate(v_a, channel.transmittance, eps, cfg)?.skr_bps;
            let cand = SourceOptimum {
                eta0,
                eta1,
                eps_psp,
                skr_bps,
            };
            best = Some(match best {
                None => cand,
                Some(b) if skr_bps > b.skr_bps || (skr_bps == b.skr_bps && eta1 < b.eta1) => cand,
                Some(b) => b,
            });
        }
    }
    Ok(best.expect("grid is non-empty"))
}
