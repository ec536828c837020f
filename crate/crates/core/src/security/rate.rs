//! Secret key rates per operating point and transmittance-weighted totals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::gaussian::{holevo_bound, mutual_information, SecurityConfig};

/// `F_m (1 − FER) max(0, β I_AB − χ_BE)` in bits per second.
pub fn secret_key_rate(i_ab: f64, k_be: f64, cfg: &SecurityConfig) -> f64 {
    cfg.f_m_hz * (1.0 - cfg.fer) * (cfg.beta * i_ab - k_be).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRatePoint {
    pub i_ab: f64,
    pub holevo: f64,
    pub skr_bps: f64,
}

/// Mutual information, Holevo bound and key rate at one operating point.
pub fn key_rate(v_a: f64, t: f64, eps: f64, cfg: &SecurityConfig) -> Result<KeyRatePoint> {
    cfg.validate()?;
    let i_ab = mutual_information(v_a, t, eps, cfg)?;
    let holevo = holevo_bound(v_a, t, eps, cfg)?;
    Ok(KeyRatePoint {
        i_ab,
        holevo,
        skr_bps: secret_key_rate(i_ab, holevo, cfg),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyRateBin {
    pub lower_db: f64,
    pub upper_db: f64,
    pub probability: f64,
    pub skr_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyRateReport {
    pub bins: Vec<KeyRateBin>,
    pub total_bps: f64,
}

/// `R_total = Σ P_T · R_T`.
pub fn total_key_rate(bins: Vec<KeyRateBin>) -> Result<KeyRateReport> {
    if let Some(b) = bins.iter().find(|b| !(b.probability >= 0.0)) {
        return Err(Error::domain(
            "bin probability",
            b.probability,
            "must be >= 0",
        ));
    }
    let total_bps = bins.iter().map(|b| b.probability * b.skr_bps).sum();
    Ok(KeyRateReport { bins, total_bps })
}
