//! Alice's station: thermal-source splitting, her heterodyne tap, the
//! attenuator, and the closed-form preparation-noise analysis.
//!
//! The channel-bound quadrature and Alice's measured quadrature share the
//! same source and vacuum realizations:
//!
//! ```text
//! x1 = √(η0η1)·x_in − √(η0(1−η1))·v1 − √(η0η3)·v3 − √(1−η0)·v4
//! x2 = √(η(1−η1)/2)·x_in − √(ηη1/2)·v1 + √(η/2)·v2 + √(η(1−η3)/2)·v3 − √(1−η)·va + E
//! ```
//!
//! With this sign pattern `⟨x1 x2⟩` scales with `n0 + 1`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_unit_interval, Error, Result};
use crate::optics::{heterodyne_measure, DetectorParams, QuadraturePair};
use crate::rng::gauss;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmitterParams {
    /// Attenuator transmittance.
    pub eta0: f64,
    /// Transmittance of the source splitter towards the channel.
    pub eta1: f64,
    /// Transmittance of the beacon combiner.
    pub eta3: f64,
    pub alice_det: DetectorParams,
    /// Mean photon number of the thermal source.
    pub n0: f64,
    /// Beacon (pilot) coherent amplitude before the attenuator, SNU.
    pub beacon_amplitude: f64,
}

impl TransmitterParams {
    pub fn validate(&self) -> Result<()> {
        check_unit_interval("eta0", self.eta0)?;
        check_unit_interval("eta1", self.eta1)?;
        check_unit_interval("eta3", self.eta3)?;
        check_non_negative("n0", self.n0)?;
        check_non_negative("beacon_amplitude", self.beacon_amplitude)?;
        self.alice_det.validate()
    }

    /// `V_A = η0·n0`, the equivalent modulation variance.
    pub fn equivalent_modulation_variance(&self) -> f64 {
        self.eta0 * self.n0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmitterOutput {
    /// `x1 + j p1`, the mode sent into the channel.
    pub channel_bound: Vec<QuadraturePair>,
    /// `x2 + j p2`, Alice's heterodyne record.
    pub alice_measured: Vec<QuadraturePair>,
    /// Beacon amplitude after the attenuator, `√η0·γ`.
    pub pilot_amplitude_sent: f64,
}

/// Second moments of (x1, x2), identical for the p quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AliceMoments {
    pub x1x1: f64,
    pub x1x2: f64,
    pub x2x2: f64,
}

/// Analytic second moments of the channel-bound and measured quadratures.
pub fn alice_moments(params: &TransmitterParams) -> AliceMoments {
    let TransmitterParams {
        eta0,
        eta1,
        eta3,
        n0,
        ..
    } = *params;
    let eta = params.alice_det.efficiency;
    let nu = params.alice_det.electronic_noise;
    let v_in = 2.0 * n0 + 1.0;

    let x1x1 = eta0 * eta1 * v_in + eta0 * (1.0 - eta1) + eta0 * eta3 + (1.0 - eta0);
    // v1 enters both with a minus sign, so it adds to the x_in correlation.
    let x1x2 = (eta0 * eta * eta1 * (1.0 - eta1) / 2.0).sqrt() * (v_in + 1.0)
        - (eta0 * eta * eta3 * (1.0 - eta3) / 2.0).sqrt();
    let x2x2 = eta * (1.0 - eta1) / 2.0 * v_in
        + eta * eta1 / 2.0
        + eta / 2.0
        + eta * (1.0 - eta3) / 2.0
        + (1.0 - eta)
        + nu;
    AliceMoments { x1x1, x1x2, x2x2 }
}

/// Simulates `count` symbols of Alice's station.
pub fn alice_station<R: Rng + ?Sized>(
    params: &TransmitterParams,
    count: usize,
    rng: &mut R,
) -> Result<TransmitterOutput> {
    if count == 0 {
        return Err(Error::EmptyRequest("transmitter symbol count is zero"));
    }
    params.validate()?;
    let TransmitterParams {
        eta0,
        eta1,
        eta3,
        n0,
        ..
    } = *params;
    let sigma_in = (2.0 * n0 + 1.0).sqrt();

    let c_in = (eta0 * eta1).sqrt();
    let c_v1 = (eta0 * (1.0 - eta1)).sqrt();
    let c_v3 = (eta0 * eta3).sqrt();
    let c_v4 = (1.0 - eta0).sqrt();
    let d_in = (1.0 - eta1).sqrt();
    let d_v1 = eta1.sqrt();
    let d_v3 = (1.0 - eta3).sqrt();

    let mut channel_bound = Vec::with_capacity(count);
    let mut alice_measured = Vec::with_capacity(count);
    for _ in 0..count {
        let x_in = QuadraturePair::new(gauss(rng), gauss(rng)) * sigma_in;
        let v1 = QuadraturePair::vacuum(rng);
        let v3 = QuadraturePair::vacuum(rng);
        let v4 = QuadraturePair::vacuum(rng);
        channel_bound.push(x_in * c_in - v1 * c_v1 - v3 * c_v3 - v4 * c_v4);
        // Mode reaching Alice's detector; the heterodyne adds v2, va and E.
        let tapped = x_in * d_in - v1 * d_v1 + v3 * d_v3;
        alice_measured.push(heterodyne_measure(tapped, &params.alice_det, rng));
    }
    Ok(TransmitterOutput {
        channel_bound,
        alice_measured,
        pilot_amplitude_sent: eta0.sqrt() * params.beacon_amplitude,
    })
}

/// Alice's optimal linear estimate coefficient `α = ⟨x1 x2⟩ / ⟨x2²⟩`.
///
/// ```text
/// α = [2(n0+1)√(2η0η1η(1−η1)) − √(2η0η3η(1−η3))] / [2n0η(1−η1) + η(1−η3) + 2ν + 2]
/// ```
pub fn optimal_estimator_alpha(params: &TransmitterParams) -> Result<f64> {
    params.validate()?;
    let TransmitterParams {
        eta0,
        eta1,
        eta3,
        n0,
        ..
    } = *params;
    let eta = params.alice_det.efficiency;
    let nu = params.alice_det.electronic_noise;
    let num = 2.0 * (n0 + 1.0) * (2.0 * eta0 * eta1 * eta * (1.0 - eta1)).sqrt()
        - (2.0 * eta0 * eta3 * eta * (1.0 - eta3)).sqrt();
    let den = 2.0 * n0 * eta * (1.0 - eta1) + eta * (1.0 - eta3) + 2.0 * nu + 2.0;
    if den <= 0.0 {
        return Err(Error::domain("alpha denominator", den, "must be > 0"));
    }
    Ok(num / den)
}

/// Closed-form preparation noise `ε_psp` (SNU) at equivalent modulation
/// variance `v_a`.
///
/// Only the splitter ratios and Alice's detector are taken from `params`;
/// the source brightness enters through `v_a = η0·n0`. The result equals
/// `⟨(x1 − α x2)²⟩ − 1`, i.e. the estimation residual above shot noise.
pub fn epsilon_psp(params: &TransmitterParams, v_a: f64) -> Result<f64> {
    check_non_negative("V_A", v_a)?;
    check_unit_interval("eta0", params.eta0)?;
    check_unit_interval("eta1", params.eta1)?;
    check_unit_interval("eta3", params.eta3)?;
    params.alice_det.validate()?;
    let TransmitterParams {
        eta0, eta1, eta3, ..
    } = *params;
    let eta = params.alice_det.efficiency;
    let nu = params.alice_det.electronic_noise;

    let bracket =
        2.0 * (v_a + eta0) * (eta1 * (1.0 - eta1)).sqrt() - eta0 * (eta3 * (1.0 - eta3)).sqrt();
    let den = 2.0 * v_a * eta * (1.0 - eta1) + eta0 * eta * (1.0 - eta3) + 2.0 * eta0 * (nu + 1.0);
    if den <= 0.0 {
        return Err(Error::domain("epsilon_psp denominator", den, "must be > 0"));
    }
    Ok(-eta * bracket * bracket / den + 2.0 * v_a * eta1 + eta0 * eta3)
}

/// `V_A = η0·n0`.
pub fn equivalent_modulation_variance(eta0: f64, n0: f64) -> Result<f64> {
    check_unit_interval("eta0", eta0)?;
    check_non_negative("n0", n0)?;
    Ok(eta0 * n0)
}

/// Variance of Alice's estimate `α x2` of the sent quadrature: the
/// modulation variance seen at the channel input once preparation noise is
/// counted as excess noise.
pub fn effective_modulation_variance(params: &TransmitterParams) -> f64 {
    let m = alice_moments(params);
    m.x1x2 * m.x1x2 / m.x2x2
}
