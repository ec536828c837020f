//! Channel parameter estimation from paired Alice/Bob samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{DetectorParams, QuadraturePair};
use crate::stats::{covariance, variance};

/// Minimum number of disclosed pairs.
pub const MIN_PAIRS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelEstimate {
    /// Channel transmittance, clamped to (0, 1].
    pub t_hat: f64,
    /// Input-referred excess noise, clamped at 0.
    pub epsilon_hat: f64,
    /// Unclamped excess-noise estimate.
    pub epsilon_raw: f64,
    /// Variance of Alice's data, SNU.
    pub v_a: f64,
    pub n_pairs: usize,
    pub n_frames: usize,
}

/// Estimates `(T, ε)` from Alice's estimates `x_A` of the sent quadratures
/// and Bob's calibrated (SNU) heterodyne outcomes `y`.
///
/// Bob's model is `y = √(ηT/2) x_A + noise`, so `T̂ = 2 k² / η` with `k`
/// the regression slope averaged over both quadratures. The conditional
/// variance `Var(y | x_A) = 1 + ν + (ηT/2) ε` gives `ε̂`.
pub fn estimate_channel_params(
    alice: &[QuadraturePair],
    bob: &[QuadraturePair],
    bob_det: &DetectorParams,
) -> Result<ChannelEstimate> {
    if alice.len() != bob.len() {
        return Err(Error::LengthMismatch {
            what: "alice vs bob pairs",
            left: alice.len(),
            right: bob.len(),
        });
    }
    if alice.len() < MIN_PAIRS {
        return Err(Error::InsufficientPairs {
            got: alice.len(),
            need: MIN_PAIRS,
        });
    }
    bob_det.validate()?;
    let eta = bob_det.efficiency;
    let nu = bob_det.electronic_noise;

    let split = |s: &[QuadraturePair]| -> (Vec<f64>, Vec<f64>) {
        (
            s.iter().map(|q| q.x).collect(),
            s.iter().map(|q| q.p).collect(),
        )
    };
    let (ax, ap) = split(alice);
    let (bx, bp) = split(bob);

    let mut slope = 0.0;
    let mut v_a = 0.0;
    let mut cond = 0.0;
    for (a, b) in [(&ax, &bx), (&ap, &bp)] {
        let va = variance(a);
        if !(va > 1e-12) {
            return Err(Error::EstimationDegenerate(format!(
                "Alice variance {va:.3e} leaves the slope undefined"
            )));
        }
        let c = covariance(a, b);
        slope += 0.5 * c / va;
        v_a += 0.5 * va;
        cond += 0.5 * (variance(b) - c * c / va);
    }
    if !(cond > 0.0) {
        return Err(Error::EstimationDegenerate(format!(
            "conditional variance {cond:.3e} is not positive"
        )));
    }
    let t_raw = 2.0 * slope * slope / eta;
    if !(t_raw > 0.0) {
        return Err(Error::EstimationDegenerate("zero cross-correlation".into()));
    }
    let t_hat = t_raw.min(1.0);
    let epsilon_raw = (cond - 1.0 - nu) / (eta * t_hat / 2.0);
    Ok(ChannelEstimate {
        t_hat,
        epsilon_hat: epsilon_raw.max(0.0),
        epsilon_raw,
        v_a,
        n_pairs: alice.len(),
        n_frames: 1,
    })
}

/// Averages per-frame estimates (each frame weighted equally).
pub fn average_estimates(estimates: &[ChannelEstimate]) -> Option<ChannelEstimate> {
    if estimates.is_empty() {
        return None;
    }
    let n = estimates.len() as f64;
    let avg = |f: fn(&ChannelEstimate) -> f64| estimates.iter().map(f).sum::<f64>() / n;
    let epsilon_raw = avg(|e| e.epsilon_raw);
    Some(ChannelEstimate {
        t_hat: avg(|e| e.t_hat),
        epsilon_hat: epsilon_raw.max(0.0),
        epsilon_raw,
        v_a: avg(|e| e.v_a),
        n_pairs: estimates.iter().map(|e| e.n_pairs).sum(),
        n_frames: estimates.iter().map(|e| e.n_frames).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::heterodyne_measure;
    use crate::rng::{gauss, seeded};

    fn synth(
        n: usize,
        t: f64,
        eps: f64,
        v_a: f64,
        det: &DetectorParams,
        seed: u64,
    ) -> (Vec<QuadraturePair>, Vec<QuadraturePair>) {
        let mut rng = seeded(seed);
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for _ in 0..n {
            let x = QuadraturePair::new(gauss(&mut rng), gauss(&mut rng)) * v_a.sqrt();
            let noise = QuadraturePair::new(gauss(&mut rng), gauss(&mut rng)) * eps.sqrt();
            let sent = x + noise + QuadraturePair::vacuum(&mut rng);
            let env = sent * t.sqrt() + QuadraturePair::vacuum(&mut rng) * (1.0 - t).sqrt();
            a.push(x);
            b.push(heterodyne_measure(env, det, &mut rng));
        }
        (a, b)
    }

    #[test]
    fn noiseless_channel_transmittance() {
        let det = DetectorParams::new(0.56, 0.38).unwrap();
        let (a, b) = synth(10_000_000, 0.01, 0.0, 3.0, &det, 2);
        let e = estimate_channel_params(&a, &b, &det).unwrap();
        assert!((e.t_hat / 0.01 - 1.0).abs() < 0.02, "{}", e.t_hat);
    }

    #[test]
    fn noiseless_channel_excess_noise() {
        // The ε̂ standard error scales as 1/(ηT√n); a lossless ideal link is
        // where ±0.005 is resolvable with a few million pairs.
        let det = DetectorParams::ideal();
        let (a, b) = synth(2_000_000, 1.0, 0.0, 3.0, &det, 1);
        let e = estimate_channel_params(&a, &b, &det).unwrap();
        assert!((e.t_hat - 1.0).abs() < 0.02);
        assert!(e.epsilon_raw.abs() < 0.005, "{}", e.epsilon_raw);
    }

    #[test]
    fn recovers_excess_noise() {
        let det = DetectorParams::new(0.56, 0.38).unwrap();
        let (a, b) = synth(1_000_000, 0.8, 0.05, 3.0, &det, 3);
        let e = estimate_channel_params(&a, &b, &det).unwrap();
        assert!((e.epsilon_hat - 0.05).abs() < 0.02, "{}", e.epsilon_hat);
        assert!((e.v_a - 3.0).abs() < 0.02);
    }

    #[test]
    fn degenerate_inputs() {
        let det = DetectorParams::ideal();
        let zeros = vec![QuadraturePair::ZERO; MIN_PAIRS];
        let (_, b) = synth(MIN_PAIRS, 0.5, 0.0, 1.0, &det, 4);
        assert!(matches!(
            estimate_channel_params(&zeros, &b, &det),
            Err(Error::EstimationDegenerate(_))
        ));
        assert!(matches!(
            estimate_channel_params(&zeros[..10], &b[..10], &det),
            Err(Error::InsufficientPairs { .. })
        ));
    }

    #[test]
    fn averaging() {
        let e = ChannelEstimate {
            t_hat: 0.1,
            epsilon_hat: 0.0,
            epsilon_raw: -0.02,
            v_a: 3.0,
            n_pairs: 10,
            n_frames: 1,
        };
        let f = ChannelEstimate {
            t_hat: 0.3,
            epsilon_hat: 0.06,
            epsilon_raw: 0.06,
            ..e
        };
        let m = average_estimates(&[e, f]).unwrap();
        assert!((m.t_hat - 0.2).abs() < 1e-15);
        assert!((m.epsilon_raw - 0.02).abs() < 1e-15);
        assert_eq!(m.n_frames, 2);
        assert!(average_estimates(&[]).is_none());
    }
}
