//! Integer-lag frame synchronization on a disclosed block of symbols.

use crate::error::{Error, Result};
use crate::optics::QuadraturePair;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncResult {
    /// Bob's sequence lags Alice's by this many symbols.
    pub lag: usize,
    /// Normalized correlation at `lag`.
    pub peak: f64,
    pub threshold: f64,
}

/// Detection threshold on the normalized correlation for `n` compared
/// samples and `max_lag + 1` candidates (false alarm about `e^{-7}`).
pub fn sync_threshold(n: usize, max_lag: usize) -> f64 {
    ((2.0 * ((max_lag + 1) as f64).ln() + 14.0) / n as f64).sqrt()
}

/// Finds the lag in `0..=max_lag` maximizing the normalized correlation of
/// `alice[..m]` with `bob[lag..lag + m]`.
pub fn frame_synchronize(alice: &[f64], bob: &[f64], max_lag: usize) -> Result<SyncResult> {
    search(alice.len(), bob.len(), max_lag, 1, |lag, m| {
        correlation(&alice[..m], &bob[lag..lag + m])
    })
}

/// As [`frame_synchronize`], averaging the x and p correlations.
pub fn frame_synchronize_pairs(
    alice: &[QuadraturePair],
    bob: &[QuadraturePair],
    max_lag: usize,
) -> Result<SyncResult> {
    let ax: Vec<f64> = alice.iter().map(|q| q.x).collect();
    let ap: Vec<f64> = alice.iter().map(|q| q.p).collect();
    let bx: Vec<f64> = bob.iter().map(|q| q.x).collect();
    let bp: Vec<f64> = bob.iter().map(|q| q.p).collect();
    // Averaging two quadratures doubles the effective sample count.
    search(alice.len(), bob.len(), max_lag, 2, |lag, m| {
        0.5 * (correlation(&ax[..m], &bx[lag..lag + m]) + correlation(&ap[..m], &bp[lag..lag + m]))
    })
}

fn search(
    alice_len: usize,
    bob_len: usize,
    max_lag: usize,
    streams: usize,
    corr: impl Fn(usize, usize) -> f64,
) -> Result<SyncResult> {
    if bob_len <= max_lag || alice_len == 0 {
        return Err(Error::LengthMismatch {
            what: "sync sequences vs max_lag",
            left: bob_len,
            right: max_lag,
        });
    }
    let m = alice_len.min(bob_len - max_lag);
    if m < 2 {
        return Err(Error::EmptyRequest("sync block too short"));
    }
    let (mut best_lag, mut best) = (0, f64::NEG_INFINITY);
    for lag in 0..=max_lag {
        let c = corr(lag, m);
        if c > best {
            best = c;
            best_lag = lag;
        }
    }
    let threshold = sync_threshold(m * streams, max_lag);
    if !(best >= threshold) {
        return Err(Error::SyncFailure {
            peak: best,
            threshold,
        });
    }
    Ok(SyncResult {
        lag: best_lag,
        peak: best,
        threshold,
    })
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        0.0
    } else {
        ab / (aa * bb).sqrt()
    }
}
