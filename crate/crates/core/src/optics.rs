//! Gaussian quadrature optics in shot-noise units.
//!
//! Convention: a vacuum quadrature has unit variance, and a single-mode
//! thermal state with mean photon number `n0` has `Var(x) = Var(p) = 2 n0 + 1`.
//! All operations are linear maps on [`QuadraturePair`]s, with fresh vacuum
//! drawn from the caller's RNG wherever a mode is coupled in.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_unit_interval, Error, Result};
use crate::rng::{gauss, seeded};

/// One (x, p) sample of a bosonic mode, in SNU.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QuadraturePair {
    pub x: f64,
    pub p: f64,
}

impl QuadraturePair {
    pub const ZERO: QuadraturePair = QuadraturePair { x: 0.0, p: 0.0 };

    pub const fn new(x: f64, p: f64) -> Self {
        Self { x, p }
    }

    /// A vacuum-state sample: independent unit-variance Gaussians.
    pub fn vacuum<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let x = gauss(rng);
        let p = gauss(rng);
        Self { x, p }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.p)
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self { x: z.re, p: z.im }
    }

    /// `|x + jp|^2`.
    pub fn norm_sqr(self) -> f64 {
        self.x * self.x + self.p * self.p
    }

    /// Rotate the complex amplitude by `theta` radians.
    pub fn rotate(self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            x: c * self.x - s * self.p,
            p: s * self.x + c * self.p,
        }
    }
}

impl Add for QuadraturePair {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.p + rhs.p)
    }
}

impl Sub for QuadraturePair {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.p - rhs.p)
    }
}

impl Mul<f64> for QuadraturePair {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.x * k, self.p * k)
    }
}

impl Neg for QuadraturePair {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.p)
    }
}

/// Thermal source description: mean photon number and the seed of its stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalSourceConfig {
    pub n0: f64,
    pub seed: u64,
}

impl ThermalSourceConfig {
    /// Quadrature variance of the source, `2 n0 + 1`.
    pub fn quadrature_variance(&self) -> f64 {
        2.0 * self.n0 + 1.0
    }
}

/// Efficiency and electronic noise of one (heterodyne) detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    /// Quantum efficiency in (0, 1].
    pub efficiency: f64,
    /// Electronic noise variance per quadrature, SNU.
    pub electronic_noise: f64,
}

impl DetectorParams {
    pub fn new(efficiency: f64, electronic_noise: f64) -> Result<Self> {
        let det = Self {
            efficiency,
            electronic_noise,
        };
        det.validate()?;
        Ok(det)
    }

    /// Shot-noise-limited detector.
    pub const fn ideal() -> Self {
        Self {
            efficiency: 1.0,
            electronic_noise: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::domain(
                "efficiency",
                self.efficiency,
                "must lie in (0, 1]",
            ));
        }
        check_non_negative("electronic_noise", self.electronic_noise)
    }

    /// Output variance per quadrature contributed by the detector itself
    /// (mixer vacuum, loss vacuum, electronics), excluding the input mode.
    pub fn added_variance(&self) -> f64 {
        1.0 - self.efficiency / 2.0 + self.electronic_noise
    }

    /// Amplitude gain applied to the input mode by heterodyne detection.
    pub fn heterodyne_gain(&self) -> f64 {
        (self.efficiency / 2.0).sqrt()
    }
}

/// Draws `count` i.i.d. thermal quadrature samples from the source's own stream.
pub fn sample_thermal_quadratures(
    cfg: &ThermalSourceConfig,
    count: usize,
) -> Result<Vec<QuadraturePair>> {
    let mut rng = seeded(cfg.seed);
    sample_thermal_with(cfg.n0, count, &mut rng)
}

/// Draws thermal quadratures (`Var = 2 n0 + 1` per component) from `rng`.
pub fn sample_thermal_with<R: Rng + ?Sized>(
    n0: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<QuadraturePair>> {
    if count == 0 {
        return Err(Error::EmptyRequest("thermal sample count is zero"));
    }
    check_non_negative("n0", n0)?;
    let sigma = (2.0 * n0 + 1.0).sqrt();
    Ok((0..count)
        .map(|_| QuadraturePair::vacuum(rng) * sigma)
        .collect())
}

/// Real symmetric beam splitter with intensity transmittance `t`.
///
/// `out1 = √t·a + √(1−t)·b`, `out2 = √(1−t)·a − √t·b`.
pub fn apply_beam_splitter(
    a: QuadraturePair,
    b: QuadraturePair,
    t: f64,
) -> Result<(QuadraturePair, QuadraturePair)> {
    check_unit_interval("t", t)?;
    let (st, sr) = (t.sqrt(), (1.0 - t).sqrt());
    Ok((a * st + b * sr, a * sr - b * st))
}

/// Attenuator modelled as a beam splitter whose second port is fresh vacuum.
pub fn apply_attenuator<R: Rng + ?Sized>(
    a: QuadraturePair,
    eta0: f64,
    rng: &mut R,
) -> Result<QuadraturePair> {
    check_unit_interval("eta0", eta0)?;
    let vac = QuadraturePair::vacuum(rng);
    Ok(a * eta0.sqrt() + vac * (1.0 - eta0).sqrt())
}

/// Noisy heterodyne measurement of mode `a`.
///
/// Per quadrature: `out = √(η/2)(a + v_mix) − √(1−η)·v_det + E`, with
/// `Var(E) = ν_ele`. Each quadrature draws exactly three normals.
pub fn heterodyne_measure<R: Rng + ?Sized>(
    a: QuadraturePair,
    det: &DetectorParams,
    rng: &mut R,
) -> QuadraturePair {
    let g = det.heterodyne_gain();
    let loss = (1.0 - det.efficiency).sqrt();
    let ele = det.electronic_noise.sqrt();
    let mut one = |q: f64| {
        let v_mix = gauss(rng);
        let v_det = gauss(rng);
        let e = gauss(rng);
        g * (q + v_mix) - loss * v_det + ele * e
    };
    let x = one(a.x);
    let p = one(a.p);
    QuadraturePair { x, p }
}

/// Normalized zero-delay intensity correlation `⟨I²⟩ / ⟨I⟩²`.
pub fn g2_zero(intensity: &[f64]) -> Result<f64> {
    if intensity.len() < 2 {
        return Err(Error::Degenerate(format!(
            "g2 needs at least 2 samples, got {}",
            intensity.len()
        )));
    }
    let n = intensity.len() as f64;
    let mean = intensity.iter().sum::<f64>() / n;
    if mean <= 0.0 {
        return Err(Error::Degenerate("mean intensity is zero".into()));
    }
    let second = intensity.iter().map(|i| i * i).sum::<f64>() / n;
    Ok(second / (mean * mean))
}

/// Intensity sequence `|x + jp|² / 2` of a quadrature ensemble.
pub fn intensities(samples: &[QuadraturePair]) -> Vec<f64> {
    samples.iter().map(|q| q.norm_sqr() / 2.0).collect()
}
