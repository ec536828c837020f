//! Asymptotic Gaussian security for heterodyne detection with reverse
//! reconciliation, in the entanglement-based picture.
//!
//! Alice's EPR source has variance `V = V_A + 1`. The channel has
//! transmittance `T` and input-referred excess noise `ε`. Bob's detector
//! (efficiency `η`, electronic noise `ν`) is either trusted, modeled as a
//! beam splitter fed by one arm of an EPR pair of variance
//! `1 + 2ν/(1 − η)`, or attributed to the channel, `T' = ηT`,
//! `ε' = ε + 2ν/(ηT)`, in front of an ideal heterodyne detector.

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_unit_interval, Error, Result};
use crate::optics::DetectorParams;

use super::symplectic::{g, heterodyne_condition, symplectic_eigenvalues, two_mode_eigenvalues};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecurityConfig {
    /// Reconciliation efficiency in (0, 1].
    pub beta: f64,
    /// Frame error rate in [0, 1).
    pub fer: f64,
    /// Repetition rate, Hz.
    pub f_m_hz: f64,
    pub detector_trusted: bool,
    pub bob_det: DetectorParams,
}

impl SecurityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::domain("beta", self.beta, "must lie in (0, 1]"));
        }
        if !(0.0..1.0).contains(&self.fer) {
            return Err(Error::domain("fer", self.fer, "must lie in [0, 1)"));
        }
        if !(self.f_m_hz > 0.0 && self.f_m_hz.is_finite()) {
            return Err(Error::domain("f_m_hz", self.f_m_hz, "must be > 0"));
        }
        self.bob_det.validate()
    }
}

fn check_point(v_a: f64, t: f64, eps: f64) -> Result<()> {
    check_non_negative("V_A", v_a)?;
    check_unit_interval("T", t)?;
    check_non_negative("epsilon", eps)
}

/// Shannon information between Alice and Bob in bits per symbol:
/// `log2(1 + (ηT V_A/2) / (1 + ν + ηT ε/2))`. Both detector conventions
/// give the same value.
pub fn mutual_information(v_a: f64, t: f64, eps: f64, cfg: &SecurityConfig) -> Result<f64> {
    check_point(v_a, t, eps)?;
    cfg.bob_det.validate()?;
    let eta = cfg.bob_det.efficiency;
    let nu = cfg.bob_det.electronic_noise;
    let signal = eta * t * v_a / 2.0;
    let noise = 1.0 + nu + eta * t * eps / 2.0;
    Ok((1.0 + signal / noise).log2())
}

/// Alice-Bob covariance blocks `(A, B, C)` for a channel `(T, ε)`.
fn ab_blocks(v: f64, t: f64, eps: f64) -> (Matrix2<f64>, Matrix2<f64>, Matrix2<f64>) {
    let a = Matrix2::identity() * v;
    let b = Matrix2::identity() * (t * (v - 1.0 + eps) + 1.0);
    let c = Matrix2::new(1.0, 0.0, 0.0, -1.0) * (t * (v * v - 1.0)).sqrt();
    (a, b, c)
}

fn ab_matrix(v: f64, t: f64, eps: f64) -> DMatrix<f64> {
    let (a, b, c) = ab_blocks(v, t, eps);
    let mut m = DMatrix::zeros(4, 4);
    m.view_mut((0, 0), (2, 2)).copy_from(&a);
    m.view_mut((2, 2), (2, 2)).copy_from(&b);
    m.view_mut((0, 2), (2, 2)).copy_from(&c);
    m.view_mut((2, 0), (2, 2)).copy_from(&c.transpose());
    m
}

/// Eve's entropy `S(E) = S(AB)` from the two-mode invariants.
fn eve_entropy(v: f64, t: f64, eps: f64) -> Result<f64> {
    let (a, b, c) = ab_blocks(v, t, eps);
    // Diagonal blocks with a ±Z coupling: det γ = (V·V_B − c²)².
    let det = (a[(0, 0)] * b[(0, 0)] - c[(0, 0)] * c[(0, 0)]).powi(2);
    let (l1, l2) = two_mode_eigenvalues(&a, &b, &c, det);
    if l2 < 1.0 - 1e-9 {
        return Err(Error::Unphysical(format!(
            "two-mode symplectic eigenvalue {l2:.6} < 1 at T = {t}, eps = {eps}"
        )));
    }
    Ok(g(l1) + g(l2))
}

/// Holevo bound `χ_BE = S(E) − S(E|b)` in bits per symbol.
pub fn holevo_bound(v_a: f64, t: f64, eps: f64, cfg: &SecurityConfig) -> Result<f64> {
    check_point(v_a, t, eps)?;
    cfg.bob_det.validate()?;
    let v = v_a + 1.0;
    let eta = cfg.bob_det.efficiency;
    let nu = cfg.bob_det.electronic_noise;

    if !cfg.detector_trusted {
        if t == 0.0 {
            return Ok(0.0);
        }
        let t2 = eta * t;
        let eps2 = eps + 2.0 * nu / t2;
        return ideal_heterodyne_holevo(v, t2, eps2);
    }
    if eta == 1.0 && nu == 0.0 {
        return ideal_heterodyne_holevo(v, t, eps);
    }
    if eta == 1.0 {
        return Err(Error::domain(
            "bob efficiency",
            eta,
            "trusted electronic noise needs efficiency < 1",
        ));
    }

    let s_e = eve_entropy(v, t, eps)?;

    // Modes: A, B' (measured), F', G.
    let v_n = 1.0 + 2.0 * nu / (1.0 - eta);
    let (se, sr) = (eta.sqrt(), (1.0 - eta).sqrt());
    let (a, b, c) = ab_blocks(v, t, eps);
    let vb = b[(0, 0)];
    let cn = (v_n * v_n - 1.0).sqrt();
    let z = Matrix2::new(1.0, 0.0, 0.0, -1.0);
    let id = Matrix2::<f64>::identity();

    // B' = √η B + √(1−η) F0 and F' = √(1−η) B − √η F0, where (F0, G) is
    // the noise EPR pair.
    let blocks: [[Matrix2<f64>; 4]; 4] = {
        let a_bp = c * se;
        let a_fp = c * sr;
        let bp_bp = id * (eta * vb + (1.0 - eta) * v_n);
        let fp_fp = id * ((1.0 - eta) * vb + eta * v_n);
        let bp_fp = id * (se * sr * (vb - v_n));
        let bp_g = z * (sr * cn);
        let fp_g = z * (-se * cn);
        let g_g = id * v_n;
        let a_g = Matrix2::zeros();
        [
            [a, a_bp, a_fp, a_g],
            [a_bp.transpose(), bp_bp, bp_fp, bp_g],
            [a_fp.transpose(), bp_fp.transpose(), fp_fp, fp_g],
            [a_g.transpose(), bp_g.transpose(), fp_g.transpose(), g_g],
        ]
    };
    let mut full = DMatrix::zeros(8, 8);
    for (i, row) in blocks.iter().enumerate() {
        for (j, blk) in row.iter().enumerate() {
            full.view_mut((2 * i, 2 * j), (2, 2)).copy_from(blk);
        }
    }
    let cond = heterodyne_condition(&full, &[1])?;
    let s_e_given_b: f64 = symplectic_eigenvalues(&cond)?.into_iter().map(g).sum();
    Ok((s_e - s_e_given_b).max(0.0))
}

fn ideal_heterodyne_holevo(v: f64, t: f64, eps: f64) -> Result<f64> {
    let s_e = eve_entropy(v, t, eps)?;
    let cond = heterodyne_condition(&ab_matrix(v, t, eps), &[1])?;
    let s_cond: f64 = symplectic_eigenvalues(&cond)?.into_iter().map(g).sum();
    Ok((s_e - s_cond).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(trusted: bool) -> SecurityConfig {
        SecurityConfig {
            beta: 0.96,
            fer: 0.3,
            f_m_hz: 20e9,
            detector_trusted: trusted,
            bob_det: DetectorParams::new(0.56, 0.38).unwrap(),
        }
    }

    fn ideal() -> SecurityConfig {
        SecurityConfig {
            bob_det: DetectorParams::ideal(),
            ..cfg(true)
        }
    }

    #[test]
    fn lossless_channel_leaks_nothing() {
        for trusted in [true, false] {
            let c = SecurityConfig {
                detector_trusted: trusted,
                ..ideal()
            };
            assert_eq!(holevo_bound(2.973, 1.0, 0.0, &c).unwrap(), 0.0);
        }
    }

    #[test]
    fn mutual_information_limits() {
        assert_eq!(mutual_information(3.0, 0.0, 0.1, &cfg(true)).unwrap(), 0.0);
        let i = mutual_information(4.0, 1.0, 0.0, &ideal()).unwrap();
        assert!((i - 3f64.log2()).abs() < 1e-15);
        assert_eq!(
            mutual_information(3.0, 0.3, 0.05, &cfg(true)).unwrap(),
            mutual_information(3.0, 0.3, 0.05, &cfg(false)).unwrap()
        );
    }

    /// Closed-form trusted-heterodyne entropies (two-mode invariants plus the
    /// conditional A-F-G spectrum with one unit eigenvalue).
    fn closed_form_trusted(v_a: f64, t: f64, eps: f64, eta: f64, nu: f64) -> f64 {
        let v = v_a + 1.0;
        let chi_line = 1.0 / t - 1.0 + eps;
        let chi_het = (2.0 - eta + 2.0 * nu) / eta;
        let chi_tot = chi_line + chi_het / t;
        let a = v * v * (1.0 - 2.0 * t) + 2.0 * t + t * t * (v + chi_line).powi(2);
        let b = t * t * (v * chi_line + 1.0).powi(2);
        let l1 = (0.5 * (a + (a * a - 4.0 * b).sqrt())).sqrt();
        let l2 = (0.5 * (a - (a * a - 4.0 * b).sqrt())).sqrt();
        let den = (t * (v + chi_tot)).powi(2);
        let c = (a * chi_het * chi_het
            + b
            + 1.0
            + 2.0 * chi_het * (v * b.sqrt() + t * (v + chi_line))
            + 2.0 * t * (v * v - 1.0))
            / den;
        let d = ((v + b.sqrt() * chi_het) / (t * (v + chi_tot))).powi(2);
        let l3 = (0.5 * (c + (c * c - 4.0 * d).sqrt())).sqrt();
        let l4 = (0.5 * (c - (c * c - 4.0 * d).sqrt())).sqrt();
        g(l1) + g(l2) - g(l3) - g(l4)
    }

    #[test]
    fn trusted_matches_closed_form() {
        for &(v_a, t, eps, eta, nu) in &[
            (2.973, 10f64.powf(-2.34), 0.0393, 0.56, 0.38),
            (5.0, 0.3, 0.02, 0.7, 0.1),
            (1.0, 0.9, 0.0, 0.5, 0.0),
            (20.0, 0.05, 0.1, 0.9, 0.05),
        ] {
            let c = SecurityConfig {
                bob_det: DetectorParams::new(eta, nu).unwrap(),
                ..cfg(true)
            };
            let ours = holevo_bound(v_a, t, eps, &c).unwrap();
            let oracle = closed_form_trusted(v_a, t, eps, eta, nu);
            assert!(
                (ours - oracle).abs() < 1e-8 * oracle.abs().max(1e-3),
                "{ours} vs {oracle} at {v_a},{t},{eps},{eta},{nu}"
            );
        }
    }

    #[test]
    fn untrusted_leaks_more() {
        let t = 10f64.powf(-2.0);
        let a = holevo_bound(2.973, t, 0.03, &cfg(true)).unwrap();
        let b = holevo_bound(2.973, t, 0.03, &cfg(false)).unwrap();
        assert!(b > a);
        assert_eq!(holevo_bound(2.973, 0.0, 0.03, &cfg(false)).unwrap(), 0.0);
    }

    #[test]
    fn trusted_noise_needs_lossy_detector() {
        let c = SecurityConfig {
            bob_det: DetectorParams::new(1.0, 0.1).unwrap(),
            ..cfg(true)
        };
        assert!(matches!(
            holevo_bound(3.0, 0.5, 0.0, &c),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn holevo_is_non_negative_and_bounded() {
        for &t in &[0.001, 0.01, 0.1, 0.5, 0.99] {
            for &eps in &[0.0, 0.01, 0.1] {
                let k = holevo_bound(2.973, t, eps, &cfg(true)).unwrap();
                assert!(k >= 0.0 && k.is_finite());
            }
        }
    }

    #[test]
    fn config_validation() {
        let mut c = cfg(true);
        c.beta = 0.0;
        assert!(c.validate().is_err());
        let mut c = cfg(true);
        c.fer = 1.0;
        assert!(c.validate().is_err());
        assert!(cfg(true).validate().is_ok());
    }
}
