//! Shot-noise and pilot-power calibration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::variance;

use super::detect::BasebandTrace;
use super::spectrum::brickwall;

/// Scales measured in a pre-calibration run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    /// Raw units per √SNU.
    pub sigma_cal: f64,
    /// Mean pilot envelope power at unit channel transmittance, raw units².
    pub pilot_ref_power: f64,
    /// Electronic noise referred to shot noise.
    #[serde(default)]
    pub electronic_noise_snu: f64,
}

impl CalibrationRecord {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_cal > 0.0 && self.sigma_cal.is_finite()) {
            return Err(Error::domain("sigma_cal", self.sigma_cal, "must be > 0"));
        }
        if !(self.pilot_ref_power > 0.0 && self.pilot_ref_power.is_finite()) {
            return Err(Error::domain(
                "pilot_ref_power",
                self.pilot_ref_power,
                "must be > 0",
            ));
        }
        if !(self.electronic_noise_snu >= 0.0) {
            return Err(Error::domain(
                "electronic_noise_snu",
                self.electronic_noise_snu,
                "must be >= 0",
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: Self = serde_json::from_str(text)
            .map_err(|e| Error::Format(format!("calibration record: {e}")))?;
        rec.validate()?;
        Ok(rec)
    }
}

/// Shot-noise part of a calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotNoiseCalibration {
    pub sigma_cal: f64,
    pub electronic_noise_snu: f64,
}

/// Per-quadrature variance of the symbol-rate samples of a trace.
pub fn symbol_variance(trace: &BasebandTrace) -> Result<f64> {
    let sps = trace.samples_per_symbol()?;
    if trace.len() < 2 * sps {
        return Err(Error::EmptyRequest("calibration trace too short"));
    }
    let lp = brickwall(
        &trace.samples,
        trace.sample_rate_hz,
        trace.symbol_rate_hz / 2.0,
    );
    let xs: Vec<f64> = lp.iter().step_by(sps).map(|z| z.re).collect();
    let ps: Vec<f64> = lp.iter().step_by(sps).map(|z| z.im).collect();
    Ok((variance(&xs) + variance(&ps)) / 2.0)
}

/// `σ_cal² = Var(vacuum) − Var(floor)`, measured on symbol-rate samples.
pub fn calibrate_shot_noise(
    vacuum: &BasebandTrace,
    floor: Option<&BasebandTrace>,
) -> Result<ShotNoiseCalibration> {
    let v = symbol_variance(vacuum)?;
    let f = match floor {
        Some(t) => symbol_variance(t)?,
        None => 0.0,
    };
    let shot = v - f;
    if !(shot > 0.0) {
        return Err(Error::InconsistentCalibration {
            vacuum: v,
            floor: f,
        });
    }
    Ok(ShotNoiseCalibration {
        sigma_cal: shot.sqrt(),
        electronic_noise_snu: f / shot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::DetectorParams;
    use crate::receiver::detect::{electronic_floor_trace, vacuum_trace, ReceiverParams};
    use crate::rng::{gauss, seeded};
    use num_complex::Complex64;

    fn white(n: usize, var: f64, seed: u64) -> BasebandTrace {
        let mut rng = seeded(seed);
        let s = var.sqrt();
        BasebandTrace {
            samples: (0..n)
                .map(|_| Complex64::new(s * gauss(&mut rng), s * gauss(&mut rng)))
                .collect(),
            sample_rate_hz: 2.0,
            symbol_rate_hz: 1.0,
        }
    }

    #[test]
    fn known_raw_variance() {
        // White noise of per-sample variance 2v becomes v per symbol.
        let v = 7.5;
        let cal = calibrate_shot_noise(&white(400_000, 2.0 * v, 1), None).unwrap();
        assert!((cal.sigma_cal / v.sqrt() - 1.0).abs() < 0.005);
        assert_eq!(cal.electronic_noise_snu, 0.0);
    }

    #[test]
    fn floor_subtraction_recovers_electronic_noise() {
        let rx = ReceiverParams {
            det: DetectorParams::new(0.56, 0.38).unwrap(),
            samples_per_symbol: 2,
            pilot_guard_hz: 15e9,
            raw_gain: 0.02,
        };
        let vac = vacuum_trace(&rx, 200_000, 20e9, &mut seeded(2)).unwrap();
        let floor = electronic_floor_trace(&rx, 200_000, 20e9, &mut seeded(3)).unwrap();
        let cal = calibrate_shot_noise(&vac, Some(&floor)).unwrap();
        assert!(
            (cal.sigma_cal / 0.02 - 1.0).abs() < 0.01,
            "{}",
            cal.sigma_cal
        );
        assert!(
            (cal.electronic_noise_snu - 0.38).abs() < 0.02,
            "{}",
            cal.electronic_noise_snu
        );
    }

    #[test]
    fn longer_trace_agrees() {
        let a = calibrate_shot_noise(&white(100_000, 3.0, 4), None).unwrap();
        let b = calibrate_shot_noise(&white(200_000, 3.0, 5), None).unwrap();
        let se = 1.5f64.sqrt() * (1.0 / 50_000f64).sqrt();
        assert!((a.sigma_cal - b.sigma_cal).abs() < 4.0 * se);
    }

    #[test]
    fn floor_above_vacuum_is_inconsistent() {
        let err = calibrate_shot_noise(&white(10_000, 1.0, 6), Some(&white(10_000, 4.0, 7)));
        assert!(matches!(err, Err(Error::InconsistentCalibration { .. })));
    }

    #[test]
    fn record_json_round_trip() {
        let rec = CalibrationRecord {
            sigma_cal: 0.02,
            pilot_ref_power: 3.5e-2,
            electronic_noise_snu: 0.38,
        };
        assert_eq!(CalibrationRecord::from_json(&rec.to_json()).unwrap(), rec);
        assert!(
            CalibrationRecord::from_json("{\"sigma_cal\": 0, \"pilot_ref_power\": 1}").is_err()
        );
    }
}
