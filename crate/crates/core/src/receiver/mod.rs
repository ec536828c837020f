//! Bob's detector and the pilot-aided DSP chain.

pub mod calibration;
pub mod detect;
pub mod pilot;
mod spectrum;
pub mod sync;

pub use calibration::{
    calibrate_shot_noise, symbol_variance, CalibrationRecord, ShotNoiseCalibration,
};
pub use detect::{bob_detect, electronic_floor_trace, vacuum_trace, BasebandTrace, ReceiverParams};
pub use pilot::{
    compensate, estimate_transmittance, extract_pilot, normalize_pilot, pilot_power, PilotFilter,
    PilotRecovery, PILOT_PEAK_THRESHOLD,
};
pub use spectrum::power_spectrum;
pub use sync::{frame_synchronize, frame_synchronize_pairs, sync_threshold, SyncResult};
