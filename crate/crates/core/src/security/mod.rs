//! Parameter estimation, excess-noise budgets and asymptotic key rates.

pub mod budget;
pub mod estimate;
pub mod gaussian;
pub mod optimize;
pub mod rate;
pub mod symplectic;

pub use budget::{assemble_noise_budget, Ablation, AblationRun, NoiseBudget};
pub use estimate::{average_estimates, estimate_channel_params, ChannelEstimate, MIN_PAIRS};
pub use gaussian::{holevo_bound, mutual_information, SecurityConfig};
pub use optimize::{optimize_source_params, ChannelPoint, SourceOptimum};
pub use rate::{
    key_rate, secret_key_rate, total_key_rate, KeyRateBin, KeyRatePoint, KeyRateReport,
};
pub use symplectic::{entropy, g, symplectic_eigenvalues};
