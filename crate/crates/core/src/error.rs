use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the simulator, the DSP chain and the security analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty request: {0}")]
    EmptyRequest(&'static str),

    #[error("{name} = {value} is outside its domain ({constraint})")]
    Domain {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("length mismatch for {what}: {left} vs {right}")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("pilot not found: peak-to-floor ratio {ratio:.2} below threshold {threshold:.2}")]
    PilotNotFound { ratio: f64, threshold: f64 },

    #[error("pilot envelope magnitude {magnitude:.3e} below threshold {threshold:.3e}")]
    LowPilotPower { magnitude: f64, threshold: f64 },

    #[error("a calibration record is required")]
    CalibrationRequired,

    #[error("inconsistent calibration: vacuum variance {vacuum:.6e} not above electronic floor {floor:.6e}")]
    InconsistentCalibration { vacuum: f64, floor: f64 },

    #[error("frame synchronization failed: best peak {peak:.4} below threshold {threshold:.4}")]
    SyncFailure { peak: f64, threshold: f64 },

    #[error("insufficient pairs for estimation: {got} < {need}")]
    InsufficientPairs { got: usize, need: usize },

    #[error("estimation degenerate: {0}")]
    EstimationDegenerate(String),

    #[error("ablation set has no baseline run")]
    MissingBaseline,

    #[error("unphysical covariance matrix: {0}")]
    Unphysical(String),

    #[error("trace format error: {0}")]
    Format(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("frame {frame}: {source}")]
    Frame {
        frame: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, constraint: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            constraint,
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn in_frame(self, frame: usize) -> Self {
        Error::Frame {
            frame,
            source: Box::new(self),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            _ => 3,
        }
    }
}

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::domain(name, value, "must lie in [0, 1]"))
    }
}

pub(crate) fn check_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(name, value, "must be finite and >= 0"))
    }
}
