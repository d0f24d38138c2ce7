use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bounding box: {0}")]
    InvalidBox(String),

    #[error("camera tilt {theta} rad is singular (|sin theta| < 1e-9)")]
    SingularTilt { theta: f64 },

    #[error("camera model invalid: {0}")]
    InvalidCamera(String),

    #[error("projection matrix is singular (|det| = {det:e})")]
    SingularMatrix { det: f64 },

    #[error("pixel ({x}, {y}) lies on the horizon line")]
    HorizonPoint { x: f64, y: f64 },

    #[error("homography estimation failed: {0}")]
    Estimation(String),

    #[error("predicted box area is non-positive")]
    DegeneratePrediction,

    #[error("innovation covariance is not positive definite")]
    NumericalUpdate,

    #[error("cost matrix entry ({row}, {col}) is not finite")]
    NonFiniteCost { row: usize, col: usize },

    #[error("cost matrix rows have unequal lengths")]
    RaggedCost,

    #[error("frame {got} is not after frame {previous}")]
    FrameOrder { previous: u64, got: u64 },

    #[error("track {id} appears in violations but has no position this frame")]
    ZoneConsistency { id: u64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("frame {frame}: {source}")]
    AtFrame {
        frame: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
