//! Load and price series ingestion, moment estimation, demand calibration
//! and the on-disk model file.

mod calibrate;
mod model_file;
mod series;

pub use calibrate::{
    baseline_tariff, calibrate_demand, estimate_moments, kernel, revenue_baseline, Calibration,
    CalibrationConfig, MomentEstimate, RevenueBaseline,
};
pub use model_file::{
    ModelFile, Provenance, COVARIANCE_CONVENTION, MODEL_FORMAT, MODEL_FORMAT_VERSION,
};
pub use series::{parse_csv, parse_csv_reader, PriceUnit, RawSeries, SeriesKind};

use std::path::PathBuf;

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("day {day} is missing hour {hour}")]
    MissingHour { day: usize, hour: usize },
    #[error("line {line}: day {day} hour {hour} appears more than once")]
    DuplicateHour { line: u64, day: i64, hour: usize },
    #[error("line {line}: value is not finite")]
    NonFiniteValue { line: u64 },
    #[error("line {line}: load must be non-negative, found {value}")]
    NegativeLoad { line: u64, value: f64 },
    #[error("series contain no rows")]
    EmptySeries,
    #[error("load and price series do not align: {0}")]
    AlignmentMismatch(String),
    #[error("a single day gives no covariance estimate")]
    SingleScenario,
    #[error("mean consumption must be positive, total is {0}")]
    NonPositiveLoad(f64),
    #[error("elasticity target must be negative, got {0}")]
    ScaleNonPositive(f64),
    #[error("invalid calibration setting: {0}")]
    InvalidConfig(String),
    #[error("realized mean elasticity {realized} differs from target {target}")]
    CalibrationMismatch { realized: f64, target: f64 },
    #[error("model file: {0}")]
    ModelFile(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
