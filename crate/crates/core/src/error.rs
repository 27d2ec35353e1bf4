use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::sample::Shape;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("step {t} out of range 1..={steps}")]
    StepOutOfRange { t: usize, steps: usize },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: Shape, actual: Shape },

    #[error("invalid shape {0}: every dimension must be at least 1")]
    InvalidShape(Shape),

    #[error("sample data length {len} does not match shape {shape}")]
    DataLength { shape: Shape, len: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("unknown class id {0}")]
    UnknownClass(usize),

    #[error("invalid condition: {0}")]
    InvalidCondition(String),

    #[error("eta_ddpm too large at step {t}: 1 - alpha_bar[t-1] - sigma^2 = {residual}")]
    InvalidEta { t: usize, residual: f64 },

    #[error("degenerate schedule at step {t}: {reason}")]
    ScheduleDegenerate { t: usize, reason: &'static str },

    #[error("noise map stack does not match schedule (stack {stack:016x}, schedule {schedule:016x})")]
    StackMismatch { stack: u64, schedule: u64 },

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Divergence { epoch: usize },

    #[error("invalid classifier: {0}")]
    InvalidClassifier(String),

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("invalid attack configuration: {0}")]
    InvalidAttack(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("unknown template `{0}`")]
    UnknownTemplate(String),

    #[error("invalid dataset spec: {0}")]
    InvalidDataset(String),

    #[error("bad magic number in {path}: expected {expected:#010x}, found {found:#010x}")]
    BadMagic {
        path: PathBuf,
        expected: u32,
        found: u32,
    },

    #[error("truncated payload in {path}: expected {expected} bytes, found {found}")]
    Truncated {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("count mismatch: {images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("unsupported channel count {0} (expected 1 or 3)")]
    UnsupportedChannels(usize),

    #[error("malformed container: {0}")]
    Container(String),

    #[error("malformed image file: {0}")]
    Image(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
