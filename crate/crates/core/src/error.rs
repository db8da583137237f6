use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not antisymmetric: |A[{row}][{col}] + A[{col}][{row}]| = {violation:e}")]
    NotAntisymmetric {
        row: usize,
        col: usize,
        violation: f64,
    },

    #[error("matrix shape mismatch: expected {expected} entries, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("brute-force Pfaffian limited to n <= {max}, got n = {n}")]
    TooLarge { n: usize, max: usize },

    #[error("invalid quench spec: {0}")]
    InvalidSpec(String),

    #[error("distance {ell} outside [1, {max}]")]
    DistanceOutOfRange { ell: usize, max: usize },

    #[error("observable {observable} has imaginary part {imag:e} at t = {time}")]
    ImaginaryResidue {
        observable: &'static str,
        time: f64,
        imag: f64,
    },

    #[error("exact diagonalization supports 2 <= L <= {max}, got L = {size}")]
    OracleSize { size: usize, max: usize },

    #[error("series too short: {0}")]
    SeriesTooShort(String),

    #[error("invalid time window: {0}")]
    Window(String),

    #[error("invalid recurrence parameter: {0}")]
    Recurrence(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("sweep failed at h = {h}, l = {ell}: {source}")]
    Cell {
        h: f64,
        ell: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
