use thiserror::Error;

#[derive(Debug, Error)]
pub enum McError {
    #[error("invalid campaign configuration: {0}")]
    InvalidConfig(String),

    #[error("linear algebra backend failure: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),

    #[error("archive I/O failure: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, McError>;
