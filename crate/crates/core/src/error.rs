use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid quantizer: {0}")]
    InvalidQuantizer(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure in {context}: {detail}")]
    Numerical {
        context: &'static str,
        detail: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
