use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate kernel: every Gaussian weight underflows at sigma = {sigma}")]
    DegenerateKernel { sigma: f64 },

    #[error("dimension {dim} exceeds the dense cap of {cap}")]
    Resource { dim: usize, cap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
