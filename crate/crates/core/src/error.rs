use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("enumeration needs {required} matrices but the budget is {budget}")]
    Budget { required: String, budget: u64 },

    #[error("no MDS matrix found after {attempts} attempts (last singular minor at columns {last_witness:?})")]
    Generation { attempts: u64, last_witness: Vec<usize> },

    #[error("cannot fit exponent: {0}")]
    Fit(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures where the request was valid but could not be carried
    /// out (enumeration budget, exhausted generation attempts).
    pub fn is_resource_failure(&self) -> bool {
        matches!(self, Error::Budget { .. } | Error::Generation { .. })
    }
}
