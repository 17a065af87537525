use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("singular symbol: |f| = {modulus:e} at theta = {theta:?} is below {delta:e}")]
    SingularSymbol {
        modulus: f64,
        theta: Vec<f64>,
        delta: f64,
    },

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("singular preconditioner: {0}")]
    SingularPreconditioner(String),

    #[error("dense materialization of {rows} rows exceeds the cap of {cap}")]
    TooLarge { rows: usize, cap: usize },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("operation not supported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, got })
    }
}
