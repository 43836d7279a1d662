use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("time {t:e} s lies outside the pulse window [0, {total:e}] s")]
    Domain { t: f64, total: f64 },

    #[error("degenerate pulses at t = {t:e} s: pump and Stokes both vanish")]
    DegeneratePulse { t: f64 },

    #[error("effective Rabi frequency vanishes at interior time t = {t:e} s; phase angle is singular")]
    Singularity { t: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("propagation did not converge after {levels} refinements (residual {residual:e})")]
    Integration { levels: u32, residual: f64 },

    #[error("search failed: {0}")]
    Search(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
