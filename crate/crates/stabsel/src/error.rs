/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A value that must lie on the grid {0, 1/b, ..., 1} does not.
    #[error("value {value} is not on the grid {{0, 1/{b}, ..., 1}}")]
    OffGrid { value: f64, b: usize },

    /// The requested parameter combination is outside the regimes the
    /// bound formulas cover.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// No threshold on the grid achieves the requested control level.
    #[error(
        "no grid threshold achieves the requested level; \
         smallest achievable bound is {smallest:.6e}"
    )]
    InfeasibleLevel { smallest: f64 },

    /// The base selection procedure failed on one subsample.
    #[error("base procedure failed on pair {pair}, half {half}: {message}")]
    SelectorFailed { pair: usize, half: u8, message: String },

    /// Iterative fitting failed to converge or produced non-finite values.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Monte Carlo calibration could not reach its target.
    #[error("calibration failed: {0}")]
    Calibration(String),

    /// A serialized plan, profile or config could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
