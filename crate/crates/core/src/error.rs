use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The bus/line graph is not a single connected tree rooted at the reference.
    #[error("topology error: {0}")]
    Topology(String),

    /// The network model is unusable, e.g. a singular `Y_LL` block.
    #[error("model error: {message} (buses: {})", buses.join(", "))]
    Model { message: String, buses: Vec<String> },

    #[error("config error: {0}")]
    Config(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    /// Fixed-point power flow failed to contract.
    #[error(
        "power flow diverged after {iterations} iterations \
         (residual {residual:.3e} VA, contraction lost above loading multiplier {critical_loading:.3})"
    )]
    Divergence {
        iterations: usize,
        residual: f64,
        critical_loading: f64,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse(_) | Error::Topology(_) | Error::Dimension(_) => 2,
            Error::Io(_) => 3,
            Error::Model { .. } | Error::Numerical(_) | Error::Divergence { .. } => 4,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            Error::Io(e.into())
        } else {
            Error::Parse(e.to_string())
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::Io(io),
                other => Error::Parse(format!("{other:?}")),
            }
        } else {
            Error::Parse(e.to_string())
        }
    }
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Config(e.to_string())
    }
}
