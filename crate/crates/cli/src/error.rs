use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] tcxy::Error),

    #[error("row {row} (tau = {tau}): {source}")]
    Row {
        row: usize,
        tau: f64,
        source: tcxy::Error,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) | CliError::Row { source: e, .. } => {
                if e.is_config() {
                    EXIT_CONFIG
                } else {
                    EXIT_NUMERIC
                }
            }
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Verify(_) => EXIT_VERIFY,
        }
    }
}
