use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("tolerance breach: {}", .0.join("; "))]
    Breach(Vec<String>),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] ermakov_core::Error),
}

impl CliError {
    /// 0 success, 1 tolerance breach, 2 configuration or usage error,
    /// 3 numerical or I/O failure.
    pub fn exit_code(&self) -> u8 {
        use ermakov_core::Error as E;
        match self {
            CliError::Breach(_) => 1,
            CliError::Config(_) => 2,
            CliError::Core(E::Domain(_) | E::UnsupportedRegime(_) | E::Precondition(_) | E::Bracketing { .. } | E::Overflow { .. }) => 2,
            CliError::Core(_) | CliError::Io(_) => 3,
        }
    }
}
