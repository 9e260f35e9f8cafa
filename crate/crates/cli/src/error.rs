use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    /// Unstable start on the equilibrium segment, or no root.
    #[error("ill-posed analysis: {0}")]
    IllPosed(String),
    #[error("{0}")]
    Blowup(String),
    #[error("all sweep rows failed")]
    AllRowsFailed,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn from_model(err: rumorflow::Error) -> Self {
        use rumorflow::Error as E;
        match err {
            E::IntegrationBlowup { .. } => Self::Blowup(err.to_string()),
            E::UnstableStart { .. } | E::NoRoot(_) => Self::IllPosed(err.to_string()),
            _ => Self::Invalid(err.to_string()),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Invalid(_) => 2,
            Self::IllPosed(_) | Self::AllRowsFailed => 3,
            Self::Blowup(_) => 4,
            Self::Io(_) => 1,
        }
    }
}

impl From<rumorflow::Error> for CliError {
    fn from(err: rumorflow::Error) -> Self {
        Self::from_model(err)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        Self::Io(err.into())
    }
}
