use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Solver(_) => "solver",
            CliError::Io(_) => "io",
        }
    }

    /// One-line JSON report written to stderr on failure.
    pub fn report(&self) -> String {
        let message = match self {
            CliError::Config(m) | CliError::Solver(m) | CliError::Io(m) => m,
        };
        json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": message,
        })
        .to_string()
    }
}

impl From<cavity_exciton::Error> for CliError {
    fn from(e: cavity_exciton::Error) -> Self {
        use cavity_exciton::Error as E;
        match e {
            E::InvalidParams(_) | E::InvalidGrid(_) => CliError::Config(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
