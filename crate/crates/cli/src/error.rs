use gsvd_align::Error;

/// Failures surfaced by the binary, each with a fixed exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),

    #[error("{flagged} of {total} samples are non-relational")]
    MostlyFlagged { flagged: usize, total: usize },

    #[error("{0}")]
    Input(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_input_error() => 2,
            CliError::Core(_) => 3,
            CliError::MostlyFlagged { .. } => 4,
            CliError::Input(_) => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::MostlyFlagged { .. } => "non_relational_dominated",
            CliError::Input(_) => "input",
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        })
        .to_string()
    }
}

/// Fails when more than half of the samples carry the non-relational flag.
pub fn check_flagged(flagged: usize, total: usize, allow: bool) -> Result<(), CliError> {
    if total > 0 && 2 * flagged > total {
        eprintln!("warning: {flagged} of {total} samples are non-relational");
        if !allow {
            return Err(CliError::MostlyFlagged { flagged, total });
        }
    }
    Ok(())
}
