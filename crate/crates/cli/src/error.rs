use mpd_core::MpdError;
use thiserror::Error;

use crate::config::Diagnostic;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration")]
    Config(Vec<Diagnostic>),
    #[error(transparent)]
    Core(#[from] MpdError),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    /// 2 for input problems, 3 for a dual-route disagreement, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Core(MpdError::EmptyRange(_) | MpdError::InvalidInput(_)) => 2,
            CliError::Core(MpdError::OracleMismatch(_)) => 3,
            _ => 1,
        }
    }

    pub fn report(&self) -> Vec<String> {
        match self {
            CliError::Config(diags) => diags.iter().map(ToString::to_string).collect(),
            other => vec![format!("error: {other}")],
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Core(MpdError::EmptyRange("x".into())).exit_code(), 2);
        let mismatch = CliError::Core(MpdError::OracleMismatch("K_A off".into()));
        assert_eq!(mismatch.exit_code(), 3);
        assert!(mismatch.report()[0].contains("oracle mismatch"));
        assert_eq!(CliError::Io("disk".into()).exit_code(), 1);
    }
}
