use thiserror::Error;

/// Failures surfaced to the command line. Each maps to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Data(_) => "data",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }

    /// `error kind=<kind> code=<code> message="<text>"` on one line.
    pub fn line(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ").replace('"', "'");
        format!("error kind={} code={} message=\"{}\"", self.kind(), self.exit_code(), msg)
    }
}

impl From<sdemem::Error> for CliError {
    fn from(e: sdemem::Error) -> Self {
        use sdemem::Error as E;
        let msg = e.to_string();
        match e {
            E::Initialization(_) | E::Numerical(_) | E::InvalidWeights(_) => CliError::Numerical(msg),
            E::InvalidData(_) | E::InvalidDesign(_) | E::Truncated { .. } | E::Summary(_) => CliError::Data(msg),
            E::InvalidParameter(_) | E::NotInModel(_) | E::Dimension { .. } | E::Samples(_) => CliError::Usage(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
