use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const VERIFICATION: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Core(#[from] cssp::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use cssp::Error as E;
        match self {
            Self::Core(
                E::NoConvergence { .. }
                | E::ZeroPolynomial
                | E::NoRootInRange { .. }
                | E::AllCandidatesDegenerate { .. }
                | E::NotSymmetric { .. },
            ) => exit::NUMERICAL,
            _ => exit::USAGE,
        }
    }
}
