//! Scenario runner behind the `mprlab` command: config parsing, CSV output
//! and the preset datasets for each figure.

pub mod config;
pub mod figures;
pub mod scenario;

pub use config::{default_table1, Config};
pub use scenario::Csv;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] mprlab::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("unknown figure {0}; expected one of {list}", list = figures::FIGURES.join(", "))]
    UnknownFigure(String),
}

impl CliError {
    /// Process exit status: 2 for bad input, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::UnknownFigure(_) => 2,
            CliError::Model(mprlab::Error::InvalidParameter { .. }) => 2,
            _ => 1,
        }
    }
}
