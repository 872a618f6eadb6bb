//! Error type shared by all modules.

use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the engine.
///
/// `Domain` marks arguments outside an operation's mathematical domain,
/// `Config` marks inconsistent parameter sets, `Truncation` marks a series
/// whose tail was not yet below tolerance at the configured cutoff, and
/// `CannotBound` marks decoy estimates that degenerate (for example a zero
/// single-photon yield bound, which leaves the error bound undefined).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("series truncation: {0}")]
    Truncation(String),
    #[error("cannot bound: {0}")]
    CannotBound(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
