use std::io;

use thiserror::Error;

/// Errors raised while building, matching, or (de)serializing automata.
#[derive(Debug, Error)]
pub enum DaacError {
    #[error("dictionary: {0}")]
    Dictionary(String),

    #[error("pattern {0} is empty")]
    EmptyPattern(usize),

    #[error("pattern {second} duplicates pattern {first}")]
    DuplicatePattern { first: usize, second: usize },

    #[error("invalid UTF-8 at byte offset {0}")]
    Encoding(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("state id overflow: {needed} ids needed, format allows at most {limit}")]
    StateOverflow { needed: u64, limit: u64 },

    #[error("output position {pos} out of range (store length {len})")]
    OutputRange { pos: u32, len: usize },

    #[error("archive format: {0}")]
    Format(String),

    #[error("archive corrupted: {0}")]
    Corrupt(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = DaacError> = std::result::Result<T, E>;
