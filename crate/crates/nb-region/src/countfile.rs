//! Count samples stored as text: base-10 nonnegative integers separated by
//! whitespace, newlines or commas. `#` starts a comment that runs to the end
//! of the line.

use std::io::Read;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CountFileError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("line {line}: `{token}` is not a nonnegative integer")]
    BadToken { line: usize, token: String },

    #[error("need at least 2 counts, found {0}")]
    TooFew(usize),
}

pub fn parse_counts(text: &str) -> Result<Vec<u64>, CountFileError> {
    let mut counts = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        for token in line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            // reject signs explicitly; u64::from_str accepts a leading '+'
            let value = if token.bytes().all(|b| b.is_ascii_digit()) { token.parse::<u64>().ok() } else { None };
            match value {
                Some(v) => counts.push(v),
                None => return Err(CountFileError::BadToken { line: idx + 1, token: token.to_string() }),
            }
        }
    }
    if counts.len() < 2 {
        return Err(CountFileError::TooFew(counts.len()));
    }
    Ok(counts)
}

/// Reads a count file; `-` reads standard input.
pub fn read_counts(path: &Path) -> Result<Vec<u64>, CountFileError> {
    let io_err = |source| CountFileError::Io { path: path.display().to_string(), source };
    let text = if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf).map_err(io_err)?;
        buf
    } else {
        std::fs::read_to_string(path).map_err(io_err)?
    };
    parse_counts(&text)
}
