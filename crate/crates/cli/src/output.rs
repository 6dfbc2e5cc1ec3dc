use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance shared by every file a run writes.
#[derive(Clone, Debug)]
pub struct Header {
    pub hash: String,
    pub seed: u64,
}

impl Header {
    /// Hash over the command description and the contents of its input files.
    pub fn new(command: &str, inputs: &[&str], seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        for text in inputs {
            h.update([0u8]);
            h.update(text.as_bytes());
        }
        Header {
            hash: hex::encode(h.finalize()),
            seed,
        }
    }

    pub fn lines(&self) -> Vec<String> {
        vec![
            format!("torus-hydro {VERSION}"),
            format!("config-sha256 {}", self.hash),
            format!("seed {}", self.seed),
        ]
    }

    pub fn comment_block(&self) -> String {
        self.lines().iter().map(|l| format!("# {l}\n")).collect()
    }

    /// Write `body` behind the comment header.
    pub fn write_text(&self, path: &Path, body: &str) -> Result<(), CliError> {
        write(path, format!("{}{body}", self.comment_block()).as_bytes())
    }
}

pub fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

/// 17 significant digits.
pub fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `out` with its extension replaced.
pub fn sibling(out: &Path, ext: &str) -> PathBuf {
    out.with_extension(ext)
}

pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid `{s}` is not of the form NxM"))?;
    let n: usize = a.trim().parse().map_err(|_| format!("bad grid size `{a}`"))?;
    let m: usize = b.trim().parse().map_err(|_| format!("bad grid size `{b}`"))?;
    if n == 0 || m == 0 {
        return Err("grid sizes must be positive".into());
    }
    Ok((n, m))
}

pub fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("64x32"), Ok((64, 32)));
        assert_eq!(parse_grid("8X8"), Ok((8, 8)));
        assert!(parse_grid("64").is_err());
        assert!(parse_grid("0x4").is_err());
    }

    #[test]
    fn float_format() {
        assert_eq!(f17(0.1), "1.0000000000000001e-1");
        assert_eq!(f17(-2.0), "-2.0000000000000000e0");
        assert_eq!(f17(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn header_depends_on_inputs() {
        let a = Header::new("classify", &["kind = 1"], 3);
        let b = Header::new("classify", &["kind = 2"], 3);
        assert_ne!(a.hash, b.hash);
        assert_eq!(a.hash, Header::new("classify", &["kind = 1"], 3).hash);
        assert_eq!(a.hash.len(), 64);
        assert!(a.comment_block().starts_with("# torus-hydro "));
    }
}
