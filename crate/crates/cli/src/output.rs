//! Run configuration sidecars and atomic file output.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lspacf::BasisFamily;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// A tuning parameter given on the command line: `auto` or a fixed value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Tuning {
    #[default]
    Auto,
    Fixed(usize),
}

impl Tuning {
    pub fn fixed(self) -> Option<usize> {
        match self {
            Tuning::Auto => None,
            Tuning::Fixed(v) => Some(v),
        }
    }
}

impl fmt::Display for Tuning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tuning::Auto => f.write_str("auto"),
            Tuning::Fixed(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for Tuning {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Tuning::Auto);
        }
        match s.parse::<usize>() {
            Ok(v) if v > 0 => Ok(Tuning::Fixed(v)),
            _ => Err(format!("expected `auto` or a positive integer, got `{s}`")),
        }
    }
}

impl From<Tuning> for String {
    fn from(t: Tuning) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for Tuning {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

/// Everything needed to rerun a command, with `auto` choices resolved.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub input: Option<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub basis: Option<BasisFamily>,
    /// Requested basis size (`auto` or fixed).
    pub c_request: Option<Tuning>,
    /// Requested block size (`auto` or fixed).
    pub m_request: Option<Tuning>,
    /// Resolved basis sizes, one per fitted lag.
    pub c: Vec<usize>,
    /// Resolved block sizes, one per test.
    pub m: Vec<usize>,
    pub lag: Option<usize>,
    pub h: Option<usize>,
    pub alpha: Option<f64>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub grid_points: Option<usize>,
    pub demean: bool,
    /// Command-specific settings (model, sample size, scenario, ...).
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        RunConfig {
            command: command.to_string(),
            ..RunConfig::default()
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.extra
            .insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }
}

/// Path of the configuration sidecar written next to `output`.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".run.json");
    output.with_file_name(name)
}

/// Writes `bytes` to a temporary file in the target directory, then renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.flush().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Writes one output file and its configuration sidecar.
pub fn write_with_sidecar(path: &Path, content: &str, config: &RunConfig) -> Result<()> {
    write_atomic(path, content.as_bytes())?;
    let json = serde_json::to_string_pretty(config)?;
    write_atomic(&sidecar_path(path), json.as_bytes())
}

/// Writes to `path` (with sidecar) or to standard output.
pub fn emit(path: Option<&Path>, content: &str, config: &RunConfig) -> Result<()> {
    match path {
        Some(p) => write_with_sidecar(p, content, config),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuning_round_trips() {
        for t in [Tuning::Auto, Tuning::Fixed(7)] {
            let s = serde_json::to_string(&t).unwrap();
            assert_eq!(serde_json::from_str::<Tuning>(&s).unwrap(), t);
            assert_eq!(t.to_string().parse::<Tuning>().unwrap(), t);
        }
        assert!("0".parse::<Tuning>().is_err());
        assert!("x".parse::<Tuning>().is_err());
    }

    #[test]
    fn sidecar_sits_next_to_output() {
        assert_eq!(
            sidecar_path(Path::new("out/pacf.csv")),
            PathBuf::from("out/pacf.csv.run.json")
        );
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
