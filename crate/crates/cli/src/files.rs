//! Reading inputs and writing outputs, with the offending path in every
//! error.

use std::fs;
use std::path::{Path, PathBuf};

use lottery_core::io;
use lottery_core::{Decomposition, Instance, Matching, ProbabilisticAssignment};

use crate::error::{CliError, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn with_path<T>(path: &Path, r: lottery_core::Result<T>) -> Result<T> {
    r.map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    with_path(path, io::parse_instance(&read_text(path)?))
}

pub fn read_assignment(inst: &Instance, path: &Path) -> Result<ProbabilisticAssignment> {
    with_path(path, io::parse_assignment(inst, &read_text(path)?))
}

pub fn read_matching(inst: &Instance, path: &Path) -> Result<Matching> {
    with_path(path, io::parse_matching(inst, &read_text(path)?))
}

pub fn read_decomposition(inst: &Instance, path: &Path) -> Result<Decomposition> {
    with_path(path, io::parse_decomposition(inst, &read_text(path)?))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|source| CliError::Config {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, content: &str) -> Result<()> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err)?;
    }
    let mut text = content.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes to `out` when given, stdout otherwise.
pub fn emit(out: Option<&PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(p) => write_file(p, content),
        None => {
            println!("{}", content.trim_end());
            Ok(())
        }
    }
}
