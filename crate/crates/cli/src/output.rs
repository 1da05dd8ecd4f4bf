//! Artifact envelopes and writing with overwrite protection.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::RunConfig;
use crate::Usage;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// JSON wrapper carried by every artifact.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    run: &'a RunConfig,
    result: T,
}

pub fn json<T: Serialize>(run: &RunConfig, result: T) -> Result<Vec<u8>> {
    let env = Envelope {
        tool: "dsbm",
        version: VERSION,
        run,
        result,
    };
    let mut bytes = serde_json::to_vec_pretty(&env)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Comment preamble for CSV artifacts; the edge and group readers skip
/// lines starting with `#`.
pub fn csv_preamble(run: &RunConfig) -> Result<Vec<u8>> {
    Ok(format!("# dsbm {VERSION}\n# run: {}\n", serde_json::to_string(run)?).into_bytes())
}

pub fn csv_with_preamble(
    run: &RunConfig,
    body: impl FnOnce(&mut Vec<u8>) -> Result<()>,
) -> Result<Vec<u8>> {
    let mut bytes = csv_preamble(run)?;
    body(&mut bytes)?;
    Ok(bytes)
}

pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Self {
            name: name.into(),
            bytes,
        }
    }
}

/// Writes artifacts into `out`, or the first one to stdout when no output
/// directory is given. Nothing is written if any target already exists
/// and `force` is off.
pub fn emit(out: Option<&Path>, force: bool, artifacts: &[Artifact]) -> Result<()> {
    let Some(dir) = out else {
        let mut stdout = std::io::stdout().lock();
        if let Some(a) = artifacts.first() {
            stdout.write_all(&a.bytes)?;
        }
        return Ok(());
    };
    let targets: Vec<PathBuf> = artifacts.iter().map(|a| dir.join(&a.name)).collect();
    if !force {
        if let Some(existing) = targets.iter().find(|p| p.exists()) {
            return Err(Usage(format!(
                "refusing to overwrite {} (pass --force)",
                existing.display()
            ))
            .into());
        }
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (a, path) in artifacts.iter().zip(&targets) {
        fs::write(path, &a.bytes).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
