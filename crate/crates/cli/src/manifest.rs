//! Run manifests: the first artifact written by every invocation, recording
//! the command, config path and hash, output directory and tool version.
//! Wall time is appended on completion.

use std::path::{Path, PathBuf};
use std::time::Instant;

use chemstab_core::{Error, Result};
use sha2::{Digest, Sha256};

pub struct Manifest {
    path: PathBuf,
    started: Instant,
}

pub fn config_hash(config_bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(config_bytes))
}

/// Create the output directory (if needed) and write the manifest skeleton.
pub fn start(out: &Path, command: &str, config: &Path, config_bytes: &[u8]) -> Result<Manifest> {
    std::fs::create_dir_all(out)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", out.display())))?;
    let path = out.join(format!("manifest_{command}.txt"));
    let body = format!(
        "command={command}\nconfig={}\nconfig_sha256={}\nout={}\nversion={}\n",
        config.display(),
        config_hash(config_bytes),
        out.display(),
        env!("CARGO_PKG_VERSION"),
    );
    std::fs::write(&path, body)?;
    Ok(Manifest {
        path,
        started: Instant::now(),
    })
}

impl Manifest {
    /// Append the elapsed wall time; call when the command finishes.
    pub fn finish(self) -> Result<()> {
        let wall_ms = self.started.elapsed().as_millis();
        let mut body = std::fs::read_to_string(&self.path)?;
        body.push_str(&format!("wall_ms={wall_ms}\n"));
        std::fs::write(&self.path, body)?;
        Ok(())
    }
}
