//! On-disk state shared between commands. Every write goes through a temp
//! file in the target directory followed by a rename.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;

use crate::fail::{usage, CliResult};

pub const SUITE: &str = "suite.json";
pub const MS_PUBLIC: &str = "ms.public.json";
pub const MS_SECRET: &str = "ms.secret.json";
pub const DC_PUBLIC: &str = "dc.public.json";
pub const DC_SECRET: &str = "dc.secret.json";
pub const LEDGER: &str = "ms_ledger.jsonl";
pub const OUTBOX: &str = "outbox.jsonl";

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Store { root: root.into() }
    }

    pub fn path(&self, rel: impl AsRef<Path>) -> PathBuf {
        self.root.join(rel)
    }

    pub fn participant(&self, id: &[u8]) -> PathBuf {
        self.path("participants")
            .join(format!("{}.secret.json", hex::encode(id)))
    }

    pub fn slot(&self, slot: u64) -> PathBuf {
        self.path("slots").join(format!("{slot}.json"))
    }

    pub fn slot_artifact(&self, slot: u64, kind: &str) -> PathBuf {
        self.path("slots").join(format!("{slot}.{kind}.json"))
    }

    pub fn exists(&self, rel: impl AsRef<Path>) -> bool {
        self.path(rel).exists()
    }

    /// Reads a file that an earlier phase must have produced.
    pub fn read(&self, path: &Path) -> CliResult<String> {
        if !path.exists() {
            return Err(usage(format!(
                "missing artifact {} (run the earlier phase first)",
                path.display()
            )));
        }
        fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(Into::into)
    }

    pub fn read_rel(&self, rel: &str) -> CliResult<String> {
        self.read(&self.path(rel))
    }
}

/// Atomic replace. `secret` files get mode 0600 on unix.
pub fn write_atomic(path: &Path, contents: &[u8], secret: bool) -> CliResult<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).context("creating temp file")?;
    tmp.write_all(contents).context("writing temp file")?;
    tmp.as_file().sync_all().context("syncing temp file")?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        let mode = if secret { 0o600 } else { 0o644 };
        fs::set_permissions(tmp.path(), fs::Permissions::from_mode(mode))
            .context("setting permissions")?;
    }
    #[cfg(not(unix))]
    let _ = secret;
    tmp.persist(path)
        .map_err(|e| e.error)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}
