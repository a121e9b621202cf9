//! Run manifests: resolved configuration, seeds and SHA-256 of every input and output.

use std::io::Read;
use std::path::Path;

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = std::fs::File::open(path).with_context(|| format!("hashing {}", path.display()))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(format!("{:x}", h.finalize()))
}

#[derive(Default)]
pub struct Manifest {
    root: toml::Table,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut m = Self::default();
        m.set("run", "command", command);
        m.set("run", "version", env!("CARGO_PKG_VERSION"));
        m
    }

    pub fn set(&mut self, section: &str, key: &str, value: impl Into<toml::Value>) {
        let entry = self.root.entry(section.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        if let toml::Value::Table(t) = entry {
            t.insert(key.to_string(), value.into());
        }
    }

    pub fn set_table(&mut self, key: &str, table: toml::Table) {
        self.root.insert(key.to_string(), toml::Value::Table(table));
    }

    /// Records `path` under `section`, keyed by its name relative to `base`.
    pub fn hash(&mut self, section: &str, base: &Path, path: &Path) -> Result<()> {
        let key = path.strip_prefix(base).unwrap_or(path).display().to_string();
        let digest = sha256_file(path)?;
        self.set(section, &key, digest);
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, toml::to_string(&self.root)?).with_context(|| format!("writing {}", path.display()))
    }
}
