//! Atomic artifact emission: everything is staged, renamed into place,
//! and recorded in a manifest with checksums. A failed run never
//! leaves partial outputs behind.

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Serialize)]
struct ManifestArtifact {
    name: String,
    sha256: String,
    bytes: usize,
}

#[derive(Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    mode: String,
    config_sha256: String,
    artifacts: Vec<ManifestArtifact>,
}

pub struct ArtifactSink {
    out_dir: PathBuf,
    staging: PathBuf,
    mode: String,
    config_sha256: String,
    artifacts: Vec<ManifestArtifact>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

impl ArtifactSink {
    pub fn new(out_dir: &Path, mode: &str, config_bytes: &[u8]) -> Result<Self> {
        std::fs::create_dir_all(out_dir)
            .with_context(|| format!("creating output dir {}", out_dir.display()))?;
        let staging = out_dir.join(".staging");
        if staging.exists() {
            std::fs::remove_dir_all(&staging)?;
        }
        std::fs::create_dir(&staging)?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            staging,
            mode: mode.to_string(),
            config_sha256: sha256_hex(config_bytes),
            artifacts: Vec::new(),
        })
    }

    /// Stage one artifact.
    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let bytes = contents.as_bytes();
        std::fs::write(self.staging.join(name), bytes)
            .with_context(|| format!("staging artifact {name}"))?;
        self.artifacts.push(ManifestArtifact {
            name: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    /// Move everything into place and write the manifest last.
    pub fn commit(mut self) -> Result<()> {
        self.artifacts.sort_by(|a, b| a.name.cmp(&b.name));
        let manifest = Manifest {
            tool: "thzsim",
            version: env!("CARGO_PKG_VERSION"),
            mode: self.mode.clone(),
            config_sha256: self.config_sha256.clone(),
            artifacts: std::mem::take(&mut self.artifacts),
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(self.staging.join("manifest.json"), text)?;

        let mut names: Vec<String> = manifest.artifacts.iter().map(|a| a.name.clone()).collect();
        names.push("manifest.json".into());
        for name in names {
            std::fs::rename(self.staging.join(&name), self.out_dir.join(&name))
                .with_context(|| format!("publishing artifact {name}"))?;
        }
        std::fs::remove_dir_all(&self.staging)?;
        Ok(())
    }
}

impl Drop for ArtifactSink {
    fn drop(&mut self) {
        // commit() removes the staging dir; anything left here means
        // the run failed and the partial outputs must go
        if self.staging.exists() {
            let _ = std::fs::remove_dir_all(&self.staging);
        }
    }
}
