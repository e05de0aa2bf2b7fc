//! All file output goes through [`OutDir`], which only hands out paths
//! below its root and records every file written as an artifact.

use std::path::{Component, Path, PathBuf};

use crate::error::{CliError, Result};

#[derive(Debug)]
pub struct OutDir {
    root: PathBuf,
    artifacts: Vec<String>,
}

impl OutDir {
    pub fn create(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        std::fs::create_dir_all(&root)?;
        Ok(Self { root, artifacts: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Resolves a relative path below the root, creating parent
    /// directories, and records it as an artifact.
    pub fn file(&mut self, rel: &str) -> Result<PathBuf> {
        let p = Path::new(rel);
        if rel.is_empty() || !p.components().all(|c| matches!(c, Component::Normal(_))) {
            return Err(CliError::OutsideOutput(rel.to_string()));
        }
        let full = self.root.join(p);
        if let Some(parent) = full.parent() {
            std::fs::create_dir_all(parent)?;
        }
        if !self.artifacts.iter().any(|a| a == rel) {
            self.artifacts.push(rel.to_string());
        }
        Ok(full)
    }

    pub fn write(&mut self, rel: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = self.file(rel)?;
        std::fs::write(path, contents)?;
        Ok(())
    }

    pub fn write_json<S: serde::Serialize>(&mut self, rel: &str, value: &S) -> Result<()> {
        let text = serde_json::to_string_pretty(value)?;
        self.write(rel, text)
    }

    /// Artifacts in the order they were first written.
    pub fn artifacts(&self) -> &[String] {
        &self.artifacts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_escaping_paths() {
        let tmp = std::env::temp_dir().join(format!("riga-outdir-{}", std::process::id()));
        let mut out = OutDir::create(&tmp).unwrap();
        for rel in ["../x", "/etc/x", "a/../../x", "", "./x"] {
            assert!(out.file(rel).is_err(), "{rel}");
        }
        out.write("a/b.txt", "hi").unwrap();
        out.write("a/b.txt", "again").unwrap();
        assert_eq!(out.artifacts(), ["a/b.txt"]);
        assert_eq!(std::fs::read_to_string(tmp.join("a/b.txt")).unwrap(), "again");
        std::fs::remove_dir_all(tmp).unwrap();
    }
}
